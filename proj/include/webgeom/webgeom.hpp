#pragma once

#include "webgeom/error.hpp"
#include "webgeom/multi_index.hpp"
#include "webgeom/jet.hpp"
#include "webgeom/expr.hpp"
#include "webgeom/jet_matrix.hpp"
#include "webgeom/web.hpp"
#include "webgeom/web_json.hpp"
#include "webgeom/connection.hpp"
#include "webgeom/curvature.hpp"
#include "webgeom/report.hpp"
