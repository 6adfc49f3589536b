#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "webgeom/error.hpp"
#include "webgeom/expr.hpp"
#include "webgeom/web.hpp"

namespace webgeom {

/// A web read from its JSON description, with the optional base point.
struct WebDescription {
  Web web;
  std::vector<std::string> variables;
  ConstantTable constants;
  std::optional<Point> base_point;
};

namespace detail {

inline std::string caret_line(const std::string& text, const Error& e) {
  if (!e.span()) return {};
  const auto begin = std::min(e.span()->begin, text.size());
  const auto end = std::max(begin + 1, std::min(e.span()->end, text.size()));
  return "\n    " + text + "\n    " + std::string(begin, ' ') + std::string(end - begin, '^');
}

inline std::vector<std::string> default_variables(std::size_t n) {
  if (n == 2) return {"x", "y"};
  if (n == 3) return {"x", "y", "z"};
  std::vector<std::string> v;
  for (std::size_t i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

}  // namespace detail

/// Parses the JSON web format:
///   { "dimension": n, "variables": [..], "constants": {name: value},
///     "foliations": [ {"kind": "first_integrals" | "slopes" | "direction",
///                      "exprs": [..], "codim": c} ],
///     "label": "..", "base_point": [..] }
/// Variables default to x, y, z for n <= 3 and x1..xn otherwise.
/// `overrides` replaces or adds constants. Every failure is an InputError
/// whose message locates the offending expression.
inline WebDescription parse_web_json(const std::string& text, const ConstantTable& overrides = {}) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw InputError("web description must be a JSON object");
    if (!doc.contains("dimension") || !doc["dimension"].is_number_integer()) {
      throw InputError("'dimension' must be an integer");
    }
    const auto n_signed = doc["dimension"].get<long long>();
    if (n_signed < 2 || n_signed > 16) throw InputError("'dimension' must lie between 2 and 16");
    const auto n = static_cast<std::size_t>(n_signed);

    std::vector<std::string> vars =
        doc.contains("variables") ? doc["variables"].get<std::vector<std::string>>() : detail::default_variables(n);
    if (vars.size() != n) throw InputError("'variables' must list exactly 'dimension' names");

    ConstantTable constants;
    if (doc.contains("constants")) {
      for (auto& [k, v] : doc["constants"].items()) {
        if (!v.is_number()) throw InputError("constant '" + k + "' must be a number");
        constants[k] = v.get<double>();
      }
    }
    for (const auto& [k, v] : overrides) constants[k] = v;

    if (!doc.contains("foliations") || !doc["foliations"].is_array()) {
      throw InputError("'foliations' must be an array");
    }
    std::vector<Foliation> fols;
    std::size_t idx = 0;
    for (const auto& f : doc["foliations"]) {
      ++idx;
      const std::string where = "foliation " + std::to_string(idx);
      if (!f.is_object() || !f.contains("kind") || !f.contains("exprs")) {
        throw InputError(where + ": needs 'kind' and 'exprs'");
      }
      const auto kind = f["kind"].get<std::string>();
      const auto texts = f["exprs"].get<std::vector<std::string>>();
      std::vector<ScalarField> exprs;
      for (std::size_t e = 0; e < texts.size(); ++e) {
        try {
          exprs.push_back(ScalarField::parse(texts[e], vars, constants));
        } catch (const InputError&) {
          throw;
        } catch (const Error& err) {
          throw InputError(where + ", expression " + std::to_string(e + 1) + ": " + err.what() +
                           detail::caret_line(texts[e], err));
        }
      }
      const std::optional<std::size_t> codim =
          f.contains("codim") ? std::optional<std::size_t>(f["codim"].get<std::size_t>()) : std::nullopt;
      try {
        if (kind == "first_integrals") {
          if (codim && *codim != exprs.size()) throw InputError("codim must equal the number of first integrals");
          fols.push_back(foliation_from_first_integrals(std::move(exprs), n));
        } else if (kind == "direction") {
          if (codim && *codim != n - 1) throw InputError("a direction field has codim n - 1");
          fols.push_back(foliation_from_direction(std::move(exprs), n));
        } else if (kind == "slopes") {
          if (!codim) throw InputError("'slopes' needs an explicit 'codim'");
          fols.push_back(foliation_from_slopes(std::move(exprs), n, *codim));
        } else {
          throw InputError("unknown kind '" + kind + "'");
        }
      } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
      }
    }
    if (fols.empty()) throw InputError("'foliations' is empty");

    std::optional<Point> base;
    if (doc.contains("base_point")) {
      base = doc["base_point"].get<std::vector<double>>();
      if (base->size() != n) throw InputError("'base_point' must have 'dimension' entries");
    }
    const std::string label = doc.value("label", std::string{});
    return {Web(n, std::move(fols), label), std::move(vars), std::move(constants), std::move(base)};
  } catch (const json::exception& e) {
    throw InputError(std::string("bad web description: ") + e.what());
  }
}

}  // namespace webgeom
