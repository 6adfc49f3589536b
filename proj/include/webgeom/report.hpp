#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "webgeom/curvature.hpp"

namespace webgeom {

inline nlohmann::json to_json(const LinearizabilityReport& r) {
  using nlohmann::json;
  json samples = json::array();
  for (const auto& s : r.samples) {
    json j;
    j["point"] = s.point;
    j["status"] = s.skipped ? "skipped" : s.pass ? "pass" : "fail";
    if (s.skipped) {
      j["reason"] = s.skip_reason;
    } else {
      j["thomas_norm"] = s.thomas_norm;
      j["scale"] = s.scale;
      j["residual"] = s.residual;
      j["residual_scaled"] = s.residual_scaled;
      j["equations"] = s.equations;
      j["unknowns"] = s.unknowns;
      j["weyl_norm"] = s.weyl_norm;
      j["liouville_norm"] = s.liouville_norm;
      json sig = json::array();
      for (const auto& [label, v] : s.sigma_norms) sig.push_back({{"label", label}, {"norm", v}});
      j["sigma"] = sig;
      j["failed"] = s.failed;
    }
    samples.push_back(std::move(j));
  }
  return {
      {"label", r.label},
      {"dimension", r.dimension},
      {"codims", r.codims},
      {"verdict", verdict_name(r.verdict)},
      {"skipped", r.skipped},
      {"curvature_test", r.curvature_test},
      {"config",
       {{"order", r.config.order},
        {"tol", r.config.tol},
        {"samples", r.config.samples},
        {"radius", r.config.radius},
        {"seed", r.config.seed},
        {"general_position_tol", r.config.general_position_tol}}},
      {"base_point", r.base_point},
      {"frame", {{"generic", r.generic_frame}, {"matrix", r.frame_matrix}}},
      {"samples", samples},
  };
}

inline std::string to_text(const LinearizabilityReport& r) {
  std::string out;
  char buf[512];
  auto add = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };
  add("web: %s (n = %zu, d = %zu)\n", r.label.empty() ? "<unnamed>" : r.label.c_str(), r.dimension, r.codims.size());
  add("curvature test: %s; tol %.3g; order %d; %zu samples in radius %.3g; seed %llu\n", r.curvature_test.c_str(),
      r.config.tol, r.config.order, r.config.samples, r.config.radius,
      static_cast<unsigned long long>(r.config.seed));
  if (r.generic_frame) out += "working frame: generic rotation (raw input not transverse)\n";
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto& s = r.samples[i];
    std::string pt;
    for (std::size_t k = 0; k < s.point.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.6g", k ? ", " : "", s.point[k]);
      pt += buf;
    }
    if (s.skipped) {
      add("  [%zu] (%s) skipped: %s\n", i + 1, pt.c_str(), s.skip_reason.c_str());
      continue;
    }
    add("  [%zu] (%s) %s  |Pi| %.3e  residual %.3e  %s %.3e", i + 1, pt.c_str(), s.pass ? "pass" : "FAIL",
        s.thomas_norm, s.residual_scaled, r.curvature_test.c_str(),
        r.dimension > 2 ? s.weyl_norm : s.liouville_norm);
    for (const auto& [label, v] : s.sigma_norms) add("  Sigma(%zu) %.3e", label, v);
    out += "\n";
  }
  if (r.verdict == Verdict::Inconclusive) {
    add("verdict: inconclusive at %zu point%s\n", r.skipped, r.skipped == 1 ? "" : "s");
  } else {
    add("verdict: %s\n", r.verdict == Verdict::Linearizable ? "linearizable" : "NOT linearizable");
  }
  return out;
}

}  // namespace webgeom
