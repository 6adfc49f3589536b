#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "builtin_webs.hpp"
#include "webgeom/error.hpp"

namespace webgeom::cli {

struct BuiltinInfo {
  std::string name;
  std::string description;
};

inline const std::vector<BuiltinInfo>& builtin_list() {
  static const std::vector<BuiltinInfo> list{
      {"linear5_c3", "five hyperplane foliations in dimension 3 (linear)"},
      {"linear_pushforward_n2", "linear planar 4-web pushed by (exp(x), y/(1-x))"},
      {"bol", "Bol's planar 5-web: four line pencils and the cross-ratio foliation"},
      {"w8", "curve 8-web in dimension 3 with parameter eps (linearizable iff eps = 1)"},
      {"mixed6_c3", "three surfaces and three curves in dimension 3, random per seed"},
      {"paper_mw_check", "determinant identity for the 15 x 15 system of a normalized 5-web"},
  };
  return list;
}

inline bool is_builtin(const std::string& name) {
  for (const auto& b : builtin_list()) {
    if (b.name == name) return true;
  }
  return false;
}

/// Mixed 6-web: u_i = w_i.x + c_i (v_i.x)^2 and X_j = (1, b_j + s_j (x + z), e_j + t_j y),
/// coefficients drawn from the seed.
inline std::string mixed6_json(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  char buf[512];
  std::string out = "{\n  \"label\": \"mixed6_c3\",\n  \"dimension\": 3,\n  \"variables\": [\"x\", \"y\", \"z\"],\n";
  out += "  \"base_point\": [0.1, -0.2, 0.15],\n  \"foliations\": [\n";
  for (int i = 0; i < 3; ++i) {
    const double w0 = u(rng), w1 = u(rng), w2 = 1.0 + 0.5 * u(rng);
    const double v0 = u(rng), v1 = u(rng), v2 = u(rng), c = 0.3 * u(rng);
    std::snprintf(buf, sizeof buf,
                  "    {\"kind\": \"first_integrals\", \"exprs\": [\"%.6f*x + %.6f*y + %.6f*z + %.6f*(%.6f*x + %.6f*y + "
                  "%.6f*z)^2\"]},\n",
                  w0, w1, w2, c, v0, v1, v2);
    out += buf;
  }
  for (int j = 0; j < 3; ++j) {
    const double b = 1.5 * u(rng), s = 0.3 * u(rng), e = 1.5 * u(rng), t = 0.3 * u(rng);
    std::snprintf(buf, sizeof buf,
                  "    {\"kind\": \"direction\", \"exprs\": [\"1\", \"%.6f + %.6f*(x + z)\", \"%.6f + %.6f*y\"]}%s\n", b, s,
                  e, t, j == 2 ? "" : ",");
    out += buf;
  }
  out += "  ]\n}\n";
  return out;
}

/// JSON description of a builtin web. `dir` replaces the embedded files
/// (used to run the self test against edited copies).
inline std::string builtin_source(const std::string& name, std::uint64_t seed = 0,
                                  const std::optional<std::string>& dir = std::nullopt) {
  if (name == "mixed6_c3") return mixed6_json(seed);
  if (name == "paper_mw_check") throw InputError("paper_mw_check is a computation, not a web description");
  if (dir) {
    std::ifstream in(*dir + "/" + name + ".json");
    if (!in) throw InputError("cannot read " + *dir + "/" + name + ".json");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  const auto& webs = embedded_webs();
  auto it = webs.find(name);
  if (it == webs.end()) throw InputError("unknown builtin '" + name + "'");
  return it->second;
}

}  // namespace webgeom::cli
