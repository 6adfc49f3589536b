// webgeom: linearizability analysis of webs from the command line.
//
//   webgeom analyze FILE | --builtin NAME [options]
//   webgeom examples list | show NAME
//   webgeom selftest [--filter KEY] [--builtin-dir DIR]
//
// Exit codes: 0 linearizable, 1 not linearizable, 2 inconclusive or
// degenerate, 3 input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "builtins.hpp"
#include "webgeom/webgeom.hpp"

namespace {

using namespace webgeom;

constexpr int kLinearizable = 0;
constexpr int kNotLinearizable = 1;
constexpr int kInconclusive = 2;
constexpr int kInputError = 3;

struct AnalyzeArgs {
  std::string file;
  std::string builtin;
  VerdictConfig cfg;
  std::string point;
  std::vector<std::string> consts;
  std::string format = "text";
};

std::vector<double> parse_point(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("--point: cannot read '" + item + "' as a number");
    }
  }
  return out;
}

ConstantTable parse_consts(const std::vector<std::string>& items) {
  ConstantTable t;
  for (const auto& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("--const expects name=value, got '" + it + "'");
    try {
      t[it.substr(0, eq)] = std::stod(it.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("--const: cannot read the value in '" + it + "'");
    }
  }
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Prints the determinant identity ratio for a few seeded draws.
int mw_check(std::uint64_t seed, bool json) {
  std::mt19937_64 rng(seed);
  std::vector<double> ratios;
  for (int i = 0; i < 5; ++i) ratios.push_back(acceptance::mw_ratio(rng));
  double worst = 0.0;
  for (double r : ratios) worst = std::max(worst, std::abs(r - 1.0));
  if (json) {
    std::cout << nlohmann::json{{"ratios", ratios}, {"max_deviation", worst}}.dump(2) << "\n";
  } else {
    for (double r : ratios) std::printf("det(M_W) / (4 prod wedges) = %.15f\n", r);
    std::printf("max |ratio - 1| = %.3e\n", worst);
  }
  return worst < 1e-8 ? kLinearizable : kNotLinearizable;
}

int run_analyze(const AnalyzeArgs& a) {
  if (a.file.empty() == a.builtin.empty()) throw InputError("analyze needs exactly one of FILE or --builtin NAME");
  if (a.format != "text" && a.format != "json") throw InputError("--format must be text or json");
  if (a.builtin == "paper_mw_check") return mw_check(a.cfg.seed, a.format == "json");
  const auto consts = parse_consts(a.consts);
  const std::string text = a.builtin.empty() ? read_file(a.file) : cli::builtin_source(a.builtin, a.cfg.seed);
  const auto desc = parse_web_json(text, consts);
  Point base;
  if (!a.point.empty()) {
    base = parse_point(a.point);
  } else if (desc.base_point) {
    base = *desc.base_point;
  } else {
    base.assign(desc.web.dimension(), 0.1);
  }
  const auto rep = verdict(desc.web, base, a.cfg);
  if (a.format == "json") {
    std::cout << to_json(rep).dump(2) << "\n";
  } else {
    std::cout << to_text(rep);
  }
  switch (rep.verdict) {
    case Verdict::Linearizable: return kLinearizable;
    case Verdict::NotLinearizable: return kNotLinearizable;
    case Verdict::Inconclusive: break;
  }
  return kInconclusive;
}

int run_examples(const std::string& action, const std::string& name, std::uint64_t seed) {
  if (action == "list") {
    for (const auto& b : cli::builtin_list()) std::printf("%-24s %s\n", b.name.c_str(), b.description.c_str());
    return 0;
  }
  if (action == "show") {
    if (!cli::is_builtin(name)) throw InputError("unknown builtin '" + name + "'");
    if (name == "paper_mw_check") return mw_check(seed, false);
    std::cout << cli::builtin_source(name, seed);
    return 0;
  }
  throw InputError("examples expects 'list' or 'show NAME'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linearizability of webs via the canonical projective connection"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "decide linearizability of a web");
  analyze->add_option("file", an.file, "JSON web description");
  analyze->add_option("--builtin", an.builtin, "use a builtin web instead of a file");
  analyze->add_option("--order", an.cfg.order, "slope jet order (>= 3)")->capture_default_str();
  analyze->add_option("--tol", an.cfg.tol, "relative tolerance")->capture_default_str();
  analyze->add_option("--samples", an.cfg.samples, "sample points")->capture_default_str();
  analyze->add_option("--radius", an.cfg.radius, "sample ball radius")->capture_default_str();
  analyze->add_option("--seed", an.cfg.seed, "RNG seed for samples, frames and random builtins")->capture_default_str();
  analyze->add_option("--point", an.point, "base point \"v1,v2,...\"");
  analyze->add_option("--const", an.consts, "constant override name=value (repeatable)");
  analyze->add_option("--format", an.format, "text or json")->capture_default_str();
  analyze->add_option("--jobs", an.cfg.jobs, "worker threads (0: hardware)")->capture_default_str();

  std::string ex_action, ex_name;
  std::uint64_t ex_seed = 0;
  auto* examples = app.add_subcommand("examples", "list or print builtin webs");
  examples->add_option("action", ex_action, "list | show")->required();
  examples->add_option("name", ex_name, "builtin name for show");
  examples->add_option("--seed", ex_seed, "seed for random builtins");

  acceptance::Options st;
  std::string st_dir;
  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  selftest->add_option("--filter", st.filter, "run criteria whose key contains this");
  selftest->add_option("--builtin-dir", st_dir, "read builtin web files from this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (*analyze) return run_analyze(an);
    if (*examples) return run_examples(ex_action, ex_name, ex_seed);
    if (*selftest) {
      if (!st_dir.empty()) st.builtin_dir = st_dir;
      const auto results = acceptance::run(st);
      if (results.empty()) {
        std::fprintf(stderr, "no criterion matches '%s'\n", st.filter.c_str());
        return kInputError;
      }
      for (const auto& r : results) {
        if (!r.pass) return 1;
      }
      return 0;
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInputError;
  } catch (const UnderdeterminedWeb& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInputError;
  } catch (const DimensionMismatch& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInputError;
  } catch (const Error& e) {
    std::fprintf(stderr, "degenerate: %s\n", e.what());
    return kInconclusive;
  }
  return kInputError;
}
