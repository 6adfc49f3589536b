// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//   acceptance [--filter KEY] [--builtin-dir DIR]

#include <cstdio>

#include <CLI11.hpp>

#include "acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"webgeom acceptance suite"};
  webgeom::acceptance::Options opt;
  std::string dir;
  app.add_option("--filter", opt.filter, "run criteria whose key contains this");
  app.add_option("--builtin-dir", dir, "read builtin web files from this directory");
  CLI11_PARSE(app, argc, argv);
  if (!dir.empty()) opt.builtin_dir = dir;

  const auto results = webgeom::acceptance::run(opt);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::printf("%zu/%zu criteria passed\n", results.size() - failed, results.size());
  return results.empty() || failed ? 1 : 0;
}
