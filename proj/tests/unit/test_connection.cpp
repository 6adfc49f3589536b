#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <tuple>
#include <random>

#include "webgeom/connection.hpp"
#include "webgeom/curvature.hpp"

using namespace webgeom;
using Catch::Matchers::WithinAbs;

namespace {

const std::vector<std::string> V2{"x", "y"}, V3{"x", "y", "z"};

Foliation fi(const std::string& e, const std::vector<std::string>& v) {
  return foliation_from_first_integrals({ScalarField::parse(e, v)}, v.size());
}

Web bol() {
  return Web(2, {fi("x", V2), fi("y", V2), fi("x/y", V2), fi("(1 - x)/(1 - y)", V2),
                 fi("x*(1 - y)/(y*(1 - x))", V2)},
             "bol");
}

ThomasSymbols<double> random_symbols(std::size_t n, int q, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  const ThomasLayout layout(n);
  std::vector<Jet<double>> s(layout.size(), Jet<double>(n, q));
  for (auto& j : s) {
    for (std::size_t p = 0; p < j.size(); ++p) j[p] = u(rng);
  }
  return layout.restore(s);
}

}  // namespace

TEST_CASE("unknown and equation counts") {
  CHECK(connection_unknowns(2) == 4);
  CHECK(connection_unknowns(3) == 15);
  CHECK(connection_unknowns(4) == 36);
  for (std::size_t n = 2; n <= 5; ++n) {
    CHECK(ThomasLayout(n).size() == connection_unknowns(n));
    CHECK((n + 2) * equation_count(n, 1) >= connection_unknowns(n));
  }
  CHECK(equation_count(3, 2) == 2);
}

TEST_CASE("restored symbols are trace free and round-trip through ABCD") {
  std::mt19937_64 rng(21);
  for (std::size_t n = 2; n <= 4; ++n) {
    const auto pi = random_symbols(n, 2, rng);
    CHECK(pi.trace_residual() < 1e-14);
    const auto abcd = thomas_to_abcd(pi);
    CHECK(abcd.size() == connection_unknowns(n));
    const auto back = abcd_to_thomas(ABCDCoefficients<double>::unflatten(n - 1, abcd.flatten()));
    for (std::size_t i = 0; i < pi.components().size(); ++i) {
      CHECK((pi.components()[i] - back.components()[i]).max_abs() < 1e-13);
    }
  }
}

TEST_CASE("linear webs have vanishing symbols in both parametrizations") {
  const Web w(3, {fi("x", V3), fi("y", V3), fi("z", V3), fi("x + y + z", V3), fi("x - 2*y + 3*z", V3)});
  const auto frame = choose_frame(w, {{0.1, 0.2, 0.3}}, 0);
  for (bool abcd : {true, false}) {
    const auto c = solve_canonical<double>(w, frame, frame.to_working({0.1, 0.2, 0.3}), 2, kDefaultPivotTol, abcd);
    CHECK(c.parametrization == (abcd ? Parametrization::ABCD : Parametrization::Thomas));
    CHECK(c.equations == 15);
    CHECK(c.unknowns == 15);
    for (const auto& j : c.pi.components()) CHECK(j.max_abs() < 1e-12);
  }
}

TEST_CASE("ABCD and geodesic assemblies give the same connection") {
  const Web w(3, {fi("x + 0.2*y^2", V3), fi("y - 0.3*x*z", V3), fi("z + 0.1*x^2", V3), fi("x + y + z + 0.2*y*z", V3),
                  fi("x - y + 2*z", V3)});
  const auto frame = choose_frame(w, {{0.1, 0.2, 0.3}}, 0);
  const Point y = frame.to_working({0.1, 0.2, 0.3});
  const auto a = solve_canonical<double>(w, frame, y, 2, kDefaultPivotTol, true);
  const auto b = solve_canonical<double>(w, frame, y, 2, kDefaultPivotTol, false);
  CHECK(a.pi.max_norm() > 1e-2);
  for (std::size_t i = 0; i < a.pi.components().size(); ++i) {
    CHECK((a.pi.components()[i] - b.pi.components()[i]).max_abs() < 1e-10);
  }
}

TEST_CASE("too few foliations is underdetermined") {
  const Web w(2, {fi("x + y", V2), fi("x - y", V2), fi("y", V2)});
  CHECK_THROWS_AS(solve_canonical<double>(w, LinearFrame::identity(2), {0.1, 0.2}, 1), UnderdeterminedWeb);
}

TEST_CASE("every leaf of a pushed linear web is totally geodesic") {
  const Web lin(2, {fi("x + 0.5*y", V2), fi("y - x", V2), fi("x + y", V2), fi("x - 2*y", V2)});
  const Web w = pushforward(lin, {ScalarField::parse("log(x)", V2), ScalarField::parse("y*(1 - log(x))", V2)});
  const auto frame = choose_frame(w, {{1.3, 0.4}}, 0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(leaf_geodesic_residual(w, i, frame, frame.to_working({1.3, 0.4}), {1.0}) < 1e-6);
  }
}

TEST_CASE("Bol Sigma tensor matches the symbolic oracle") {
  // tests/oracles/bol_sigma.py: (Pi^1_11, Pi^1_12, Pi^1_22, Pi^2_11, Pi^2_12, Pi^2_22) of Sigma(5).
  const std::vector<std::pair<Point, std::array<double, 2>>> cases{
      {{0.3, 0.5}, {-2.2222222222222223, 1.3333333333333333}},
      {{0.35, 0.45}, {-1.9047619047619049, 1.4814814814814814}},
      {{0.25, 0.55}, {-2.6666666666666665, 1.212121212121212}},
      {{0.32, 0.41}, {-2.0833333333333335, 1.6260162601626018}},
  };
  const Web w = bol();
  for (const auto& [x, v] : cases) {
    const auto frame = choose_frame(w, {x}, 0);
    const auto pa = analyze_point(w, frame, x, 4);
    REQUIRE(pa.sigma.size() == 1);
    CHECK(pa.sigma.front().first == 5);
    const auto& t = pa.sigma.front().second.values;  // (k i j) row-major
    const std::array<double, 6> want{v[0], v[1], 0.0, 0.0, -v[0], -v[1]};
    const std::array<double, 6> got{t[0], t[1], t[3], t[4], t[5], t[7]};
    for (std::size_t i = 0; i < 6; ++i) CHECK_THAT(got[i], WithinAbs(want[i], 1e-9));
    CHECK(pa.thomas.max_abs() < 1e-10);
  }
}

TEST_CASE("the normalized 5-web matrix") {
  // Rows of dx1 - dx3, dx2 - dx3 and dx3, columns (A, B, C, D) as in ABCDCoefficients.
  const int fixed[9][15] = {
      {1, 0, 2, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0}, {0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0},
      {0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0},
      {0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0}, {0, 1, 0, 0, 0, 2, 0, 0, 0, 0, 0, 1, 0, 0, 1},
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0},
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1}};
  auto c = [](double v) { return Jet<double>::constant(3, 0, v); };
  const double p = 0.7, q = -1.3, r = 0.4, s = 2.1;
  const auto mw = build_normalized_Mw_n3<double>({c(p), c(q)}, {c(r), c(s)});
  REQUIRE(mw.rows() == 15);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 15; ++j) CHECK(mw(i, j)[0] == fixed[i][j]);
  }
  for (const auto& [row, a, b] : {std::tuple{9, p, q}, std::tuple{12, r, s}}) {
    const double want[3][15] = {
        {a * a * a, a * a * b, 2 * a * a, 2 * a * b, 0, 0, a, 0, 0, b, 0, 0, 1, 0, 0},
        {a * a * b, a * b * b, a * b, b * b, a * a, a * b, 0, a, 0, 0, b, 0, 0, 1, 0},
        {a * b * b, b * b * b, 0, 0, 2 * a * b, 2 * b * b, 0, 0, a, 0, 0, b, 0, 0, 1}};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 15; ++j) CHECK_THAT(mw(row + i, j)[0], WithinAbs(want[i][j], 1e-14));
    }
  }
  // Omega^4 = Omega^5 gives a degenerate web and a singular matrix.
  const auto degenerate = build_normalized_Mw_n3<double>({c(0.3), c(0.7)}, {c(0.3), c(0.7)});
  CHECK(std::abs(determinant(degenerate)[0]) < 1e-12);
}
