#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "webgeom/expr.hpp"
#include "webgeom/jet.hpp"

using namespace webgeom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("graded index enumerates monomials by degree") {
  const auto& idx = GradedIndex::get(3, 4);
  CHECK(idx.size() == 35);  // C(3 + 4, 4)
  CHECK(idx.degree(0) == 0);
  for (std::size_t p = 1; p < idx.size(); ++p) CHECK(idx.degree(p) >= idx.degree(p - 1));
  for (std::size_t p = 0; p < idx.size(); ++p) CHECK(idx.position(idx.alpha(p)) == p);
  const int too_high[] = {3, 2, 0};
  CHECK(idx.position(too_high) == GradedIndex::npos);
}

TEST_CASE("product and quotient of univariate series") {
  auto x = Jet<double>::variable(1, 6, 0, 0.0);
  const auto geo = 1.0 / (1.0 - x);
  for (std::size_t p = 0; p < geo.size(); ++p) CHECK_THAT(geo[p], WithinAbs(1.0, 1e-15));
  const auto back = geo * (1.0 - x);
  CHECK_THAT(back[0], WithinAbs(1.0, 1e-15));
  for (std::size_t p = 1; p < back.size(); ++p) CHECK_THAT(back[p], WithinAbs(0.0, 1e-15));
}

TEST_CASE("transcendental functions match Taylor coefficients") {
  auto x = Jet<double>::variable(1, 8, 0, 0.3);
  const auto e = exp(x);
  double fact = 1.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (k) fact *= static_cast<double>(k);
    CHECK_THAT(e[k], WithinRel(std::exp(0.3) / fact, 1e-13));
  }
  const auto l = log(exp(x));
  CHECK_THAT(l[0], WithinAbs(0.3, 1e-15));
  CHECK_THAT(l[1], WithinAbs(1.0, 1e-14));
  for (std::size_t k = 2; k < l.size(); ++k) CHECK_THAT(l[k], WithinAbs(0.0, 1e-13));
  const auto one = sin(x) * sin(x) + cos(x) * cos(x);
  CHECK_THAT(one[0], WithinAbs(1.0, 1e-15));
  for (std::size_t k = 1; k < one.size(); ++k) CHECK_THAT(one[k], WithinAbs(0.0, 1e-13));
  const auto s = sqrt(x + 1.0);
  const auto sq = s * s;
  CHECK_THAT(sq[0], WithinAbs(1.3, 1e-14));
  CHECK_THAT(sq[1], WithinAbs(1.0, 1e-14));
}

TEST_CASE("multivariate jets agree with finite differences") {
  const auto f = ScalarField::parse("exp(x*y) / (1 + x^2) + sin(y - 2*x)", {"x", "y"});
  const std::vector<double> x0{0.4, -0.3};
  const auto j = eval_jet<double>(f, x0, 3);
  auto val = [&](double dx, double dy) { return evaluate<double>(f, std::vector<double>{x0[0] + dx, x0[1] + dy}); };
  const double h = 1e-4;
  CHECK_THAT(j.coeff({1, 0}), WithinAbs((val(h, 0) - val(-h, 0)) / (2 * h), 1e-7));
  CHECK_THAT(j.coeff({0, 1}), WithinAbs((val(0, h) - val(0, -h)) / (2 * h), 1e-7));
  // coefficient of dx dy is the mixed second derivative
  const double hx = 1e-3;
  const double mixed = (val(hx, hx) - val(hx, -hx) - val(-hx, hx) + val(-hx, -hx)) / (4 * hx * hx);
  CHECK_THAT(j.coeff({1, 1}), WithinAbs(mixed, 1e-5));
  // coefficient of dx^2 is f_xx / 2
  const double fxx = (val(hx, 0) - 2 * val(0, 0) + val(-hx, 0)) / (hx * hx);
  CHECK_THAT(j.coeff({2, 0}), WithinAbs(fxx / 2, 1e-5));
}

TEST_CASE("partial derivative lowers the order") {
  const auto f = ScalarField::parse("x^3*y + y^2", {"x", "y"});
  const auto j = eval_jet<double>(f, std::vector<double>{1.0, 2.0}, 4);
  const auto dx = j.partial(0);
  CHECK(dx.order() == 3);
  CHECK_THAT(dx[0], WithinAbs(3.0 * 1.0 * 2.0, 1e-14));
  const auto dy = j.partial(1);
  CHECK_THAT(dy[0], WithinAbs(1.0 + 4.0, 1e-14));
  CHECK_THROWS_AS(Jet<double>(2, 0).partial(0), OrderExhausted);
}

TEST_CASE("invalid operations raise typed errors") {
  auto x = Jet<double>::variable(2, 3, 0, 0.0);
  CHECK_THROWS_AS(1.0 / x, DivisionByNonUnit);
  CHECK_THROWS_AS(log(x), DomainError);
  CHECK_THROWS_AS(x + Jet<double>(2, 2), ShapeMismatch);
  CHECK_THROWS_AS(Jet<double>::variable(2, 3, 5, 0.0), ShapeMismatch);
  CHECK_THROWS_AS(x.truncated(4), ShapeMismatch);
}

TEST_CASE("truncation commutes with multiplication") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Jet<double> a(3, 4), b(3, 4);
  for (std::size_t p = 0; p < a.size(); ++p) {
    a[p] = u(rng);
    b[p] = u(rng);
  }
  const auto lhs = (a * b).truncated(2);
  const auto rhs = a.truncated(2) * b.truncated(2);
  CHECK((lhs - rhs).max_abs() < 1e-15);
}
