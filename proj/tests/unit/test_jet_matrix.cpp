#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "webgeom/jet_matrix.hpp"

using namespace webgeom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

JetMatrix<double> random_matrix(std::size_t r, std::size_t c, std::size_t nv, int q, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  JetMatrix<double> m(r, c, nv, q);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      for (std::size_t p = 0; p < m(i, j).size(); ++p) m(i, j)[p] = u(rng) + (i == j && p == 0 ? 2.0 : 0.0);
    }
  }
  return m;
}

Eigen::MatrixXd constant_part(const JetMatrix<double>& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j)[0];
  }
  return e;
}

}  // namespace

TEST_CASE("constant terms of the LU solve match Eigen") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {1, 3, 6, 10}) {
    const auto a = random_matrix(n, n, 2, 2, rng);
    std::vector<Jet<double>> b;
    Eigen::VectorXd eb(n);
    for (std::size_t i = 0; i < n; ++i) {
      b.push_back(Jet<double>::constant(2, 2, 0.1 * static_cast<double>(i) - 0.3));
      eb(i) = b.back()[0];
    }
    const auto x = lu_solve(a, b);
    const Eigen::VectorXd ex = constant_part(a).partialPivLu().solve(eb);
    for (std::size_t i = 0; i < n; ++i) CHECK_THAT(x[i][0], WithinAbs(ex(i), 1e-12));
    // the full jets solve the system in the truncated ring
    const auto ax = a.apply(x);
    for (std::size_t i = 0; i < n; ++i) CHECK((ax[i] - b[i]).max_abs() < 1e-12);
  }
}

TEST_CASE("determinants agree across algorithms and with Eigen") {
  std::mt19937_64 rng(12);
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto a = random_matrix(n, n, 2, 2, rng);
    const auto d = determinant(a);
    const auto bk = berkowitz_determinant(a);
    const auto ex = expansion_determinant(a);
    CHECK((d - ex).max_abs() < 1e-11);
    CHECK((bk - ex).max_abs() < 1e-11);
    CHECK_THAT(d[0], WithinRel(constant_part(a).determinant(), 1e-11));
  }
}

TEST_CASE("determinant of a matrix with a singular constant part") {
  // [[x, 1], [1, x]] at x = 1: det = x^2 - 1 = 2 dx + dx^2.
  auto x = Jet<double>::variable(1, 3, 0, 1.0);
  JetMatrix<double> m(2, 2, 1, 3);
  m(0, 0) = x;
  m(0, 1) = Jet<double>::constant(1, 3, 1.0);
  m(1, 0) = Jet<double>::constant(1, 3, 1.0);
  m(1, 1) = x;
  const auto d = determinant(m);
  CHECK_THAT(d[0], WithinAbs(0.0, 1e-15));
  CHECK_THAT(d[1], WithinAbs(2.0, 1e-15));
  CHECK_THAT(d[2], WithinAbs(1.0, 1e-15));
  CHECK_THROWS_AS(lu_solve(m, {m(0, 1), m(0, 1)}), SingularAtPoint);
}

TEST_CASE("overdetermined consistency residual") {
  std::mt19937_64 rng(13);
  const auto a = random_matrix(7, 4, 1, 1, rng);
  std::vector<Jet<double>> x(4, Jet<double>::constant(1, 1, 0.5));
  auto b = a.apply(x);
  auto ok = lsq_consistency(a, b);
  CHECK(ok.residual_norm < 1e-13);
  for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(ok.solution[i][0], WithinAbs(0.5, 1e-13));
  b[6][0] += 1e-3;
  auto bad = lsq_consistency(a, b);
  CHECK(bad.residual_norm > 1e-5);
  CHECK_THROWS_AS(lsq_consistency(random_matrix(2, 3, 1, 1, rng), std::vector<Jet<double>>(2, Jet<double>(1, 1))),
                  ShapeMismatch);
}
