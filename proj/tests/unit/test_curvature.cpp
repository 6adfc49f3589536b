#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "webgeom/curvature.hpp"
#include "webgeom/report.hpp"

using namespace webgeom;
using Catch::Matchers::WithinAbs;

namespace {

const std::vector<std::string> V2{"x", "y"}, V3{"x", "y", "z"};

Foliation fi(const std::string& e, const std::vector<std::string>& v) {
  return foliation_from_first_integrals({ScalarField::parse(e, v)}, v.size());
}

Foliation dir(const std::string& b, const std::string& c, ConstantTable k = {}) {
  return foliation_from_direction(
      {ScalarField::parse("1", V3, k), ScalarField::parse(b, V3, k), ScalarField::parse(c, V3, k)}, 3);
}

Web w8(double eps) {
  const ConstantTable k{{"eps", eps}};
  return Web(3, {dir("0", "0"), dir("1", "0"), dir("0", "1"), dir("1", "1"), dir("-1", "1"), dir("1", "-1"),
                 dir("-1", "-1"), dir("eps*y/x", "z/x", k)},
             "w8");
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

VerdictConfig serial() {
  VerdictConfig c;
  c.jobs = 1;
  return c;
}

}  // namespace

TEST_CASE("curvature symmetries of random connections") {
  std::mt19937_64 rng(31);
  for (std::size_t n : {2, 3, 4}) {
    const auto c = tensors(random_symbols(n, 3, rng));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          for (std::size_t l = 0; l < n; ++l) CHECK((c.R(i, j, k, l) + c.R(i, j, l, k)).max_abs() < 1e-13);
        }
      }
    }
    double trace = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        Jet<double> t(n, 2);
        for (std::size_t i = 0; i < n; ++i) t += c.W(i, j, i, k);
        trace = std::max(trace, t.max_abs());
      }
    }
    CHECK(trace < 1e-12);
    CHECK(bianchi_residual(c) < 1e-12);
  }
  CHECK_THROWS(tensors(random_symbols(3, 1, rng)));
}

TEST_CASE("Weyl tensor vanishes identically in the plane") {
  std::mt19937_64 rng(32);
  const auto c = tensors(random_symbols(2, 3, rng));
  for (const auto& j : c.weyl) CHECK(j.max_abs() < 1e-13);
  double l = 0.0;
  for (const auto& j : c.liouville) l = std::max(l, j.max_abs());
  CHECK(l > 1e-2);
}

TEST_CASE("sample points lie in the punctured ball and are reproducible") {
  const Point base{1.0, 2.0, 3.0};
  const auto a = sample_points(base, 50, 0.1, 7);
  const auto b = sample_points(base, 50, 0.1, 7);
  CHECK(a == b);
  CHECK(a != sample_points(base, 50, 0.1, 8));
  for (const auto& p : a) {
    double r = 0.0;
    for (std::size_t i = 0; i < 3; ++i) r += (p[i] - base[i]) * (p[i] - base[i]);
    CHECK(std::sqrt(r) <= 0.1);
    CHECK(r > 0.0);
  }
}

TEST_CASE("curve 8-web is flat only for eps = 1") {
  auto r1 = verdict(w8(1.0), {1, 1, 1}, serial());
  CHECK(r1.verdict == Verdict::Linearizable);
  CHECK(r1.curvature_test == "weyl");
  CHECK(r1.samples.size() == 7);
  auto r2 = verdict(w8(0.5), {1, 1, 1}, serial());
  CHECK(r2.verdict == Verdict::NotLinearizable);
  for (const auto& s : r2.samples) {
    CHECK(s.equations == 16);
    CHECK(s.unknowns == 15);
  }
}

TEST_CASE("parallel sampling gives the same report") {
  auto cfg = serial();
  const auto a = verdict(w8(2.0), {1, 1, 1}, cfg);
  cfg.jobs = 4;
  const auto b = verdict(w8(2.0), {1, 1, 1}, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].residual == b.samples[i].residual);
    CHECK(a.samples[i].weyl_norm == b.samples[i].weyl_norm);
  }
}

TEST_CASE("degenerate samples make the verdict inconclusive") {
  // Along y = 0 the last foliation is tangent to the second.
  const Web w(2, {fi("x", V2), fi("y", V2), fi("x + y", V2), fi("y*(1 + x)", V2)});
  const auto r = verdict_at(w, {{0.3, 0.0}}, {0.3, 0.0}, serial());
  CHECK(r.verdict == Verdict::Inconclusive);
  CHECK(r.skipped == 1);
  CHECK_FALSE(r.samples.front().skip_reason.empty());
}

TEST_CASE("configuration is validated") {
  const Web w = w8(1.0);
  auto cfg = serial();
  cfg.order = 2;
  CHECK_THROWS_AS(verdict(w, {1, 1, 1}, cfg), InputError);
  cfg = serial();
  cfg.samples = 0;
  CHECK_THROWS_AS(verdict(w, {1, 1, 1}, cfg), InputError);
  cfg = serial();
  cfg.radius = 0.0;
  CHECK_THROWS_AS(verdict(w, {1, 1, 1}, cfg), InputError);
  CHECK_THROWS_AS(verdict(w, {1, 1}, serial()), InputError);
}

TEST_CASE("Weyl and Sigma transform as tensors") {
  const Web w(3, {fi("x + 0.3*y^2", V3), fi("y + 0.2*z*x", V3), fi("z + 0.25*x^2", V3), fi("x + y + z + 0.1*x*y*z", V3),
                  fi("x - y + 2*z", V3), fi("x + 2*y - z + 0.1*z^2", V3)});
  const std::vector<ScalarField> phi{ScalarField::parse("exp(x)", V3), ScalarField::parse("y + x^2", V3),
                                     ScalarField::parse("z*exp(-y)", V3)};
  const std::vector<ScalarField> inv{ScalarField::parse("log(x)", V3), ScalarField::parse("y - log(x)^2", V3),
                                     ScalarField::parse("z*exp(y - log(x)^2)", V3)};
  const auto r = tensoriality_check(w, phi, inv, {0.2, 0.1, 0.3});
  CHECK_FALSE(r.mismatch);
  CHECK(r.roundtrip_error < 1e-14);
  CHECK(r.curvature_deviation < 1e-8 * r.thomas_scale);
  CHECK(r.sigma_deviation < 1e-8 * r.thomas_scale);
}

TEST_CASE("planar ODE coefficients of a pencil web") {
  // Lines through the origin plus two parallel families are flat: A = B = C = D = 0.
  const Web w(2, {fi("x", V2), fi("y", V2), fi("y/x", V2), fi("x + y", V2)});
  const auto frame = choose_frame(w, {{0.4, 0.3}}, 0);
  const auto c = solve_canonical<double>(w, frame, frame.to_working({0.4, 0.3}), 1);
  for (const auto& j : ode_coefficients_n2(c.pi)) CHECK(j.max_abs() < 1e-10);
}

TEST_CASE("reports serialize every sample") {
  const auto rep = verdict(w8(0.5), {1, 1, 1}, serial());
  const auto j = to_json(rep);
  CHECK(j["verdict"] == "not_linearizable");
  CHECK(j["dimension"] == 3);
  CHECK(j["codims"].size() == 8);
  CHECK(j["samples"].size() == 7);
  CHECK(j["samples"][0].contains("residual_scaled"));
  const auto text = to_text(rep);
  CHECK(text.find("NOT linearizable") != std::string::npos);
}
