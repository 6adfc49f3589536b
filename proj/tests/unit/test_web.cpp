#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "webgeom/web.hpp"
#include "webgeom/web_json.hpp"

using namespace webgeom;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

const std::vector<std::string> V2{"x", "y"}, V3{"x", "y", "z"};

Foliation fi(const std::string& e, const std::vector<std::string>& v) {
  return foliation_from_first_integrals({ScalarField::parse(e, v)}, v.size());
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("slopes from a first integral") {
  // u = y - x^3: leaves y = x^3 + c, slope 3x^2, derivative 6x.
  const auto f = fi("y - x^3", V2);
  const auto om = f.slopes<double>(LinearFrame::identity(2), {0.5, 1.0}, 2);
  CHECK(om.rows() == 1);
  CHECK(om.cols() == 1);
  CHECK_THAT(om(0, 0)[0], WithinAbs(0.75, 1e-14));
  CHECK_THAT(om(0, 0).coeff({1, 0}), WithinAbs(3.0, 1e-14));
  CHECK_THAT(om(0, 0).coeff({2, 0}), WithinAbs(3.0, 1e-13));
  CHECK_THAT(om(0, 0).coeff({0, 1}), WithinAbs(0.0, 1e-14));
}

TEST_CASE("slopes of a codim-2 foliation in three dimensions") {
  const auto d = foliation_from_direction(
      {ScalarField::parse("2", V3), ScalarField::parse("x", V3), ScalarField::parse("y*z", V3)}, 3);
  const auto om = d.slopes<double>(LinearFrame::identity(3), {0.4, 0.5, 2.0}, 1);
  CHECK(om.rows() == 2);
  CHECK(om.cols() == 1);
  CHECK_THAT(om(0, 0)[0], WithinAbs(0.2, 1e-14));
  CHECK_THAT(om(1, 0)[0], WithinAbs(0.5, 1e-14));
  const auto two = foliation_from_first_integrals({ScalarField::parse("y - x^2", V3), ScalarField::parse("z - x*y", V3)}, 3);
  const auto o2 = two.slopes<double>(LinearFrame::identity(3), {0.5, 0.25, 0.0}, 1);
  CHECK_THAT(o2(0, 0)[0], WithinAbs(1.0, 1e-14));
  CHECK_THAT(o2(1, 0)[0], WithinAbs(0.25 + 0.5 * 1.0, 1e-14));
}

TEST_CASE("explicit slope fields must be integrable") {
  const auto ok = foliation_from_slopes({ScalarField::parse("y", V2)}, 2, 1);
  CHECK(ok.integrability_residual(LinearFrame::identity(2), {0.1, 0.2}) < 1e-12);
  // dz = y dx - x dy is the contact form: not integrable.
  const auto contact = foliation_from_slopes({ScalarField::parse("y", V3), ScalarField::parse("-x", V3)}, 3, 1);
  CHECK(contact.integrability_residual(LinearFrame::identity(3), {0.1, 0.2, 0.3}) > 0.5);
}

TEST_CASE("transversality failure and frame recovery") {
  const auto vertical = fi("x", V2);
  CHECK_THROWS_AS(vertical.slopes<double>(LinearFrame::identity(2), {0.2, 0.3}, 1), TransversalityFailure);
  CHECK(vertical.transversality(LinearFrame::identity(2), {0.2, 0.3}) < 1e-12);
  const Web w(2, {vertical, fi("y", V2), fi("x + y", V2)});
  const auto frame = choose_frame(w, {{0.2, 0.3}}, 0);
  CHECK_FALSE(frame.is_identity());
  CHECK(min_transversality(w, frame, {frame.to_working({0.2, 0.3})}) > kFrameMargin);
  const Point x{0.7, -1.1};
  const auto back = frame.to_original(frame.to_working(x));
  CHECK_THAT(back[0], WithinAbs(x[0], 1e-14));
  CHECK_THAT(back[1], WithinAbs(x[1], 1e-14));
}

TEST_CASE("frames reject singular matrices") {
  CHECK_THROWS_AS(LinearFrame({1, 2, 2, 4}, {0, 0}), InputError);
}

TEST_CASE("general position diagnostics name the witnesses") {
  const auto id = LinearFrame::identity(2);
  const Web twice(2, {fi("y", V2), fi("y - x", V2), fi("2*y + 1", V2)});
  auto r = general_position_check(twice, id, {0.1, 0.2});
  CHECK_FALSE(r.pass);
  CHECK(r.kind == "distinct");
  CHECK(r.witness == std::vector<std::size_t>{0, 2});

  const Web flat3(3, {fi("z", V3), fi("z - x", V3), fi("z - y", V3), fi("z + x", V3)});
  r = general_position_check(flat3, LinearFrame::identity(3), {0.1, 0.2, 0.3});
  CHECK_FALSE(r.pass);
  CHECK(r.kind == "normal_wedge");
  CHECK(r.witness == std::vector<std::size_t>{0, 1, 3});

  // omega = dz - dx annihilates X = (1, 0, 1).
  auto dir = [](const char* a, const char* b, const char* c) {
    return foliation_from_direction({ScalarField::parse(a, V3), ScalarField::parse(b, V3), ScalarField::parse(c, V3)}, 3);
  };
  const Web mixed(3, {fi("z - x", V3), fi("z - y", V3), fi("z + 2*x", V3), dir("1", "0", "1"), dir("1", "1", "3"),
                      dir("1", "-1", "-2")});
  r = general_position_check(mixed, LinearFrame::identity(3), {0, 0, 0});
  CHECK_FALSE(r.pass);
  CHECK(r.kind == "pairing");
  CHECK_THAT(r.description, ContainsSubstring("omega_1(X_1)"));
}

TEST_CASE("pushforward composes first integrals with the inverse map") {
  const Web w(2, {fi("x", V2), fi("y", V2)});
  const auto p = pushforward(w, {ScalarField::parse("log(x)", V2), ScalarField::parse("y - x", V2)});
  const auto& u = p[1].expressions().front();
  CHECK_THAT(evaluate<double>(u, std::vector<double>{2.0, 5.0}), WithinAbs(3.0, 1e-15));
}

TEST_CASE("JSON web descriptions") {
  const auto d = parse_web_json(read(WEBGEOM_DATA_DIR "/webs/w8.json"), {{"eps", 0.5}});
  CHECK(d.web.dimension() == 3);
  CHECK(d.web.size() == 8);
  CHECK(d.web.all_codim(2));
  CHECK(d.constants.at("eps") == 0.5);
  REQUIRE(d.base_point);
  CHECK(*d.base_point == Point{1, 1, 1});

  const auto b = parse_web_json(read(WEBGEOM_DATA_DIR "/webs/bol.json"));
  CHECK(b.web.size() == 5);
  CHECK(b.web.all_codim(1));

  const auto s = parse_web_json(R"({"dimension": 4, "foliations": [{"kind": "slopes", "codim": 2,
      "exprs": ["x1", "0", "0", "x2"]}]})");
  CHECK(s.variables == std::vector<std::string>{"x1", "x2", "x3", "x4"});
  CHECK(s.web[0].codim() == 2);
}

TEST_CASE("malformed descriptions raise InputError with context") {
  auto msg = [](const std::string& text) {
    try {
      parse_web_json(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK_THAT(msg("{"), ContainsSubstring("malformed JSON"));
  CHECK_THAT(msg(R"({"foliations": []})"), ContainsSubstring("dimension"));
  CHECK_THAT(msg(R"({"dimension": 2, "foliations": []})"), ContainsSubstring("empty"));
  CHECK_THAT(msg(R"({"dimension": 2, "foliations": [{"kind": "magic", "exprs": ["x"]}]})"),
             ContainsSubstring("unknown kind"));
  CHECK_THAT(msg(R"({"dimension": 2, "foliations": [{"kind": "first_integrals", "exprs": ["x + q"]}]})"),
             ContainsSubstring("    x + q\n        ^"));
  CHECK_THAT(msg(R"({"dimension": 2, "foliations": [{"kind": "slopes", "exprs": ["x"]}]})"),
             ContainsSubstring("explicit 'codim'"));
  CHECK_THAT(msg(R"({"dimension": 2, "variables": ["a"], "foliations": [{"kind": "first_integrals", "exprs": ["a"]}]})"),
             ContainsSubstring("variables"));
  CHECK_THAT(msg(R"({"dimension": 2, "base_point": [1], "foliations": [{"kind": "first_integrals", "exprs": ["x"]}]})"),
             ContainsSubstring("base_point"));
}
