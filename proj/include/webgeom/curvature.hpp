#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "webgeom/connection.hpp"
#include "webgeom/error.hpp"
#include "webgeom/jet.hpp"
#include "webgeom/web.hpp"

namespace webgeom {

/// Curvature of a projective connection given by Thomas coefficients:
///   Pi^i_{jkl} = d_k Pi^i_{jl} - d_l Pi^i_{jk} + Pi^m_{jl} Pi^i_{mk} - Pi^m_{jk} Pi^i_{ml}
///   Pi_{jk}    = Pi^m_{jmk}
///   W^i_{jkl}  = Pi^i_{jkl} + (delta^i_l Pi_{jk} - delta^i_k Pi_{jl}) / (n - 1)
///   Pi_{iuv}   = (d_v Pi_{iu} - d_u Pi_{iv} + Pi^m_{iu} Pi_{mv} - Pi^m_{iv} Pi_{mu}) / 2
/// The first three have order q - 1 for Thomas jets of order q, the last q - 2.
template <JetScalar Scalar = double>
struct CurvatureTensors {
  std::size_t n;
  std::vector<Jet<Scalar>> riemann;    // ((i n + j) n + k) n + l
  std::vector<Jet<Scalar>> ricci;      // j n + k
  std::vector<Jet<Scalar>> weyl;       // as riemann
  std::vector<Jet<Scalar>> liouville;  // (i n + u) n + v

  std::size_t at4(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return ((i * n + j) * n + k) * n + l;
  }
  std::size_t at3(std::size_t i, std::size_t u, std::size_t v) const { return (i * n + u) * n + v; }

  const Jet<Scalar>& R(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const { return riemann[at4(i, j, k, l)]; }
  const Jet<Scalar>& W(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const { return weyl[at4(i, j, k, l)]; }
  const Jet<Scalar>& Ric(std::size_t j, std::size_t k) const { return ricci[j * n + k]; }
  const Jet<Scalar>& L(std::size_t i, std::size_t u, std::size_t v) const { return liouville[at3(i, u, v)]; }
};

template <JetScalar Scalar>
CurvatureTensors<Scalar> tensors(const ThomasSymbols<Scalar>& pi) {
  const std::size_t n = pi.dimension(), nv = pi.nvars();
  const int q = pi.order();
  if (q < 2) throw OrderExhausted("curvature needs Thomas jets of order >= 2");
  const int q1 = q - 1, q2 = q - 2;

  std::vector<Jet<Scalar>> low;  // Pi truncated to q - 1, index k P + pair
  std::vector<Jet<Scalar>> d;    // d_x Pi^k_{ij}, index (k P + pair) n + x
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        low.push_back(pi(k, i, j).truncated(q1));
        for (std::size_t x = 0; x < n; ++x) d.push_back(pi(k, i, j).partial(x));
      }
    }
  }
  const std::size_t P = pair_count(n);
  auto P1 = [&](std::size_t k, std::size_t i, std::size_t j) -> const Jet<Scalar>& {
    return low[k * P + pair_index(i, j, n)];
  };
  auto dP = [&](std::size_t k, std::size_t i, std::size_t j, std::size_t x) -> const Jet<Scalar>& {
    return d[(k * P + pair_index(i, j, n)) * n + x];
  };

  CurvatureTensors<Scalar> t{n, {}, {}, {}, {}};
  t.riemann.assign(n * n * n * n, Jet<Scalar>(nv, q1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k + 1; l < n; ++l) {
          Jet<Scalar> v = dP(i, j, l, k) - dP(i, j, k, l);
          for (std::size_t m = 0; m < n; ++m) v += P1(m, j, l) * P1(i, m, k) - P1(m, j, k) * P1(i, m, l);
          t.riemann[t.at4(i, j, l, k)] = -v;
          t.riemann[t.at4(i, j, k, l)] = std::move(v);
        }
      }
    }
  }
  t.ricci.assign(n * n, Jet<Scalar>(nv, q1));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t m = 0; m < n; ++m) t.ricci[j * n + k] += t.R(m, j, m, k);
    }
  }
  t.weyl = t.riemann;
  if (n > 1) {
    const Scalar inv{1.0 / static_cast<double>(n - 1)};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          t.weyl[t.at4(i, j, k, i)] += t.Ric(j, k) * inv;
          t.weyl[t.at4(i, j, i, k)] -= t.Ric(j, k) * inv;
        }
      }
    }
  }
  t.liouville.assign(n * n * n, Jet<Scalar>(nv, q2));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        Jet<Scalar> s = t.Ric(i, u).partial(v) - t.Ric(i, v).partial(u);
        for (std::size_t m = 0; m < n; ++m) {
          s += P1(m, i, u).truncated(q2) * t.Ric(m, v).truncated(q2) -
               P1(m, i, v).truncated(q2) * t.Ric(m, u).truncated(q2);
        }
        s = s * Scalar{0.5};
        t.liouville[t.at3(i, v, u)] = -s;
        t.liouville[t.at3(i, u, v)] = std::move(s);
      }
    }
  }
  return t;
}

/// Max coefficient of W^i_{jkl} + W^i_{klj} + W^i_{ljk} over all indices.
template <JetScalar Scalar>
double bianchi_residual(const CurvatureTensors<Scalar>& t) {
  const std::size_t n = t.n;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
          worst = std::max(worst, (t.W(i, j, k, l) + t.W(i, k, l, j) + t.W(i, l, j, k)).max_abs());
        }
      }
    }
  }
  return worst;
}

/// Coefficients of y'' = A y'^3 + B y'^2 + C y' + D for the planar connection.
template <JetScalar Scalar>
std::array<Jet<Scalar>, 4> ode_coefficients_n2(const ThomasSymbols<Scalar>& pi) {
  if (pi.dimension() != 2) throw DimensionMismatch("ODE coefficients are defined for n = 2");
  return {pi(0, 1, 1), pi(0, 0, 1) * Scalar{2} - pi(1, 1, 1), pi(0, 0, 0) - pi(1, 0, 1) * Scalar{2}, -pi(1, 0, 0)};
}

/// Pointwise tensor with `up` contravariant indices followed by `down`
/// covariant ones; components are row-major over all indices.
struct PointTensor {
  std::size_t n = 0;
  int up = 0;
  int down = 0;
  std::vector<double> values;

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  /// Components in coordinates x-bar, given J^a_i = dxbar^a/dx^i and its
  /// inverse K^i_a = dx^i/dxbar^a at the point.
  PointTensor transformed(const std::vector<double>& jac, const std::vector<double>& inv) const {
    const int rank = up + down;
    PointTensor out{n, up, down, values};
    std::vector<double> tmp;
    std::size_t stride = 1;
    for (int slot = rank - 1; slot >= 0; --slot) {
      tmp.assign(out.values.size(), 0.0);
      const std::size_t block = stride * n;
      for (std::size_t base = 0; base < out.values.size(); base += block) {
        for (std::size_t inner = 0; inner < stride; ++inner) {
          for (std::size_t a = 0; a < n; ++a) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const double f = slot < up ? jac[a * n + i] : inv[i * n + a];
              acc += f * out.values[base + i * stride + inner];
            }
            tmp[base + a * stride + inner] = acc;
          }
        }
      }
      out.values.swap(tmp);
      stride *= n;
    }
    return out;
  }

  friend double max_difference(const PointTensor& a, const PointTensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
  }
};

inline PointTensor point_tensor(const std::vector<Jet<double>>& jets, std::size_t n, int up, int down) {
  PointTensor t{n, up, down, {}};
  for (const auto& j : jets) t.values.push_back(j[0]);
  return t;
}

/// Full (1,2) array of Thomas constant terms, symmetric lower indices.
inline PointTensor point_tensor(const ThomasSymbols<double>& pi) {
  const std::size_t n = pi.dimension();
  PointTensor t{n, 1, 2, std::vector<double>(n * n * n)};
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) t.values[(k * n + i) * n + j] = pi(k, i, j)[0];
    }
  }
  return t;
}

/// Maps a working-coordinate tensor of `frame` (x = A y + t) back to x.
inline PointTensor to_original(const PointTensor& t, const LinearFrame& frame) {
  if (frame.is_identity()) return t;
  const std::size_t n = t.n;
  std::vector<double> jac(n * n), inv(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      jac[i * n + j] = frame.matrix(i, j);
      inv[i * n + j] = frame.inverse(i, j);
    }
  }
  return t.transformed(jac, inv);
}

/// Connection and curvature at one point, in original coordinates.
struct PointAnalysis {
  Point point;
  PointTensor thomas;
  PointTensor weyl;
  PointTensor liouville;
  /// Sigma(l) for l = n + 3 .. d (one-based labels) when the web has more
  /// than n + 2 hypersurface foliations.
  std::vector<std::pair<std::size_t, PointTensor>> sigma;
  double residual = 0.0;
  double rhs_scale = 0.0;
  std::size_t equations = 0;
  std::size_t unknowns = 0;
  GeneralPositionResult general_position;
};

/// Solves at original point x (working frame `frame`) with slopes of order
/// `order`; throws on degenerate points. General position is checked first
/// and a failure raises SingularAtPoint.
inline PointAnalysis analyze_point(const Web& w, const LinearFrame& frame, const Point& x, int order,
                                   double gp_tol = 1e-7, double pivot_tol = kDefaultPivotTol) {
  if (order < 3) throw OrderExhausted("verdict needs slope jets of order >= 3");
  const std::size_t n = w.dimension();
  const Point y = frame.to_working(x);
  PointAnalysis out;
  out.point = x;
  out.general_position = general_position_check(w, frame, y, gp_tol);
  if (!out.general_position.pass) throw SingularAtPoint("general position fails: " + out.general_position.description);

  const int tq = order - 1;
  const bool many = w.all_codim(1) && w.size() > n + 2;
  std::vector<std::size_t> first(std::min(w.size(), n + 2));
  for (std::size_t i = 0; i < first.size(); ++i) first[i] = i;
  const Web base = many ? w.subweb(first) : w;
  auto conn = solve_canonical<double>(base, frame, y, tq, pivot_tol);
  out.residual = conn.residual;
  out.rhs_scale = conn.rhs_scale;
  out.equations = conn.equations;
  out.unknowns = conn.unknowns;
  out.thomas = to_original(point_tensor(conn.pi), frame);

  const auto curv = tensors(conn.pi);
  out.weyl = to_original(point_tensor(curv.weyl, n, 1, 3), frame);
  out.liouville = to_original(point_tensor(curv.liouville, n, 0, 3), frame);

  if (many) {
    for (std::size_t ell = n + 2; ell < w.size(); ++ell) {
      auto s = sigma<double>(w, ell, frame, y, 0, pivot_tol);
      out.sigma.emplace_back(s.label, to_original(point_tensor(s.sigma), frame));
    }
  }
  return out;
}

struct VerdictConfig {
  int order = 4;
  double tol = 1e-7;
  std::size_t samples = 7;
  double radius = 0.1;
  std::uint64_t seed = 0;
  /// 0 means hardware concurrency.
  unsigned jobs = 0;
  double general_position_tol = 1e-7;
};

enum class Verdict { Linearizable, NotLinearizable, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Linearizable: return "linearizable";
    case Verdict::NotLinearizable: return "not_linearizable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct SampleRecord {
  Point point;
  bool skipped = false;
  std::string skip_reason;
  bool pass = false;
  double thomas_norm = 0.0;
  /// 1 + thomas_norm; curvature and Sigma norms are compared against tol * scale.
  double scale = 1.0;
  double residual = 0.0;
  /// residual / (1 + max |rhs|).
  double residual_scaled = 0.0;
  std::size_t equations = 0;
  std::size_t unknowns = 0;
  double weyl_norm = 0.0;
  double liouville_norm = 0.0;
  std::vector<std::pair<std::size_t, double>> sigma_norms;
  /// Which test decided the sample: "residual", "weyl", "liouville", "sigma".
  std::vector<std::string> failed;
};

struct LinearizabilityReport {
  std::string label;
  std::size_t dimension = 0;
  std::vector<std::size_t> codims;
  VerdictConfig config;
  Point base_point;
  bool generic_frame = false;
  std::vector<double> frame_matrix;
  std::vector<SampleRecord> samples;
  Verdict verdict = Verdict::Inconclusive;
  std::size_t skipped = 0;
  /// "weyl" for n > 2, "liouville" for n = 2.
  std::string curvature_test;
};

/// `count` seeded points uniform in the ball of the given radius around
/// base. The centre itself is not a sample: example webs are often
/// degenerate exactly there.
inline std::vector<Point> sample_points(const Point& base, std::size_t count, double radius, std::uint64_t seed) {
  std::vector<Point> pts;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = base.size();
  while (pts.size() < count) {
    Point dir(n);
    double len = 0.0;
    for (auto& v : dir) {
      v = gauss(rng);
      len += v * v;
    }
    len = std::sqrt(len);
    if (len == 0.0) continue;
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
    Point p(base);
    for (std::size_t i = 0; i < n; ++i) p[i] += r * dir[i] / len;
    pts.push_back(std::move(p));
  }
  return pts;
}

inline SampleRecord evaluate_sample(const Web& w, const LinearFrame& frame, const Point& x, const VerdictConfig& cfg) {
  SampleRecord rec;
  rec.point = x;
  try {
    auto pa = analyze_point(w, frame, x, cfg.order, cfg.general_position_tol);
    rec.thomas_norm = pa.thomas.max_abs();
    rec.scale = 1.0 + rec.thomas_norm;
    rec.residual = pa.residual;
    rec.residual_scaled = pa.residual / (1.0 + pa.rhs_scale);
    rec.equations = pa.equations;
    rec.unknowns = pa.unknowns;
    rec.weyl_norm = pa.weyl.max_abs();
    rec.liouville_norm = pa.liouville.max_abs();
    for (const auto& [label, s] : pa.sigma) rec.sigma_norms.emplace_back(label, s.max_abs());

    if (rec.residual_scaled >= cfg.tol) rec.failed.push_back("residual");
    if (w.dimension() > 2) {
      if (rec.weyl_norm >= cfg.tol * rec.scale) rec.failed.push_back("weyl");
    } else if (rec.liouville_norm >= cfg.tol * rec.scale) {
      rec.failed.push_back("liouville");
    }
    for (const auto& [label, v] : rec.sigma_norms) {
      if (v >= cfg.tol * rec.scale) {
        rec.failed.push_back("sigma");
        break;
      }
    }
    rec.pass = rec.failed.empty();
  } catch (const SingularAtPoint& e) {
    rec.skipped = true;
    rec.skip_reason = e.what();
  } catch (const TransversalityFailure& e) {
    rec.skipped = true;
    rec.skip_reason = e.what();
  } catch (const DivisionByNonUnit& e) {
    rec.skipped = true;
    rec.skip_reason = e.what();
  } catch (const DomainError& e) {
    rec.skipped = true;
    rec.skip_reason = e.what();
  }
  return rec;
}

/// Decides linearizability by sampling: every sample must have a consistent
/// canonical connection with vanishing curvature (Weyl for n > 2, Liouville
/// for n = 2) and vanishing Sigma tensors. Samples are given explicitly in
/// original coordinates; `base` is only recorded in the report.
inline LinearizabilityReport verdict_at(const Web& w, const std::vector<Point>& pts, const Point& base,
                                        const VerdictConfig& cfg) {
  if (cfg.order < 3) throw InputError("order must be at least 3");
  if (pts.empty()) throw InputError("sample count must be at least 1");
  for (const auto& p : pts) {
    if (p.size() != w.dimension()) throw InputError("sample point has the wrong dimension");
  }

  LinearizabilityReport rep;
  rep.label = w.label();
  rep.dimension = w.dimension();
  for (const auto& f : w.foliations()) rep.codims.push_back(f.codim());
  rep.config = cfg;
  rep.config.samples = pts.size();
  rep.base_point = base;
  rep.curvature_test = w.dimension() > 2 ? "weyl" : "liouville";

  const LinearFrame frame = choose_frame(w, pts, cfg.seed);
  rep.generic_frame = !frame.is_identity();
  rep.frame_matrix = frame.matrix_entries();

  rep.samples.resize(pts.size());
  unsigned jobs = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(pts.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < pts.size();) rep.samples[i] = evaluate_sample(w, frame, pts[i], cfg);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  bool any_fail = false;
  for (const auto& s : rep.samples) {
    if (s.skipped) {
      ++rep.skipped;
    } else if (!s.pass) {
      any_fail = true;
    }
  }
  rep.verdict = any_fail ? Verdict::NotLinearizable : rep.skipped ? Verdict::Inconclusive : Verdict::Linearizable;
  return rep;
}

/// Verdict at cfg.samples seeded points around base.
inline LinearizabilityReport verdict(const Web& w, const Point& base, const VerdictConfig& cfg) {
  if (cfg.samples < 1) throw InputError("sample count must be at least 1");
  if (!(cfg.radius > 0.0)) throw InputError("sample radius must be positive");
  if (base.size() != w.dimension()) throw InputError("base point has the wrong dimension");
  return verdict_at(w, sample_points(base, cfg.samples, cfg.radius, cfg.seed), base, cfg);
}

struct TensorialityResult {
  /// Max deviation of the transformed curvature tensor (Weyl for n > 2,
  /// Liouville for n = 2) from the one computed for the pushed web.
  double curvature_deviation = 0.0;
  /// Same for the Sigma tensors (0 when not applicable).
  double sigma_deviation = 0.0;
  double thomas_scale = 0.0;
  /// |phi_inv(phi(x0)) - x0|.
  double roundtrip_error = 0.0;
  bool mismatch = false;
};

/// Compares curvature at x0 for w with curvature at phi(x0) for phi_*(w),
/// transported by the Jacobian of phi. Both maps are expressions.
inline TensorialityResult tensoriality_check(const Web& w, const std::vector<ScalarField>& phi,
                                             const std::vector<ScalarField>& phi_inv, const Point& x0, int order = 4,
                                             std::uint64_t seed = 0, double flag_tol = 1e-6) {
  const std::size_t n = w.dimension();
  if (phi.size() != n || phi_inv.size() != n) throw InputError("maps need one expression per coordinate");
  Point X0(n);
  std::vector<double> jac(n * n), inv(n * n);
  auto xs = seed_point<double>(x0, 1);
  for (std::size_t a = 0; a < n; ++a) {
    auto v = eval_jet<double>(phi[a], xs);
    X0[a] = v[0];
    for (std::size_t i = 0; i < n; ++i) jac[a * n + i] = v[1 + i];
  }
  auto Xs = seed_point<double>(X0, 1);
  TensorialityResult res;
  for (std::size_t i = 0; i < n; ++i) {
    auto v = eval_jet<double>(phi_inv[i], Xs);
    res.roundtrip_error = std::max(res.roundtrip_error, std::abs(v[0] - x0[i]));
    for (std::size_t a = 0; a < n; ++a) inv[i * n + a] = v[1 + a];
  }

  const Web pushed = pushforward(w, phi_inv);
  const auto f0 = choose_frame(w, {x0}, seed);
  const auto f1 = choose_frame(pushed, {X0}, seed);
  const auto a = analyze_point(w, f0, x0, order);
  const auto b = analyze_point(pushed, f1, X0, order);

  const bool planar = n == 2;
  const auto& ca = planar ? a.liouville : a.weyl;
  const auto& cb = planar ? b.liouville : b.weyl;
  res.curvature_deviation = max_difference(ca.transformed(jac, inv), cb);
  for (std::size_t s = 0; s < a.sigma.size() && s < b.sigma.size(); ++s) {
    res.sigma_deviation =
        std::max(res.sigma_deviation, max_difference(a.sigma[s].second.transformed(jac, inv), b.sigma[s].second));
  }
  res.thomas_scale = 1.0 + std::max(a.thomas.max_abs(), b.thomas.max_abs());
  res.mismatch = res.roundtrip_error > 1e-8 ||
                 std::max(res.curvature_deviation, res.sigma_deviation) > flag_tol * res.thomas_scale;
  return res;
}

}  // namespace webgeom
