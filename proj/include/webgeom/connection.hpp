#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "webgeom/error.hpp"
#include "webgeom/jet.hpp"
#include "webgeom/jet_matrix.hpp"
#include "webgeom/web.hpp"

namespace webgeom {

/// Position of the unordered pair {i, j} among pairs (i <= j) in ascending
/// order over {0..n-1}.
inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

inline std::size_t pair_count(std::size_t n) { return n * (n + 1) / 2; }

/// Number of independent Thomas coefficients (and of ABCD coefficients).
inline std::size_t connection_unknowns(std::size_t n) { return n * (n - 1) * (n + 2) / 2; }

/// Scalar equations contributed by a codimension-c foliation in dimension n.
inline std::size_t equation_count(std::size_t n, std::size_t c) { return c * (n - c) * (n - c + 1) / 2; }

/// Thomas coefficients Pi^k_{ij} (zero-based indices), symmetric in (i, j).
template <JetScalar Scalar = double>
class ThomasSymbols {
 public:
  using jet_type = Jet<Scalar>;

  ThomasSymbols(std::size_t n, std::size_t nvars, int order)
      : n_(n), data_(n * pair_count(n), jet_type(nvars, order)) {}

  std::size_t dimension() const noexcept { return n_; }
  int order() const { return data_.front().order(); }
  std::size_t nvars() const { return data_.front().nvars(); }

  jet_type& operator()(std::size_t k, std::size_t i, std::size_t j) {
    return data_[k * pair_count(n_) + pair_index(i, j, n_)];
  }
  const jet_type& operator()(std::size_t k, std::size_t i, std::size_t j) const {
    return data_[k * pair_count(n_) + pair_index(i, j, n_)];
  }

  /// Max |constant term| over all components.
  double max_norm() const {
    double m = 0.0;
    for (const auto& c : data_) m = std::max(m, static_cast<double>(std::abs(c[0])));
    return m;
  }

  /// Max |coefficient| of sum_l Pi^l_{lj} over j and the whole jet.
  double trace_residual() const {
    double m = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      jet_type t(nvars(), order());
      for (std::size_t l = 0; l < n_; ++l) t += (*this)(l, l, j);
      m = std::max(m, t.max_abs());
    }
    return m;
  }

  ThomasSymbols truncated(int q) const {
    ThomasSymbols out(n_, nvars(), q);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i].truncated(q);
    return out;
  }

  friend ThomasSymbols operator-(const ThomasSymbols& a, const ThomasSymbols& b) {
    ThomasSymbols out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
    return out;
  }

  const std::vector<jet_type>& components() const noexcept { return data_; }

 private:
  std::size_t n_;
  std::vector<jet_type> data_;
};

/// Unknown layout for the trace-eliminated Thomas parametrization: k
/// ascending, then pairs (i <= j) ascending, skipping Pi^{n-1}_{i,n-1}.
/// Those are restored from Pi^{n-1}_{n-1,j} = -sum_{c<n-1} Pi^c_{cj}.
class ThomasLayout {
 public:
  explicit ThomasLayout(std::size_t n) : n_(n), column_(n * pair_count(n), npos) {
    std::size_t col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
          if (k == n - 1 && j == n - 1) continue;
          column_[k * pair_count(n) + pair_index(i, j, n)] = col++;
          entries_.push_back({k, i, j});
        }
      }
    }
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::array<std::size_t, 3>& entry(std::size_t col) const { return entries_[col]; }

  /// Pi^k_{ij} as a combination of unknown columns.
  std::vector<std::pair<std::size_t, double>> expand(std::size_t k, std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    if (k == n_ - 1 && j == n_ - 1) {
      std::vector<std::pair<std::size_t, double>> out;
      for (std::size_t c = 0; c + 1 < n_; ++c) {
        for (auto [col, v] : expand(c, c, i)) out.emplace_back(col, -v);
      }
      return out;
    }
    return {{column_[k * pair_count(n_) + pair_index(i, j, n_)], 1.0}};
  }

  template <JetScalar Scalar>
  ThomasSymbols<Scalar> restore(const std::vector<Jet<Scalar>>& s) const {
    ThomasSymbols<Scalar> pi(n_, s.front().nvars(), s.front().order());
    for (std::size_t k = 0; k < n_; ++k) {
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i; j < n_; ++j) {
          Jet<Scalar> v(s.front().nvars(), s.front().order());
          for (auto [col, c] : expand(k, i, j)) v += s[col] * Scalar{c};
          pi(k, i, j) = std::move(v);
        }
      }
    }
    return pi;
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> column_;
  std::vector<std::array<std::size_t, 3>> entries_;
};

/// Coefficients A^c, B_a^c, C^c_{ab}, D_{ab} of the second-order system
/// satisfied by the leaves of the hypersurface foliations; a, b, c range over
/// the m = n - 1 graph coordinates (zero-based).
template <JetScalar Scalar = double>
struct ABCDCoefficients {
  std::size_t m;
  std::vector<Jet<Scalar>> a;  // m
  std::vector<Jet<Scalar>> b;  // m x m, index a * m + c
  std::vector<Jet<Scalar>> c;  // m x pairs(m), index c * P + pair(a, b)
  std::vector<Jet<Scalar>> d;  // pairs(m)

  ABCDCoefficients(std::size_t m_, std::size_t nvars, int order)
      : m(m_),
        a(m_, Jet<Scalar>(nvars, order)),
        b(m_ * m_, Jet<Scalar>(nvars, order)),
        c(m_ * pair_count(m_), Jet<Scalar>(nvars, order)),
        d(pair_count(m_), Jet<Scalar>(nvars, order)) {}

  Jet<Scalar>& A(std::size_t cc) { return a[cc]; }
  Jet<Scalar>& B(std::size_t aa, std::size_t cc) { return b[aa * m + cc]; }
  Jet<Scalar>& C(std::size_t cc, std::size_t aa, std::size_t bb) { return c[cc * pair_count(m) + pair_index(aa, bb, m)]; }
  Jet<Scalar>& D(std::size_t aa, std::size_t bb) { return d[pair_index(aa, bb, m)]; }
  const Jet<Scalar>& A(std::size_t cc) const { return a[cc]; }
  const Jet<Scalar>& B(std::size_t aa, std::size_t cc) const { return b[aa * m + cc]; }
  const Jet<Scalar>& C(std::size_t cc, std::size_t aa, std::size_t bb) const {
    return c[cc * pair_count(m) + pair_index(aa, bb, m)];
  }
  const Jet<Scalar>& D(std::size_t aa, std::size_t bb) const { return d[pair_index(aa, bb, m)]; }

  std::size_t size() const { return a.size() + b.size() + c.size() + d.size(); }

  /// Unknown vector in column order A, B, C, D.
  std::vector<Jet<Scalar>> flatten() const {
    std::vector<Jet<Scalar>> out(a);
    out.insert(out.end(), b.begin(), b.end());
    out.insert(out.end(), c.begin(), c.end());
    out.insert(out.end(), d.begin(), d.end());
    return out;
  }

  static ABCDCoefficients unflatten(std::size_t m, const std::vector<Jet<Scalar>>& s) {
    ABCDCoefficients out(m, s.front().nvars(), s.front().order());
    std::size_t p = 0;
    for (auto& v : out.a) v = s.at(p++);
    for (auto& v : out.b) v = s.at(p++);
    for (auto& v : out.c) v = s.at(p++);
    for (auto& v : out.d) v = s.at(p++);
    return out;
  }
};

template <JetScalar Scalar>
ABCDCoefficients<Scalar> thomas_to_abcd(const ThomasSymbols<Scalar>& pi) {
  const std::size_t n = pi.dimension(), m = n - 1, N = n - 1;
  ABCDCoefficients<Scalar> r(m, pi.nvars(), pi.order());
  const Scalar half{0.5};
  for (std::size_t c = 0; c < m; ++c) {
    r.A(c) = pi(c, N, N);
    for (std::size_t a = 0; a < m; ++a) {
      r.B(a, c) = pi(c, a, N);
      if (a == c) r.B(a, c) -= pi(N, N, N) * half;
      for (std::size_t b = a; b < m; ++b) {
        auto v = pi(c, a, b);
        if (c == a) v -= pi(N, N, b);
        if (c == b) v -= pi(N, N, a);
        r.C(c, a, b) = std::move(v);
      }
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) r.D(a, b) = -pi(N, a, b);
  }
  return r;
}

/// Inverse of thomas_to_abcd on trace-free symmetric symbols.
template <JetScalar Scalar>
ThomasSymbols<Scalar> abcd_to_thomas(const ABCDCoefficients<Scalar>& r) {
  const std::size_t m = r.m, n = m + 1, N = m;
  const auto nv = r.a.front().nvars();
  const int q = r.a.front().order();
  ThomasSymbols<Scalar> pi(n, nv, q);
  const Scalar inv{1.0 / static_cast<double>(n + 1)};

  Jet<Scalar> trace_b(nv, q);
  for (std::size_t a = 0; a < m; ++a) trace_b += r.B(a, a);
  pi(N, N, N) = trace_b * (Scalar{-2.0} * inv);
  for (std::size_t b = 0; b < m; ++b) {
    Jet<Scalar> t(nv, q);
    for (std::size_t a = 0; a < m; ++a) t += r.C(a, a, b);
    pi(N, N, b) = t * (-inv);
  }
  for (std::size_t c = 0; c < m; ++c) {
    pi(c, N, N) = r.A(c);
    for (std::size_t a = 0; a < m; ++a) {
      pi(c, a, N) = r.B(a, c);
      if (a == c) pi(c, a, N) += pi(N, N, N) * Scalar{0.5};
      for (std::size_t b = a; b < m; ++b) {
        auto v = r.C(c, a, b);
        if (c == a) v += pi(N, N, b);
        if (c == b) v += pi(N, N, a);
        pi(c, a, b) = std::move(v);
      }
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) pi(N, a, b) = -r.D(a, b);
  }
  return pi;
}

/// Linear equations (rows) over some unknown layout with jet coefficients.
template <JetScalar Scalar = double>
struct LinearRows {
  std::vector<std::vector<Jet<Scalar>>> coefficients;
  std::vector<Jet<Scalar>> rhs;

  void append(const LinearRows& other) {
    coefficients.insert(coefficients.end(), other.coefficients.begin(), other.coefficients.end());
    rhs.insert(rhs.end(), other.rhs.begin(), other.rhs.end());
  }

  std::size_t size() const noexcept { return rhs.size(); }

  JetMatrix<Scalar> matrix() const {
    const auto& first = coefficients.front();
    JetMatrix<Scalar> a(coefficients.size(), first.size(), first.front().nvars(), first.front().order());
    for (std::size_t r = 0; r < coefficients.size(); ++r) a.set_row(r, coefficients[r]);
    return a;
  }
};

namespace detail {

/// X_a(g) where X_a = d/dy^a + sum_k Omega^k_a d/dy^{m+k}; drops one order.
template <JetScalar Scalar>
Jet<Scalar> leaf_derivative(const SlopeJets<Scalar>& om, std::size_t a, const Jet<Scalar>& g) {
  const std::size_t m = om.cols();
  const int q = g.order() - 1;
  Jet<Scalar> v = g.partial(a);
  for (std::size_t k = 0; k < om.rows(); ++k) v += om(k, a).truncated(q) * g.partial(m + k);
  return v;
}

/// Z^i_a: identity on graph coordinates, slopes on leaf coordinates.
template <JetScalar Scalar>
Jet<Scalar> graph_tangent(const SlopeJets<Scalar>& om, std::size_t i, std::size_t a, int q) {
  const std::size_t m = om.cols();
  if (i < m) return Jet<Scalar>::constant(om.nvars(), q, Scalar{i == a ? 1.0 : 0.0});
  return om(i - m, a).truncated(q);
}

}  // namespace detail

/// Equations X_a(Omega_b) = Omega_a Omega_b sum_c A^c Omega_c
///   + sum_c (Omega_a B_b^c + Omega_b B_a^c) Omega_c + sum_c C^c_{ab} Omega_c + D_{ab}
/// for a <= b, from slopes of order q (coefficients of order q - 1).
template <JetScalar Scalar>
LinearRows<Scalar> codim1_rows_from_slopes(const SlopeJets<Scalar>& om) {
  if (om.rows() != 1) throw DimensionMismatch("ABCD rows need a hypersurface foliation");
  const std::size_t m = om.cols();
  const int q = om.order() - 1;
  if (q < 0) throw OrderExhausted("slopes need order >= 1 to assemble equations");
  const std::size_t nv = om.nvars();
  const std::size_t P = pair_count(m);
  const std::size_t cols = m + m * m + m * P + P;
  std::vector<Jet<Scalar>> w(m, Jet<Scalar>(nv, q));
  for (std::size_t c = 0; c < m; ++c) w[c] = om(0, c).truncated(q);

  LinearRows<Scalar> rows;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      std::vector<Jet<Scalar>> r(cols, Jet<Scalar>(nv, q));
      const auto wab = w[a] * w[b];
      for (std::size_t c = 0; c < m; ++c) {
        r[c] += wab * w[c];
        r[m + b * m + c] += w[a] * w[c];
        r[m + a * m + c] += w[b] * w[c];
        r[m + m * m + c * P + pair_index(a, b, m)] += w[c];
      }
      r[m + m * m + m * P + pair_index(a, b, m)] += Jet<Scalar>::constant(nv, q, Scalar{1});
      rows.coefficients.push_back(std::move(r));
      rows.rhs.push_back(detail::leaf_derivative(om, a, om(0, b)));
    }
  }
  return rows;
}

template <JetScalar Scalar = double>
LinearRows<Scalar> assemble_codim1_rows(const Foliation& f, const LinearFrame& frame, const Point& y0, int order) {
  return codim1_rows_from_slopes(f.slopes<Scalar>(frame, y0, order));
}

/// Totally-geodesic equations for a foliation in graph form, over the
/// trace-eliminated Thomas unknowns:
///   X_a(Omega^k_b) = sum_{l<m} Omega^k_l G^l_{ab} - G^k_{ab},
///   G^l_{ab} = sum_{i,j} Pi^l_{ij} Z^i_a Z^j_b,
/// for every leaf coordinate k and a <= b.
template <JetScalar Scalar>
LinearRows<Scalar> geodesic_rows_from_slopes(const SlopeJets<Scalar>& om) {
  const std::size_t c = om.rows(), m = om.cols(), n = c + m;
  const int q = om.order() - 1;
  if (q < 0) throw OrderExhausted("slopes need order >= 1 to assemble equations");
  const std::size_t nv = om.nvars();
  const ThomasLayout layout(n);

  std::vector<Jet<Scalar>> z;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < m; ++a) z.push_back(detail::graph_tangent(om, i, a, q));
  }
  auto Z = [&](std::size_t i, std::size_t a) -> const Jet<Scalar>& { return z[i * m + a]; };

  LinearRows<Scalar> rows;
  for (std::size_t k = m; k < n; ++k) {
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a; b < m; ++b) {
        std::vector<Jet<Scalar>> r(layout.size(), Jet<Scalar>(nv, q));
        for (std::size_t l = 0; l < n; ++l) {
          if (l >= m && l != k) continue;
          const Jet<Scalar> wl = l < m ? Z(k, l) : Jet<Scalar>::constant(nv, q, Scalar{-1});
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
              if (Z(i, a).max_abs() == 0.0 || Z(j, b).max_abs() == 0.0) continue;
              const auto weight = Z(i, a) * Z(j, b) * wl;
              for (auto [col, v] : layout.expand(l, i, j)) r[col] += weight * Scalar{v};
            }
          }
        }
        rows.coefficients.push_back(std::move(r));
        rows.rhs.push_back(detail::leaf_derivative(om, a, om(k - m, b)));
      }
    }
  }
  return rows;
}

template <JetScalar Scalar = double>
LinearRows<Scalar> assemble_geodesic_rows(const Foliation& f, const LinearFrame& frame, const Point& y0, int order) {
  return geodesic_rows_from_slopes(f.slopes<Scalar>(frame, y0, order));
}

/// Which unknown parametrization a solve used.
enum class Parametrization { ABCD, Thomas };

template <JetScalar Scalar = double>
struct CanonicalSystem {
  Parametrization parametrization;
  LinearRows<Scalar> rows;
  std::size_t unknowns;
};

/// Stacks the equations of every foliation; slopes are taken at order
/// thomas_order + 1.
template <JetScalar Scalar = double>
CanonicalSystem<Scalar> assemble_system(const Web& w, const LinearFrame& frame, const Point& y0, int thomas_order,
                                        bool prefer_abcd = true) {
  const std::size_t n = w.dimension();
  CanonicalSystem<Scalar> sys{prefer_abcd && w.all_codim(1) ? Parametrization::ABCD : Parametrization::Thomas, {},
                              connection_unknowns(n)};
  for (const auto& f : w.foliations()) {
    auto om = f.slopes<Scalar>(frame, y0, thomas_order + 1);
    sys.rows.append(sys.parametrization == Parametrization::ABCD ? codim1_rows_from_slopes(om)
                                                                 : geodesic_rows_from_slopes(om));
  }
  if (sys.rows.size() < sys.unknowns) {
    throw UnderdeterminedWeb("web gives " + std::to_string(sys.rows.size()) + " equations for " +
                             std::to_string(sys.unknowns) + " unknowns");
  }
  return sys;
}

template <JetScalar Scalar = double>
struct CanonicalConnection {
  ThomasSymbols<Scalar> pi;
  /// Max |constant term| of b - A s over all rows (equations not used by
  /// the pivot selection in the overdetermined case).
  double residual = 0.0;
  /// Max |constant term| of b, for scaling the residual.
  double rhs_scale = 0.0;
  std::size_t equations = 0;
  std::size_t unknowns = 0;
  Parametrization parametrization = Parametrization::Thomas;
};

/// The unique projective connection compatible with the web, as Thomas
/// jets of order thomas_order at y0 (working coordinates of `frame`).
template <JetScalar Scalar = double>
CanonicalConnection<Scalar> solve_canonical(const Web& w, const LinearFrame& frame, const Point& y0, int thomas_order,
                                            double pivot_tol = kDefaultPivotTol, bool prefer_abcd = true) {
  const std::size_t n = w.dimension();
  auto sys = assemble_system<Scalar>(w, frame, y0, thomas_order, prefer_abcd);
  const auto a = sys.rows.matrix();
  std::vector<Jet<Scalar>> s;
  double residual = 0.0;
  if (sys.rows.size() == sys.unknowns) {
    s = lu_solve(a, sys.rows.rhs, pivot_tol);
    const auto image = a.apply(s);
    for (std::size_t r = 0; r < image.size(); ++r) {
      residual = std::max(residual, static_cast<double>(std::abs(sys.rows.rhs[r][0] - image[r][0])));
    }
  } else {
    auto res = lsq_consistency(a, sys.rows.rhs, pivot_tol);
    s = std::move(res.solution);
    residual = res.residual_norm;
  }
  double scale = 0.0;
  for (const auto& b : sys.rows.rhs) scale = std::max(scale, static_cast<double>(std::abs(b[0])));

  CanonicalConnection<Scalar> out{sys.parametrization == Parametrization::ABCD
                                      ? abcd_to_thomas(ABCDCoefficients<Scalar>::unflatten(n - 1, s))
                                      : ThomasLayout(n).restore(s),
                                  residual,
                                  scale,
                                  sys.rows.size(),
                                  sys.unknowns,
                                  sys.parametrization};
  return out;
}

/// Sigma(l) = Pi(W(l)) - Pi(W(n+2)), W(l) = (F_1, ..., F_{n+1}, F_l). `ell`
/// is the zero-based index of F_l, at least n + 2.
template <JetScalar Scalar = double>
struct SigmaTensor {
  ThomasSymbols<Scalar> sigma;
  std::size_t base_label;  // n + 2 (one-based)
  std::size_t label;       // l (one-based)
};

template <JetScalar Scalar = double>
SigmaTensor<Scalar> sigma(const Web& w, std::size_t ell, const LinearFrame& frame, const Point& y0, int thomas_order,
                          double pivot_tol = kDefaultPivotTol) {
  const std::size_t n = w.dimension();
  if (!w.all_codim(1)) throw DimensionMismatch("Sigma tensors are defined for hypersurface webs");
  if (w.size() < n + 3 || ell < n + 2 || ell >= w.size()) {
    throw DimensionMismatch("Sigma(l) needs d >= n + 3 and n + 3 <= l <= d");
  }
  std::vector<std::size_t> base(n + 2), other(n + 2);
  for (std::size_t i = 0; i < n + 1; ++i) base[i] = other[i] = i;
  base[n + 1] = n + 1;
  other[n + 1] = ell;
  auto p0 = solve_canonical<Scalar>(w.subweb(base), frame, y0, thomas_order, pivot_tol);
  auto p1 = solve_canonical<Scalar>(w.subweb(other), frame, y0, thomas_order, pivot_tol);
  return {p1.pi - p0.pi, n + 2, ell + 1};
}

/// The 15 x 15 matrix of the homogeneous ABCD system for the normalized
/// 5-web in dimension 3: Omega^1 = dx1 - dx3, Omega^2 = dx2 - dx3,
/// Omega^3 = dx3, and Omega^4, Omega^5 with slopes (Omega_1, Omega_2).
template <JetScalar Scalar = double>
JetMatrix<Scalar> build_normalized_Mw_n3(const std::array<Jet<Scalar>, 2>& omega4, const std::array<Jet<Scalar>, 2>& omega5) {
  const auto nv = omega4[0].nvars();
  const int q = omega4[0].order();
  auto cst = [&](double v) { return Jet<Scalar>::constant(nv, q, Scalar{v}); };
  const std::array<std::array<Jet<Scalar>, 2>, 5> forms{{{cst(1), cst(0)},
                                                         {cst(0), cst(1)},
                                                         {cst(0), cst(0)},
                                                         omega4,
                                                         omega5}};
  JetMatrix<Scalar> mw(15, 15, nv, q);
  std::size_t row = 0;
  for (const auto& f : forms) {
    // Slopes at one order higher so the row coefficients keep order q.
    SlopeJets<Scalar> om(1, 2, nv, q + 1);
    for (std::size_t a = 0; a < 2; ++a) {
      Jet<Scalar> lifted(nv, q + 1);
      for (std::size_t p = 0; p < f[a].size(); ++p) lifted[p] = f[a][p];
      om(0, a) = std::move(lifted);
    }
    auto rows = codim1_rows_from_slopes(om);
    for (const auto& r : rows.coefficients) mw.set_row(row++, r);
  }
  return mw;
}

/// RK4 trace of a curve inside a leaf of foliation `index` through y0: the
/// graph parameter moves along t(s) = t0 + s * dir. At every step the second
/// derivative of the leaf coordinates (five-point differences) is compared
/// with the right-hand side of the geodesic system for the pointwise
/// canonical connection. Returns the max absolute mismatch. The step h is
/// divided by the initial speed when that exceeds 1, so steep leaves are
/// not followed past the point where their graph form breaks down.
inline double leaf_geodesic_residual(const Web& w, std::size_t index, const LinearFrame& frame, const Point& y0,
                                     const std::vector<double>& dir, int steps = 100, double h = 1e-3) {
  const Foliation& f = w[index];
  const std::size_t n = w.dimension(), m = f.leaf_dimension(), c = f.codim();
  if (dir.size() != m) throw DimensionMismatch("leaf direction has the wrong length");

  auto velocity = [&](const Point& y) {
    auto om = f.slopes<double>(frame, y, 0);
    Point v(n, 0.0);
    for (std::size_t a = 0; a < m; ++a) v[a] = dir[a];
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t a = 0; a < m; ++a) v[m + k] += om(k, a)[0] * dir[a];
    }
    return v;
  };
  auto axpy = [](const Point& y, double s, const Point& v) {
    Point out(y);
    for (std::size_t i = 0; i < y.size(); ++i) out[i] += s * v[i];
    return out;
  };
  auto rk4 = [&](const Point& y, double step) {
    auto k1 = velocity(y);
    auto k2 = velocity(axpy(y, step / 2, k1));
    auto k3 = velocity(axpy(y, step / 2, k2));
    auto k4 = velocity(axpy(y, step, k3));
    Point out(y);
    for (std::size_t i = 0; i < n; ++i) out[i] += step / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return out;
  };

  {
    const auto v0 = velocity(y0);
    double speed = 0.0;
    for (double v : v0) speed += v * v;
    h /= std::max(1.0, std::sqrt(speed));
  }

  // Trajectory with two guard points on each side for the differences.
  std::vector<Point> traj;
  Point back = y0;
  std::vector<Point> before;
  for (int i = 0; i < 2; ++i) {
    back = rk4(back, -h);
    before.push_back(back);
  }
  traj.assign(before.rbegin(), before.rend());
  traj.push_back(y0);
  Point fwd = y0;
  for (int i = 0; i < steps + 2; ++i) {
    fwd = rk4(fwd, h);
    traj.push_back(fwd);
  }

  double worst = 0.0;
  for (int s = 0; s <= steps; ++s) {
    const std::size_t p = static_cast<std::size_t>(s) + 2;
    const Point& y = traj[p];
    auto conn = solve_canonical<double>(w, frame, y, 0);
    auto om = f.slopes<double>(frame, y, 0);
    std::vector<double> z(n * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) z[a * m + a] = 1.0;
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t a = 0; a < m; ++a) z[(m + k) * m + a] = om(k, a)[0];
    }
    // G^l(v, v) with v = Z dir.
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < m; ++a) v[i] += z[i * m + a] * dir[a];
    }
    std::vector<double> g(n, 0.0);
    for (std::size_t l = 0; l < n; ++l) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) g[l] += conn.pi(l, i, j)[0] * v[i] * v[j];
      }
    }
    for (std::size_t k = m; k < n; ++k) {
      double rhs = -g[k];
      for (std::size_t l = 0; l < m; ++l) rhs += z[k * m + l] * g[l];
      const double d2 = (-traj[p - 2][k] + 16 * traj[p - 1][k] - 30 * traj[p][k] + 16 * traj[p + 1][k] -
                         traj[p + 2][k]) /
                        (12 * h * h);
      worst = std::max(worst, std::abs(d2 - rhs));
    }
  }
  return worst;
}

}  // namespace webgeom
