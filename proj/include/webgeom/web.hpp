#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "webgeom/error.hpp"
#include "webgeom/expr.hpp"
#include "webgeom/jet.hpp"
#include "webgeom/jet_matrix.hpp"

namespace webgeom {

using Point = std::vector<double>;

/// Affine change of coordinates x = A y + t from working coordinates y to the
/// coordinates x in which a web was described.
class LinearFrame {
 public:
  static constexpr double kMinDeterminant = 1e-8;

  static LinearFrame identity(std::size_t n) {
    LinearFrame f;
    f.n_ = n;
    f.a_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) f.a_[i * n + i] = 1.0;
    f.inv_ = f.a_;
    f.t_.assign(n, 0.0);
    f.identity_ = true;
    return f;
  }

  /// Row-major n x n matrix and translation; the inverse is computed here.
  LinearFrame(std::vector<double> matrix, std::vector<double> translation) : t_(std::move(translation)) {
    n_ = t_.size();
    if (matrix.size() != n_ * n_) throw ShapeMismatch("frame matrix must be n x n");
    a_ = std::move(matrix);
    inv_ = invert(a_, n_);
    identity_ = false;
  }

  std::size_t dimension() const noexcept { return n_; }
  bool is_identity() const noexcept { return identity_; }
  double matrix(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  double inverse(std::size_t i, std::size_t j) const { return inv_[i * n_ + j]; }
  const std::vector<double>& translation() const noexcept { return t_; }
  std::vector<double> matrix_entries() const { return a_; }

  Point to_original(const Point& y) const {
    Point x(t_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) x[i] += a_[i * n_ + j] * y[j];
    }
    return x;
  }

  Point to_working(const Point& x) const {
    Point y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) y[i] += inv_[i * n_ + j] * (x[j] - t_[j]);
    }
    return y;
  }

  /// Original-coordinate jets x(y) built from working-coordinate seeds.
  template <JetScalar Scalar>
  std::vector<Jet<Scalar>> original_jets(const Point& y0, int order) const {
    std::vector<Scalar> y(y0.begin(), y0.end());
    auto seeds = seed_point<Scalar>(y, order);
    if (identity_) return seeds;
    std::vector<Jet<Scalar>> x;
    for (std::size_t i = 0; i < n_; ++i) {
      Jet<Scalar> xi = Jet<Scalar>::constant(n_, order, Scalar{t_[i]});
      for (std::size_t j = 0; j < n_; ++j) xi += seeds[j] * Scalar{a_[i * n_ + j]};
      x.push_back(std::move(xi));
    }
    return x;
  }

 private:
  LinearFrame() = default;

  static std::vector<double> invert(const std::vector<double>& m, std::size_t n) {
    std::vector<double> a(m), inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      for (std::size_t r = k + 1; r < n; ++r) {
        if (std::abs(a[r * n + k]) > std::abs(a[p * n + k])) p = r;
      }
      if (p != k) {
        for (std::size_t c = 0; c < n; ++c) {
          std::swap(a[p * n + c], a[k * n + c]);
          std::swap(inv[p * n + c], inv[k * n + c]);
        }
        det = -det;
      }
      const double piv = a[k * n + k];
      det *= piv;
      if (std::abs(piv) < 1e-300) break;
      for (std::size_t c = 0; c < n; ++c) {
        a[k * n + c] /= piv;
        inv[k * n + c] /= piv;
      }
      for (std::size_t r = 0; r < n; ++r) {
        if (r == k) continue;
        const double f = a[r * n + k];
        if (f == 0.0) continue;
        for (std::size_t c = 0; c < n; ++c) {
          a[r * n + c] -= f * a[k * n + c];
          inv[r * n + c] -= f * inv[k * n + c];
        }
      }
    }
    if (!(std::abs(det) >= kMinDeterminant)) {
      throw InputError("frame determinant " + std::to_string(det) + " is too close to zero");
    }
    return inv;
  }

  std::size_t n_ = 0;
  std::vector<double> a_, inv_, t_;
  bool identity_ = true;
};

enum class FoliationKind { FirstIntegrals, Slopes, Direction };

inline const char* kind_name(FoliationKind k) {
  switch (k) {
    case FoliationKind::FirstIntegrals: return "first_integrals";
    case FoliationKind::Slopes: return "slopes";
    case FoliationKind::Direction: return "direction";
  }
  return "?";
}

/// Graph-form slopes of a foliation at a point: entry (k - m, a) is
/// Omega^k_a, the derivative of the leaf coordinate x^k along t^a, for
/// k = m..n-1 and a = 0..m-1 (zero-based, m = n - codim).
template <JetScalar Scalar>
using SlopeJets = JetMatrix<Scalar>;

/// A regular foliation of codimension c on a domain of R^n (or C^n), given by
/// c first integrals, by raw graph slopes, or (c = n - 1) by a direction field.
class Foliation {
 public:
  Foliation(FoliationKind kind, std::size_t n, std::size_t codim, std::vector<ScalarField> exprs)
      : kind_(kind), n_(n), codim_(codim), exprs_(std::move(exprs)) {
    if (n < 2) throw InputError("ambient dimension must be at least 2");
    if (codim < 1 || codim >= n) throw InputError("codimension must lie strictly between 0 and n");
    std::size_t expected = 0;
    switch (kind) {
      case FoliationKind::FirstIntegrals: expected = codim; break;
      case FoliationKind::Slopes: expected = codim * (n - codim); break;
      case FoliationKind::Direction:
        if (codim != n - 1) throw InputError("a direction field defines a codimension n-1 foliation");
        expected = n;
        break;
    }
    if (exprs_.size() != expected) {
      throw InputError(std::string(kind_name(kind)) + " foliation needs " + std::to_string(expected) +
                       " expressions, got " + std::to_string(exprs_.size()));
    }
    for (const auto& e : exprs_) {
      if (e.nvars() != n) throw InputError("expression '" + e.source() + "' has the wrong number of variables");
    }
  }

  FoliationKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return n_; }
  std::size_t codim() const noexcept { return codim_; }
  std::size_t leaf_dimension() const noexcept { return n_ - codim_; }
  const std::vector<ScalarField>& expressions() const noexcept { return exprs_; }

  /// Slopes as jets of order `order` at working point y0 under `frame`.
  /// Throws TransversalityFailure when the leaves are not graphs over the
  /// first n - c working coordinates at y0.
  template <JetScalar Scalar = double>
  SlopeJets<Scalar> slopes(const LinearFrame& frame, const Point& y0, int order) const {
    const std::size_t n = n_, c = codim_, m = n_ - codim_;
    SlopeJets<Scalar> out(c, m, n, order);
    try {
      switch (kind_) {
        case FoliationKind::FirstIntegrals: {
          auto x = frame.original_jets<Scalar>(y0, order + 1);
          JetMatrix<Scalar> low(c, c, n, order);
          JetMatrix<Scalar> up(c, m, n, order);
          for (std::size_t r = 0; r < c; ++r) {
            auto u = eval_jet<Scalar>(exprs_[r], x);
            for (std::size_t i = 0; i < n; ++i) {
              auto d = u.partial(i);
              if (i < m) {
                up(r, i) = std::move(d);
              } else {
                low(r, i - m) = std::move(d);
              }
            }
          }
          for (std::size_t a = 0; a < m; ++a) {
            std::vector<Jet<Scalar>> rhs;
            for (std::size_t r = 0; r < c; ++r) rhs.push_back(-up(r, a));
            auto col = lu_solve(low, rhs);
            for (std::size_t k = 0; k < c; ++k) out(k, a) = std::move(col[k]);
          }
          break;
        }
        case FoliationKind::Direction: {
          auto x = frame.original_jets<Scalar>(y0, order);
          std::vector<Jet<Scalar>> raw;
          for (const auto& e : exprs_) raw.push_back(eval_jet<Scalar>(e, x));
          auto field = to_working_vector<Scalar>(frame, raw);
          for (std::size_t k = 1; k < n; ++k) out(k - 1, 0) = field[k] / field[0];
          break;
        }
        case FoliationKind::Slopes: {
          auto x = frame.original_jets<Scalar>(y0, order);
          if (frame.is_identity()) {
            for (std::size_t k = 0; k < c; ++k) {
              for (std::size_t a = 0; a < m; ++a) out(k, a) = eval_jet<Scalar>(exprs_[k * m + a], x);
            }
            break;
          }
          // Push the graph tangent frame [I; Omega] through A^{-1} and
          // re-extract graph form: Omega' T'_up = T'_low.
          JetMatrix<Scalar> up_t(m, m, n, order);
          std::vector<std::vector<Jet<Scalar>>> low_rows(c);
          std::vector<std::vector<Jet<Scalar>>> columns;
          for (std::size_t a = 0; a < m; ++a) {
            std::vector<Jet<Scalar>> col;
            for (std::size_t i = 0; i < n; ++i) {
              if (i < m) {
                col.push_back(Jet<Scalar>::constant(n, order, Scalar{i == a ? 1.0 : 0.0}));
              } else {
                col.push_back(eval_jet<Scalar>(exprs_[(i - m) * m + a], x));
              }
            }
            columns.push_back(to_working_vector<Scalar>(frame, col));
          }
          for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) up_t(a, b) = columns[b][a];  // transpose of T'_up
          }
          for (std::size_t k = 0; k < c; ++k) {
            std::vector<Jet<Scalar>> rhs;
            for (std::size_t b = 0; b < m; ++b) rhs.push_back(columns[b][m + k]);
            auto row = lu_solve(up_t, rhs);
            for (std::size_t a = 0; a < m; ++a) out(k, a) = std::move(row[a]);
          }
          break;
        }
      }
    } catch (const SingularAtPoint& e) {
      throw TransversalityFailure(std::string("foliation is not transverse to the projection: ") + e.what());
    } catch (const DivisionByNonUnit& e) {
      if (kind_ == FoliationKind::Direction) {
        throw TransversalityFailure(std::string("direction field has vanishing first component: ") + e.what());
      }
      throw;
    }
    return out;
  }

  /// Scale-free measure in [0, 1] of how transverse the leaves are to the
  /// projection onto the first n - c working coordinates at y0 (pointwise).
  double transversality(const LinearFrame& frame, const Point& y0) const {
    const std::size_t n = n_, c = codim_, m = n_ - codim_;
    if (kind_ == FoliationKind::FirstIntegrals) {
      auto x = frame.original_jets<double>(y0, 1);
      std::vector<std::vector<double>> rows;
      for (const auto& e : exprs_) {
        auto u = eval_jet<double>(e, x);
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = u[1 + i];
        rows.push_back(std::move(g));
      }
      std::vector<double> low(c * c);
      double norms = 1.0;
      for (std::size_t r = 0; r < c; ++r) {
        norms *= norm(rows[r]);
        for (std::size_t k = 0; k < c; ++k) low[r * c + k] = rows[r][m + k];
      }
      return norms == 0.0 ? 0.0 : std::abs(small_det(low, c)) / norms;
    }
    auto x = frame.original_jets<double>(y0, 0);
    std::vector<std::vector<double>> tangents;
    if (kind_ == FoliationKind::Direction) {
      std::vector<Jet<double>> raw;
      for (const auto& e : exprs_) raw.push_back(eval_jet<double>(e, x));
      auto field = to_working_vector<double>(frame, raw);
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = field[i][0];
      tangents.push_back(std::move(v));
    } else {
      for (std::size_t a = 0; a < m; ++a) {
        std::vector<Jet<double>> col;
        for (std::size_t i = 0; i < n; ++i) {
          col.push_back(i < m ? Jet<double>::constant(n, 0, i == a ? 1.0 : 0.0)
                              : eval_jet<double>(exprs_[(i - m) * m + a], x));
        }
        auto w = to_working_vector<double>(frame, col);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i][0];
        tangents.push_back(std::move(v));
      }
    }
    std::vector<double> up(m * m);
    double norms = 1.0;
    for (std::size_t a = 0; a < m; ++a) {
      norms *= norm(tangents[a]);
      for (std::size_t b = 0; b < m; ++b) up[b * m + a] = tangents[a][b];
    }
    return norms == 0.0 ? 0.0 : std::abs(small_det(up, m)) / norms;
  }

  /// max |X_a(Omega^k_b) - X_b(Omega^k_a)| at y0, with
  /// X_a = d/dy^a + sum_k Omega^k_a d/dy^k (the Frobenius condition).
  double integrability_residual(const LinearFrame& frame, const Point& y0) const {
    const std::size_t m = leaf_dimension();
    if (m < 2) return 0.0;
    auto om = slopes<double>(frame, y0, 1);
    double worst = 0.0;
    for (std::size_t k = 0; k < codim_; ++k) {
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
          const double lhs = leaf_derivative(om, a, om(k, b));
          const double rhs = leaf_derivative(om, b, om(k, a));
          worst = std::max(worst, std::abs(lhs - rhs));
        }
      }
    }
    return worst;
  }

 private:
  // Constant term of X_a(g) for an order-1 jet g.
  double leaf_derivative(const SlopeJets<double>& om, std::size_t a, const Jet<double>& g) const {
    const std::size_t m = leaf_dimension();
    double v = g[1 + a];
    for (std::size_t k = 0; k < codim_; ++k) v += om(k, a)[0] * g[1 + m + k];
    return v;
  }

  // A^{-1} v for a vector field expressed in original coordinates.
  template <JetScalar Scalar>
  static std::vector<Jet<Scalar>> to_working_vector(const LinearFrame& frame, const std::vector<Jet<Scalar>>& v) {
    if (frame.is_identity()) return v;
    const std::size_t n = v.size();
    std::vector<Jet<Scalar>> out;
    for (std::size_t i = 0; i < n; ++i) {
      Jet<Scalar> acc(v[0].nvars(), v[0].order());
      for (std::size_t j = 0; j < n; ++j) acc += v[j] * Scalar{frame.inverse(i, j)};
      out.push_back(std::move(acc));
    }
    return out;
  }

  static double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }

 public:
  /// Determinant of a small dense row-major matrix (partial pivoting).
  static double small_det(std::vector<double> a, std::size_t n) {
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      for (std::size_t r = k + 1; r < n; ++r) {
        if (std::abs(a[r * n + k]) > std::abs(a[p * n + k])) p = r;
      }
      if (a[p * n + k] == 0.0) return 0.0;
      if (p != k) {
        for (std::size_t c = 0; c < n; ++c) std::swap(a[p * n + c], a[k * n + c]);
        det = -det;
      }
      det *= a[k * n + k];
      for (std::size_t r = k + 1; r < n; ++r) {
        const double f = a[r * n + k] / a[k * n + k];
        for (std::size_t c = k; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
      }
    }
    return det;
  }

 private:
  FoliationKind kind_;
  std::size_t n_, codim_;
  std::vector<ScalarField> exprs_;
};

inline Foliation foliation_from_first_integrals(std::vector<ScalarField> u, std::size_t n) {
  const std::size_t c = u.size();
  return Foliation(FoliationKind::FirstIntegrals, n, c, std::move(u));
}

inline Foliation foliation_from_direction(std::vector<ScalarField> x, std::size_t n) {
  return Foliation(FoliationKind::Direction, n, n - 1, std::move(x));
}

/// Raw slopes Omega^k_a, row-major over (k, a).
inline Foliation foliation_from_slopes(std::vector<ScalarField> omega, std::size_t n, std::size_t codim) {
  return Foliation(FoliationKind::Slopes, n, codim, std::move(omega));
}

/// An ordered family of foliations on a domain of dimension n.
class Web {
 public:
  Web(std::size_t n, std::vector<Foliation> foliations, std::string label = {})
      : n_(n), foliations_(std::move(foliations)), label_(std::move(label)) {
    if (foliations_.empty()) throw InputError("a web needs at least one foliation");
    for (const auto& f : foliations_) {
      if (f.dimension() != n_) throw InputError("foliation dimension differs from the web dimension");
    }
  }

  std::size_t dimension() const noexcept { return n_; }
  std::size_t size() const noexcept { return foliations_.size(); }
  const Foliation& operator[](std::size_t i) const { return foliations_[i]; }
  const std::vector<Foliation>& foliations() const noexcept { return foliations_; }
  const std::string& label() const noexcept { return label_; }

  bool all_codim(std::size_t c) const {
    return std::all_of(foliations_.begin(), foliations_.end(), [c](const Foliation& f) { return f.codim() == c; });
  }

  /// The sub-web made of the listed foliations, in that order.
  Web subweb(const std::vector<std::size_t>& indices) const {
    std::vector<Foliation> fs;
    for (auto i : indices) fs.push_back(foliations_.at(i));
    return Web(n_, std::move(fs), label_);
  }

 private:
  std::size_t n_;
  std::vector<Foliation> foliations_;
  std::string label_;
};

struct GeneralPositionResult {
  bool pass = true;
  /// "distinct", "normal_wedge", "direction_wedge" or "pairing".
  std::string kind;
  /// Zero-based foliation indices of the first violating subset.
  std::vector<std::size_t> witness;
  double measure = 1.0;
  std::string description;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Orthonormal basis of the span of the given vectors (Gram-Schmidt).
inline std::vector<std::vector<double>> orthonormalize(std::vector<std::vector<double>> v) {
  std::vector<std::vector<double>> out;
  for (auto& x : v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) {
        const double d = dot(x, q);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= d * q[i];
      }
    }
    const double nn = std::sqrt(dot(x, x));
    if (nn > 0.0) {
      for (auto& e : x) e /= nn;
      out.push_back(std::move(x));
    }
  }
  return out;
}

/// Pointwise tangent basis columns [e_a + sum_k Omega^k_a e_k] of a foliation.
inline std::vector<std::vector<double>> tangent_basis(const SlopeJets<double>& om, std::size_t n) {
  const std::size_t c = om.rows(), m = om.cols();
  std::vector<std::vector<double>> t;
  for (std::size_t a = 0; a < m; ++a) {
    std::vector<double> v(n, 0.0);
    v[a] = 1.0;
    for (std::size_t k = 0; k < c; ++k) v[m + k] = om(k, a)[0];
    t.push_back(std::move(v));
  }
  return t;
}

/// Pointwise annihilator rows [Omega^k | -e_k] of a foliation.
inline std::vector<std::vector<double>> normal_basis(const SlopeJets<double>& om, std::size_t n) {
  const std::size_t c = om.rows(), m = om.cols();
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<double> v(n, 0.0);
    for (std::size_t a = 0; a < m; ++a) v[a] = om(k, a)[0];
    v[m + k] = -1.0;
    rows.push_back(std::move(v));
  }
  return rows;
}

inline double normalized_det(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> a;
  double norms = 1.0;
  for (const auto& r : rows) {
    a.insert(a.end(), r.begin(), r.end());
    norms *= std::sqrt(dot(r, r));
  }
  return std::abs(Foliation::small_det(a, n)) / norms;
}

/// Visits every k-subset of {0..d-1} in lexicographic order until f returns false.
template <typename F>
bool for_each_subset(std::size_t d, std::size_t k, F&& f) {
  if (k > d) return true;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (;;) {
    if (!f(idx)) return false;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == d - k + i - 1) --i;
    if (i == 0) return true;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline std::string one_based(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i] + 1);
  return s;
}

}  // namespace detail

/// Nondegeneracy test at working point y0.
///
/// Always: no two foliations of equal codimension share a tangent space.
/// Codimension-1 webs: every n normals are independent. Mixed webs in
/// dimension 3: hypersurface normals independent by triples, curve directions
/// independent by triples, and every pairing omega_i(X_j) nonzero.
inline GeneralPositionResult general_position_check(const Web& w, const LinearFrame& frame, const Point& y0,
                                                    double tol = 1e-7) {
  const std::size_t n = w.dimension();
  std::vector<SlopeJets<double>> slopes;
  for (const auto& f : w.foliations()) slopes.push_back(f.slopes<double>(frame, y0, 0));

  GeneralPositionResult res;
  auto fail = [&](std::string kind, std::vector<std::size_t> witness, double measure, std::string desc) {
    res.pass = false;
    res.kind = std::move(kind);
    res.witness = std::move(witness);
    res.measure = measure;
    res.description = std::move(desc);
  };

  for (std::size_t i = 0; i < w.size() && res.pass; ++i) {
    for (std::size_t j = i + 1; j < w.size() && res.pass; ++j) {
      if (w[i].codim() != w[j].codim()) continue;
      auto basis = detail::orthonormalize(detail::tangent_basis(slopes[i], n));
      double worst = 0.0;
      for (auto t : detail::tangent_basis(slopes[j], n)) {
        const double len = std::sqrt(detail::dot(t, t));
        for (const auto& q : basis) {
          const double d = detail::dot(t, q);
          for (std::size_t s = 0; s < n; ++s) t[s] -= d * q[s];
        }
        worst = std::max(worst, std::sqrt(detail::dot(t, t)) / len);
      }
      if (worst < tol) {
        fail("distinct", {i, j}, worst,
             "foliations " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " coincide");
      }
    }
  }
  if (!res.pass) return res;

  std::vector<std::size_t> hyper, curves;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i].codim() == 1) hyper.push_back(i);
    if (w[i].codim() == n - 1) curves.push_back(i);
  }

  auto wedge_check = [&](const std::vector<std::size_t>& members, bool normals, const char* kind) {
    detail::for_each_subset(members.size(), n, [&](const std::vector<std::size_t>& sub) {
      std::vector<std::vector<double>> rows;
      std::vector<std::size_t> witness;
      for (auto s : sub) {
        const auto i = members[s];
        witness.push_back(i);
        auto b = normals ? detail::normal_basis(slopes[i], n) : detail::tangent_basis(slopes[i], n);
        rows.push_back(b.front());
      }
      const double m = detail::normalized_det(rows);
      if (m < tol) {
        fail(kind, witness, m, std::string(kind) + " of foliations {" + detail::one_based(witness) + "} vanishes");
        return false;
      }
      return true;
    });
  };

  if (w.all_codim(1)) {
    wedge_check(hyper, true, "normal_wedge");
    return res;
  }
  if (n == 3 && !hyper.empty() && !curves.empty() && hyper.size() + curves.size() == w.size()) {
    wedge_check(hyper, true, "normal_wedge");
    if (!res.pass) return res;
    wedge_check(curves, false, "direction_wedge");
    if (!res.pass) return res;
    for (std::size_t a = 0; a < hyper.size(); ++a) {
      for (std::size_t b = 0; b < curves.size(); ++b) {
        const auto om = detail::normal_basis(slopes[hyper[a]], n).front();
        const auto x = detail::tangent_basis(slopes[curves[b]], n).front();
        const double m = std::abs(detail::dot(om, x)) / std::sqrt(detail::dot(om, om) * detail::dot(x, x));
        if (m < tol) {
          fail("pairing", {hyper[a], curves[b]}, m,
               "omega_" + std::to_string(a + 1) + "(X_" + std::to_string(b + 1) + ") vanishes");
          return res;
        }
      }
    }
  }
  return res;
}

/// phi_*(W) for a web described by first integrals: every u becomes
/// u o phi^{-1}, with phi^{-1} supplied as expressions in the new coordinates.
inline Web pushforward(const Web& w, const std::vector<ScalarField>& phi_inv) {
  if (phi_inv.size() != w.dimension()) throw InputError("inverse map needs one expression per coordinate");
  std::vector<Foliation> out;
  for (const auto& f : w.foliations()) {
    if (f.kind() != FoliationKind::FirstIntegrals) {
      throw InputError("pushforward requires foliations given by first integrals");
    }
    std::vector<ScalarField> u;
    for (const auto& e : f.expressions()) u.push_back(e.compose(phi_inv));
    out.push_back(foliation_from_first_integrals(std::move(u), w.dimension()));
  }
  return Web(w.dimension(), std::move(out), w.label());
}

/// Smallest transversality measure over all foliations and points.
inline double min_transversality(const Web& w, const LinearFrame& frame, const std::vector<Point>& working_points) {
  double worst = 1.0;
  for (const auto& y : working_points) {
    for (const auto& f : w.foliations()) worst = std::min(worst, f.transversality(frame, y));
  }
  return worst;
}

/// Transversality measure a frame must reach to be accepted without retries.
inline constexpr double kFrameMargin = 0.05;
inline constexpr int kFrameAttempts = 8;

/// Picks working coordinates in which every foliation is a graph at every
/// given point (original coordinates): the identity if it is good enough,
/// otherwise up to kFrameAttempts seeded random rotations.
inline LinearFrame choose_frame(const Web& w, const std::vector<Point>& points, std::uint64_t seed) {
  const std::size_t n = w.dimension();
  auto measure = [&](const LinearFrame& f) {
    std::vector<Point> ys;
    for (const auto& p : points) ys.push_back(f.to_working(p));
    try {
      return min_transversality(w, f, ys);
    } catch (const Error&) {
      return 0.0;
    }
  };
  auto id = LinearFrame::identity(n);
  const double id_measure = measure(id);
  if (id_measure >= kFrameMargin) return id;

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::optional<LinearFrame> best;
  double best_measure = id_measure;
  for (int attempt = 0; attempt < kFrameAttempts; ++attempt) {
    std::vector<std::vector<double>> cols(n, std::vector<double>(n));
    for (auto& c : cols) {
      for (auto& v : c) v = gauss(rng);
    }
    auto q = detail::orthonormalize(cols);
    if (q.size() != n) continue;
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a[i * n + j] = q[j][i];
    }
    LinearFrame f(std::move(a), std::vector<double>(n, 0.0));
    const double m = measure(f);
    if (m >= kFrameMargin) return f;
    if (m > best_measure) {
      best_measure = m;
      best = f;
    }
  }
  if (best && best_measure > 1e-6) return *best;
  if (id_measure > 1e-6) return id;
  throw TransversalityFailure("no working frame makes every foliation transverse at the sample points");
}

}  // namespace webgeom
