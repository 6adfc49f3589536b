#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "webgeom/error.hpp"
#include "webgeom/jet.hpp"

namespace webgeom {

/// Dense row-major matrix of jets sharing one (nvars, order).
template <JetScalar Scalar = double>
class JetMatrix {
 public:
  using jet_type = Jet<Scalar>;

  JetMatrix(std::size_t rows, std::size_t cols, std::size_t nvars, int order)
      : rows_(rows), cols_(cols), entries_(rows * cols, jet_type(nvars, order)) {
    if (rows * cols == 0) throw ShapeMismatch("empty jet matrix");
  }

  static JetMatrix identity(std::size_t n, std::size_t nvars, int order) {
    JetMatrix m(n, n, nvars, order);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = jet_type::constant(nvars, order, Scalar{1});
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nvars() const { return entries_.front().nvars(); }
  int order() const { return entries_.front().order(); }

  jet_type& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const jet_type& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  /// Replaces row r; every entry must have the matrix's shape.
  void set_row(std::size_t r, const std::vector<jet_type>& values) {
    if (values.size() != cols_) throw ShapeMismatch("row length mismatch");
    for (std::size_t c = 0; c < cols_; ++c) {
      if (!values[c].same_shape(entries_.front())) throw ShapeMismatch("row entry shape mismatch");
      (*this)(r, c) = values[c];
    }
  }

  /// Magnitude of the largest constant term.
  double constant_scale() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, static_cast<double>(std::abs(e[0])));
    return m;
  }

  friend JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
    if (a.cols_ != b.rows_) throw ShapeMismatch("matrix product dimension mismatch");
    JetMatrix r(a.rows_, b.cols_, a.nvars(), a.order());
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t j = 0; j < b.cols_; ++j) {
        jet_type acc(a.nvars(), a.order());
        for (std::size_t k = 0; k < a.cols_; ++k) acc += a(i, k) * b(k, j);
        r(i, j) = std::move(acc);
      }
    }
    return r;
  }

  std::vector<jet_type> apply(const std::vector<jet_type>& x) const {
    if (x.size() != cols_) throw ShapeMismatch("matrix-vector dimension mismatch");
    std::vector<jet_type> out;
    out.reserve(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      jet_type acc(nvars(), order());
      for (std::size_t k = 0; k < cols_; ++k) acc += (*this)(i, k) * x[k];
      out.push_back(std::move(acc));
    }
    return out;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<jet_type> entries_;
};

namespace detail {

/// Gaussian elimination over the jet ring with partial pivoting on the
/// magnitude of constant terms. `rhs` is eliminated alongside. On return the
/// leading cols x cols block of the row-permuted matrix is upper triangular.
template <JetScalar Scalar>
struct Elimination {
  JetMatrix<Scalar> a;
  std::vector<Jet<Scalar>> rhs;
  std::vector<std::size_t> row_of;  // row_of[i] = original row now at position i
  int sign = 1;

  Elimination(JetMatrix<Scalar> m, std::vector<Jet<Scalar>> b) : a(std::move(m)), rhs(std::move(b)) {
    row_of.resize(a.rows());
    std::iota(row_of.begin(), row_of.end(), std::size_t{0});
  }

  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t c = 0; c < a.cols(); ++c) std::swap(a(i, c), a(j, c));
    if (!rhs.empty()) std::swap(rhs[i], rhs[j]);
    std::swap(row_of[i], row_of[j]);
    sign = -sign;
  }

  /// Eliminates column k below the diagonal. Returns false (leaving the
  /// matrix untouched) if no remaining row has a unit in column k.
  bool step(std::size_t k, double pivot_tol, double* best_out = nullptr) {
    std::size_t best = k;
    double best_mag = -1.0;
    for (std::size_t r = k; r < a.rows(); ++r) {
      const double mag = std::abs(a(r, k)[0]);
      if (mag > best_mag) {
        best_mag = mag;
        best = r;
      }
    }
    if (best_out) *best_out = best_mag;
    if (!(best_mag >= pivot_tol)) return false;
    swap_rows(k, best);
    const auto& pivot = a(k, k);
    for (std::size_t r = k + 1; r < a.rows(); ++r) {
      if (a(r, k).max_abs() == 0.0) continue;
      const Jet<Scalar> factor = divide(a(r, k), pivot, pivot_tol);
      for (std::size_t c = k; c < a.cols(); ++c) a(r, c) -= factor * a(k, c);
      if (!rhs.empty()) rhs[r] -= factor * rhs[k];
    }
    return true;
  }

  std::vector<Jet<Scalar>> back_substitute(double pivot_tol) const {
    const std::size_t n = a.cols();
    std::vector<Jet<Scalar>> x(n, Jet<Scalar>(a.nvars(), a.order()));
    for (std::size_t k = n; k-- > 0;) {
      Jet<Scalar> acc = rhs[k];
      for (std::size_t c = k + 1; c < n; ++c) acc -= a(k, c) * x[c];
      x[k] = divide(acc, a(k, k), pivot_tol);
    }
    return x;
  }
};

template <JetScalar Scalar>
void check_system(const JetMatrix<Scalar>& a, const std::vector<Jet<Scalar>>& b) {
  if (b.size() != a.rows()) throw ShapeMismatch("right-hand side length does not match the matrix");
  for (const auto& v : b) {
    if (!v.same_shape(a(0, 0))) throw ShapeMismatch("right-hand side jets differ in shape from the matrix");
  }
}

}  // namespace detail

/// Solves A s = b through the truncation order. Higher-order coefficients of
/// s follow from unit pivots, i.e. this differentiates the solution map.
template <JetScalar Scalar>
std::vector<Jet<Scalar>> lu_solve(const JetMatrix<Scalar>& a, const std::vector<Jet<Scalar>>& b,
                                  double pivot_tol = kDefaultPivotTol) {
  if (a.rows() != a.cols()) throw ShapeMismatch("lu_solve needs a square matrix");
  detail::check_system(a, b);
  detail::Elimination<Scalar> e(a, b);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    double best = 0.0;
    if (!e.step(k, pivot_tol, &best)) {
      throw SingularAtPoint("no unit pivot in column " + std::to_string(k) + " (best constant term " +
                            std::to_string(best) + ")");
    }
  }
  return e.back_substitute(pivot_tol);
}

template <JetScalar Scalar>
struct ConsistencyResult {
  std::vector<Jet<Scalar>> solution;
  /// b_i - A_i s for every original row; zero (to round-off) on selected rows.
  std::vector<Jet<Scalar>> residuals;
  /// Original indices of the rows that determine the solution.
  std::vector<std::size_t> selected_rows;
  /// Max constant-term magnitude of the residuals of the remaining rows.
  double residual_norm = 0.0;
};

/// Overdetermined solve: elimination picks a square subsystem by pivoting,
/// solves it, and reports how far the remaining equations are from holding.
template <JetScalar Scalar>
ConsistencyResult<Scalar> lsq_consistency(const JetMatrix<Scalar>& a, const std::vector<Jet<Scalar>>& b,
                                          double pivot_tol = kDefaultPivotTol) {
  if (a.rows() < a.cols()) throw ShapeMismatch("lsq_consistency needs rows >= cols");
  detail::check_system(a, b);
  detail::Elimination<Scalar> e(a, b);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    double best = 0.0;
    if (!e.step(k, pivot_tol, &best)) {
      throw SingularAtPoint("system is column-rank deficient at column " + std::to_string(k) +
                            " (best constant term " + std::to_string(best) + ")");
    }
  }
  ConsistencyResult<Scalar> out;
  out.solution = e.back_substitute(pivot_tol);
  out.selected_rows.assign(e.row_of.begin(), e.row_of.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  const auto image = a.apply(out.solution);
  for (std::size_t r = 0; r < a.rows(); ++r) out.residuals.push_back(b[r] - image[r]);
  for (std::size_t i = a.cols(); i < a.rows(); ++i) {
    out.residual_norm = std::max(out.residual_norm, static_cast<double>(std::abs(out.residuals[e.row_of[i]][0])));
  }
  return out;
}

/// Division-free determinant (Samuelson-Berkowitz), valid over any
/// commutative ring; O(n^4) ring operations.
template <JetScalar Scalar>
Jet<Scalar> berkowitz_determinant(const JetMatrix<Scalar>& a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("determinant needs a square matrix");
  using J = Jet<Scalar>;
  const std::size_t n = a.rows();
  const std::size_t nv = a.nvars();
  const int q = a.order();
  // Characteristic polynomial coefficients of the leading r x r block,
  // highest degree first: poly[0] = 1.
  std::vector<J> poly{J::constant(nv, q, Scalar{1}), -a(0, 0)};
  for (std::size_t r = 1; r < n; ++r) {
    // Block [[A_r, col], [row, a_rr]]; Toeplitz column is
    // (1, -a_rr, -row col, -row A col, -row A^2 col, ...).
    std::vector<J> toeplitz;
    toeplitz.push_back(J::constant(nv, q, Scalar{1}));
    toeplitz.push_back(-a(r, r));
    std::vector<J> v(r, J(nv, q));
    for (std::size_t i = 0; i < r; ++i) v[i] = a(i, r);
    for (std::size_t k = 0; k + 1 < r + 1; ++k) {
      J dot(nv, q);
      for (std::size_t i = 0; i < r; ++i) dot += a(r, i) * v[i];
      toeplitz.push_back(-dot);
      if (k + 1 == r) break;
      std::vector<J> next(r, J(nv, q));
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) next[i] += a(i, j) * v[j];
      }
      v = std::move(next);
    }
    std::vector<J> next_poly(r + 2, J(nv, q));
    for (std::size_t i = 0; i < r + 2; ++i) {
      for (std::size_t j = 0; j <= i && j < poly.size(); ++j) {
        if (i - j < toeplitz.size()) next_poly[i] += toeplitz[i - j] * poly[j];
      }
    }
    poly = std::move(next_poly);
  }
  J det = poly.back();
  if (n % 2 == 1) det = -det;
  return det;
}

/// Cofactor expansion along the first row; used for small matrices only.
template <JetScalar Scalar>
Jet<Scalar> expansion_determinant(const JetMatrix<Scalar>& a) {
  const std::size_t n = a.rows();
  if (n == 1) return a(0, 0);
  Jet<Scalar> det(a.nvars(), a.order());
  for (std::size_t c = 0; c < n; ++c) {
    JetMatrix<Scalar> minor(n - 1, n - 1, a.nvars(), a.order());
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0, jj = 0; j < n; ++j) {
        if (j != c) minor(i - 1, jj++) = a(i, j);
      }
    }
    Jet<Scalar> term = a(0, c) * expansion_determinant(minor);
    if (c % 2 == 0) {
      det += term;
    } else {
      det -= term;
    }
  }
  return det;
}

/// Determinant by elimination (product of pivots with sign). When no unit
/// pivot remains the constant term of the determinant is zero but higher
/// coefficients need not be; the remaining trailing block then goes through
/// cofactor expansion (size <= 4) or the division-free algorithm.
template <JetScalar Scalar>
Jet<Scalar> determinant(const JetMatrix<Scalar>& a, double pivot_tol = kDefaultPivotTol) {
  if (a.rows() != a.cols()) throw ShapeMismatch("determinant needs a square matrix");
  detail::Elimination<Scalar> e(a, {});
  const std::size_t n = a.rows();
  Jet<Scalar> det = Jet<Scalar>::constant(a.nvars(), a.order(), Scalar{1});
  for (std::size_t k = 0; k < n; ++k) {
    if (!e.step(k, pivot_tol)) {
      JetMatrix<Scalar> rest(n - k, n - k, a.nvars(), a.order());
      for (std::size_t i = k; i < n; ++i) {
        for (std::size_t j = k; j < n; ++j) rest(i - k, j - k) = e.a(i, j);
      }
      det = det * (rest.rows() <= 4 ? expansion_determinant(rest) : berkowitz_determinant(rest));
      return e.sign < 0 ? -det : det;
    }
    det = det * e.a(k, k);
  }
  return e.sign < 0 ? -det : det;
}

}  // namespace webgeom
