#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "webgeom/error.hpp"
#include "webgeom/multi_index.hpp"

namespace webgeom {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

/// Coefficient types a jet may carry: real or complex double precision.
template <typename S>
concept JetScalar = std::is_same_v<S, double> || std::is_same_v<S, std::complex<double>>;

/// Constant terms below this magnitude are not units of the truncated ring.
inline constexpr double kDefaultPivotTol = 1e-10;

/// Truncated multivariate Taylor expansion at a base point.
///
/// Coefficient `pos` multiplies prod_i (x_i - x0_i)^{alpha_i} where alpha is
/// `index().alpha(pos)`; coefficients are therefore derivatives divided by
/// alpha!. Storage is dense over the graded index of its (nvars, order), and
/// every binary operation requires both operands to share that shape.
template <JetScalar Scalar = double>
class Jet {
 public:
  using scalar_type = Scalar;

  Jet(std::size_t nvars, int order) : index_(&table(nvars, order)), coeffs_(index_->size(), Scalar{}) {}

  static Jet constant(std::size_t nvars, int order, Scalar value) {
    Jet j(nvars, order);
    j.coeffs_[0] = value;
    return j;
  }

  /// The coordinate x_var expanded at x0_var.
  static Jet variable(std::size_t nvars, int order, std::size_t var, Scalar x0) {
    if (var >= nvars) throw ShapeMismatch("variable index " + std::to_string(var) + " out of range");
    Jet j = constant(nvars, order, x0);
    if (order >= 1) j.coeffs_[1 + var] = Scalar{1};
    return j;
  }

  std::size_t nvars() const noexcept { return index_->nvars(); }
  int order() const noexcept { return index_->order(); }
  std::size_t size() const noexcept { return coeffs_.size(); }
  const GradedIndex& index() const noexcept { return *index_; }

  const Scalar& operator[](std::size_t pos) const { return coeffs_[pos]; }
  Scalar& operator[](std::size_t pos) { return coeffs_[pos]; }
  std::span<const Scalar> coefficients() const noexcept { return coeffs_; }

  Scalar constant_term() const { return coeffs_[0]; }

  /// Coefficient of the monomial with exponents alpha (zero above the order).
  Scalar coeff(std::span<const int> alpha) const {
    auto pos = index_->position(alpha);
    return pos == GradedIndex::npos ? Scalar{} : coeffs_[pos];
  }
  Scalar coeff(std::initializer_list<int> alpha) const {
    return coeff(std::span<const int>(alpha.begin(), alpha.size()));
  }

  bool same_shape(const Jet& other) const noexcept { return index_ == other.index_; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, static_cast<double>(std::abs(c)));
    return m;
  }

  bool is_constant() const {
    return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](const Scalar& c) { return c == Scalar{}; });
  }

  /// Drops every term of degree above `new_order` (new_order <= order).
  Jet truncated(int new_order) const {
    if (new_order > order()) throw ShapeMismatch("cannot raise jet order by truncation");
    if (new_order == order()) return *this;
    Jet r(nvars(), new_order);
    std::copy_n(coeffs_.begin(), r.size(), r.coeffs_.begin());
    return r;
  }

  /// Formal derivative in direction `var`; the result has order - 1.
  Jet partial(std::size_t var) const {
    if (order() == 0) throw OrderExhausted("partial derivative of an order-0 jet");
    if (var >= nvars()) throw ShapeMismatch("variable index " + std::to_string(var) + " out of range");
    Jet r(nvars(), order() - 1);
    for (std::size_t p = 0; p < r.size(); ++p) {
      const int e = index_->alpha(p)[var];
      r.coeffs_[p] = static_cast<double>(e + 1) * coeffs_[index_->raise(p, var)];
    }
    return r;
  }

  Jet operator-() const {
    Jet r = *this;
    for (auto& c : r.coeffs_) c = -c;
    return r;
  }

  Jet& operator+=(const Jet& b) {
    check(b);
    for (std::size_t p = 0; p < size(); ++p) coeffs_[p] += b.coeffs_[p];
    return *this;
  }
  Jet& operator-=(const Jet& b) {
    check(b);
    for (std::size_t p = 0; p < size(); ++p) coeffs_[p] -= b.coeffs_[p];
    return *this;
  }
  Jet& operator*=(const Jet& b) { return *this = *this * b; }
  Jet& operator/=(const Jet& b) { return *this = divide(*this, b); }

  Jet& operator+=(Scalar s) {
    coeffs_[0] += s;
    return *this;
  }
  Jet& operator-=(Scalar s) {
    coeffs_[0] -= s;
    return *this;
  }
  Jet& operator*=(Scalar s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, Scalar s) { return a += s; }
  friend Jet operator+(Scalar s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, Scalar s) { return a -= s; }
  friend Jet operator-(Scalar s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, Scalar s) { return a *= s; }
  friend Jet operator*(Scalar s, Jet a) { return a *= s; }
  friend Jet operator/(const Jet& a, const Jet& b) { return divide(a, b); }
  friend Jet operator/(Jet a, Scalar s) { return a *= (Scalar{1} / s); }
  friend Jet operator/(Scalar s, const Jet& b) { return divide(constant(b.nvars(), b.order(), s), b); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check(b);
    Jet r(a.nvars(), a.order());
    const auto& idx = *a.index_;
    for (std::size_t g = 0; g < r.size(); ++g) {
      Scalar acc{};
      for (auto [i, j] : idx.factorizations(g)) acc += a.coeffs_[i] * b.coeffs_[j];
      r.coeffs_[g] = acc;
    }
    return r;
  }

  /// a / b in the truncated ring. b must be a unit: |b_0| >= pivot_tol.
  friend Jet divide(const Jet& a, const Jet& b, double pivot_tol = kDefaultPivotTol) {
    a.check(b);
    const Scalar b0 = b.coeffs_[0];
    if (!(std::abs(b0) >= pivot_tol)) {
      throw DivisionByNonUnit("division by a jet with constant term of magnitude " +
                              std::to_string(static_cast<double>(std::abs(b0))));
    }
    Jet r(a.nvars(), a.order());
    const auto& idx = *a.index_;
    for (std::size_t g = 0; g < r.size(); ++g) {
      Scalar acc = a.coeffs_[g];
      for (auto [i, j] : idx.factorizations(g)) {
        if (i != 0) acc -= b.coeffs_[i] * r.coeffs_[j];
      }
      r.coeffs_[g] = acc / b0;
    }
    return r;
  }

 private:
  static const GradedIndex& table(std::size_t nvars, int order) {
    if (nvars == 0) throw ShapeMismatch("a jet needs at least one variable");
    if (order < 0) throw ShapeMismatch("negative jet order");
    return GradedIndex::get(nvars, order);
  }

  void check(const Jet& b) const {
    if (index_ != b.index_) {
      throw ShapeMismatch("jet shapes differ: (" + std::to_string(nvars()) + "," + std::to_string(order()) +
                          ") vs (" + std::to_string(b.nvars()) + "," + std::to_string(b.order()) + ")");
    }
  }

  const GradedIndex* index_;
  std::vector<Scalar> coeffs_;
};

/// Variable jets (x0_i + dx_i) for every coordinate of x0.
template <JetScalar Scalar = double>
std::vector<Jet<Scalar>> seed_point(std::span<const Scalar> x0, int order) {
  std::vector<Jet<Scalar>> out;
  out.reserve(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out.push_back(Jet<Scalar>::variable(x0.size(), order, i, x0[i]));
  return out;
}

template <JetScalar Scalar>
std::vector<Jet<Scalar>> seed_point(const std::vector<Scalar>& x0, int order) {
  return seed_point<Scalar>(std::span<const Scalar>(x0), order);
}

namespace detail {

/// sum_k c[k] * h^k, with h the non-constant part of a.
template <JetScalar Scalar>
Jet<Scalar> compose_series(const Jet<Scalar>& a, const std::vector<Scalar>& c) {
  Jet<Scalar> h = a;
  h[0] = Scalar{};
  Jet<Scalar> r = Jet<Scalar>::constant(a.nvars(), a.order(), c.back());
  for (std::size_t k = c.size() - 1; k-- > 0;) {
    r = r * h;
    r[0] += c[k];
  }
  return r;
}

}  // namespace detail

template <JetScalar Scalar>
Jet<Scalar> exp(const Jet<Scalar>& a) {
  const Scalar e0 = std::exp(a[0]);
  std::vector<Scalar> c(static_cast<std::size_t>(a.order()) + 1);
  double fact = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    c[k] = e0 / fact;
  }
  return detail::compose_series(a, c);
}

template <JetScalar Scalar>
Jet<Scalar> log(const Jet<Scalar>& a) {
  const Scalar a0 = a[0];
  if constexpr (is_complex<Scalar>::value) {
    if (std::abs(a0) == 0.0) throw DomainError("log of a jet with zero constant term");
  } else {
    if (!(a0 > 0.0)) throw DomainError("log of a jet with non-positive constant term " + std::to_string(a0));
  }
  std::vector<Scalar> c(static_cast<std::size_t>(a.order()) + 1);
  c[0] = std::log(a0);
  Scalar power = Scalar{1};
  for (std::size_t k = 1; k < c.size(); ++k) {
    power *= a0;
    c[k] = (k % 2 == 1 ? 1.0 : -1.0) / (static_cast<double>(k) * power);
  }
  return detail::compose_series(a, c);
}

template <JetScalar Scalar>
Jet<Scalar> sin(const Jet<Scalar>& a) {
  const Scalar s = std::sin(a[0]), co = std::cos(a[0]);
  const Scalar cycle[4] = {s, co, -s, -co};
  std::vector<Scalar> c(static_cast<std::size_t>(a.order()) + 1);
  double fact = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    c[k] = cycle[k % 4] / fact;
  }
  return detail::compose_series(a, c);
}

template <JetScalar Scalar>
Jet<Scalar> cos(const Jet<Scalar>& a) {
  const Scalar s = std::sin(a[0]), co = std::cos(a[0]);
  const Scalar cycle[4] = {co, -s, -co, s};
  std::vector<Scalar> c(static_cast<std::size_t>(a.order()) + 1);
  double fact = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    c[k] = cycle[k % 4] / fact;
  }
  return detail::compose_series(a, c);
}

/// a^n for an integer n by repeated squaring; negative n goes through 1/a.
template <JetScalar Scalar>
Jet<Scalar> ipow(const Jet<Scalar>& a, long n) {
  if (n < 0) return ipow(Scalar{1} / a, -n);
  Jet<Scalar> result = Jet<Scalar>::constant(a.nvars(), a.order(), Scalar{1});
  Jet<Scalar> base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

/// a^r for a real exponent. Integral r expands by multiplication; otherwise
/// the constant term must be positive (real) or nonzero (complex).
template <JetScalar Scalar>
Jet<Scalar> pow(const Jet<Scalar>& a, double r) {
  if (std::isfinite(r) && r == std::floor(r) && std::abs(r) <= 1024.0) return ipow(a, static_cast<long>(r));
  const Scalar a0 = a[0];
  if constexpr (is_complex<Scalar>::value) {
    if (std::abs(a0) == 0.0) throw DomainError("non-integer power of a jet with zero constant term");
  } else {
    if (!(a0 > 0.0)) {
      throw DomainError("non-integer power of a jet with non-positive constant term " + std::to_string(a0));
    }
  }
  std::vector<Scalar> c(static_cast<std::size_t>(a.order()) + 1);
  double binom = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k > 0) binom *= (r - static_cast<double>(k - 1)) / static_cast<double>(k);
    c[k] = binom * std::pow(a0, r - static_cast<double>(k));
  }
  return detail::compose_series(a, c);
}

template <JetScalar Scalar>
Jet<Scalar> sqrt(const Jet<Scalar>& a) {
  return pow(a, 0.5);
}

}  // namespace webgeom
