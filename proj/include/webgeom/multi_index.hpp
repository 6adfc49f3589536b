#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace webgeom {

/// Dense enumeration of the multi-indices alpha in N^nvars with |alpha| <= order,
/// ordered by total degree, then lexicographically with the first variable's
/// exponent largest. The table for order q-1 is a prefix of the table for q.
///
/// Tables are built once per (nvars, order) and shared by every jet of that
/// shape; `get` is thread-safe and the returned reference lives forever.
class GradedIndex {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  using Factor = std::pair<std::uint32_t, std::uint32_t>;

  static const GradedIndex& get(std::size_t nvars, int order) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, int>, std::unique_ptr<GradedIndex>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{nvars, order}];
    if (!slot) slot.reset(new GradedIndex(nvars, order));
    return *slot;
  }

  std::size_t nvars() const noexcept { return nvars_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return degree_.size(); }

  std::span<const int> alpha(std::size_t pos) const {
    return {exponents_.data() + pos * nvars_, nvars_};
  }
  int degree(std::size_t pos) const { return degree_[pos]; }

  /// Position of alpha, or npos when |alpha| > order or the length is wrong.
  std::size_t position(std::span<const int> alpha) const {
    if (alpha.size() != nvars_) return npos;
    auto it = lookup_.find(std::vector<int>(alpha.begin(), alpha.end()));
    return it == lookup_.end() ? npos : it->second;
  }

  /// Position of alpha(pos) + e_var, or npos if that exceeds the order.
  std::size_t raise(std::size_t pos, std::size_t var) const { return raise_[var * size() + pos]; }

  /// All (beta, gamma - beta) position pairs with beta <= gamma componentwise.
  std::span<const Factor> factorizations(std::size_t pos) const {
    return {factors_.data() + factor_start_[pos], factor_start_[pos + 1] - factor_start_[pos]};
  }

  /// Number of entries with degree <= q (q may be below or at the order).
  std::size_t prefix_size(int q) const { return q < 0 ? 0 : degree_start_[static_cast<std::size_t>(q) + 1]; }

 private:
  GradedIndex(std::size_t nvars, int order) : nvars_(nvars), order_(order) {
    std::vector<int> current(nvars, 0);
    degree_start_.push_back(0);
    for (int d = 0; d <= order; ++d) {
      enumerate(current, 0, d);
      degree_start_.push_back(degree_.size());
    }
    for (std::size_t p = 0; p < size(); ++p) {
      auto a = alpha(p);
      lookup_.emplace(std::vector<int>(a.begin(), a.end()), p);
    }

    raise_.assign(nvars * size(), npos);
    for (std::size_t v = 0; v < nvars; ++v) {
      for (std::size_t p = 0; p < size(); ++p) {
        if (degree_[p] == order) continue;
        auto a = alpha(p);
        std::vector<int> up(a.begin(), a.end());
        ++up[v];
        raise_[v * size() + p] = lookup_.at(up);
      }
    }

    factor_start_.push_back(0);
    for (std::size_t p = 0; p < size(); ++p) {
      auto g = alpha(p);
      std::vector<int> beta(nvars, 0), rest(nvars, 0);
      for (;;) {
        for (std::size_t i = 0; i < nvars; ++i) rest[i] = g[i] - beta[i];
        factors_.emplace_back(static_cast<std::uint32_t>(lookup_.at(beta)),
                              static_cast<std::uint32_t>(lookup_.at(rest)));
        std::size_t i = 0;
        while (i < nvars && beta[i] == g[i]) beta[i++] = 0;
        if (i == nvars) break;
        ++beta[i];
      }
      factor_start_.push_back(factors_.size());
    }
  }

  void enumerate(std::vector<int>& current, std::size_t var, int remaining) {
    if (nvars_ == 0) {
      if (remaining == 0) degree_.push_back(0);
      return;
    }
    if (var + 1 == nvars_) {
      current[var] = remaining;
      exponents_.insert(exponents_.end(), current.begin(), current.end());
      int total = 0;
      for (int e : current) total += e;
      degree_.push_back(total);
      current[var] = 0;
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[var] = e;
      enumerate(current, var + 1, remaining - e);
    }
    current[var] = 0;
  }

  std::size_t nvars_;
  int order_;
  std::vector<int> exponents_;
  std::vector<int> degree_;
  std::vector<std::size_t> degree_start_;
  std::map<std::vector<int>, std::size_t> lookup_;
  std::vector<std::size_t> raise_;
  std::vector<Factor> factors_;
  std::vector<std::size_t> factor_start_;
};

}  // namespace webgeom
