#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "asd/numeric.hpp"
#include "asd/piecewise.hpp"

namespace asd {

enum class OrderKind { first, second, stop_loss, lorenz };

inline const char* order_name(OrderKind k) {
  switch (k) {
    case OrderKind::first: return "first";
    case OrderKind::second: return "second";
    case OrderKind::stop_loss: return "stoploss";
    case OrderKind::lorenz: return "lorenz";
  }
  return "?";
}

// An observed sample. Values are kept in input order; a sorted copy and the
// compensated mean are cached at construction.
class Sample {
 public:
  explicit Sample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("empty sample");
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("sample contains non-finite value");
    }
    sorted_ = values_;
    std::sort(sorted_.begin(), sorted_.end());
    CompensatedSum s;
    for (double v : sorted_) s.add(v);
    mean_ = s.value() / static_cast<double>(sorted_.size());
  }

  std::size_t n() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& sorted() const { return sorted_; }
  double mean() const { return mean_; }
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }
  bool nonnegative() const { return sorted_.front() >= 0.0; }

 private:
  std::vector<double> values_;
  std::vector<double> sorted_;
  double mean_ = 0.0;
};

struct EmpiricalTargets {
  OrderKind order;
  PiecewiseFunction s_hat;
  double mean;
  Interval domain_hint;  // where the function is nontrivial
};

namespace detail {

// (unique sorted values, cumulative counts) -- ties absorbed into jumps.
inline std::pair<std::vector<double>, std::vector<std::size_t>> unique_with_cumcounts(
    const std::vector<double>& sorted) {
  std::vector<double> u;
  std::vector<std::size_t> c;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    u.push_back(sorted[i]);
    c.push_back(j);
    i = j;
  }
  return {std::move(u), std::move(c)};
}

}  // namespace detail

// Empirical distribution function: step with jumps k/n at the order
// statistics, right-continuous, tails 0 and 1.
inline EmpiricalTargets ecdf(const Sample& sample) {
  auto [u, c] = detail::unique_with_cumcounts(sample.sorted());
  const double n = static_cast<double>(sample.n());
  std::vector<double> vals;
  vals.reserve(u.size() > 0 ? u.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    vals.push_back(static_cast<double>(c[i]) / n);
  }
  PiecewiseFunction f = PiecewiseFunction::step(BreakpointGrid(u), std::move(vals), 0.0, 1.0);
  return {OrderKind::first, std::move(f), sample.mean(), Interval(sample.min(), sample.max())};
}

// Integrated empirical CDF t -> int_{-inf}^t F_hat. Zero at (and left of) the
// sample minimum; slope c_k/n between consecutive order statistics. The grid
// is extended to cover `cover` when given (slope 1 beyond the maximum).
inline EmpiricalTargets integrated_cdf(const Sample& sample,
                                       std::optional<Interval> cover = std::nullopt) {
  if (!sample.nonnegative()) throw std::invalid_argument("integrated_cdf: negative values");
  auto [u, c] = detail::unique_with_cumcounts(sample.sorted());
  const double n = static_cast<double>(sample.n());
  std::vector<double> knots = u;
  std::vector<double> vals(u.size());
  vals[0] = 0.0;
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    acc.add((static_cast<double>(c[i]) / n) * (u[i + 1] - u[i]));
    vals[i + 1] = acc.value();
  }
  if (cover && cover->hi > knots.back()) {
    acc.add(cover->hi - knots.back());  // slope 1 beyond the maximum
    knots.push_back(cover->hi);
    vals.push_back(acc.value());
  }
  // Left of the minimum the function is identically 0; the constant tail is
  // exact, so no left extension is ever needed.
  PiecewiseFunction f =
      PiecewiseFunction::linear(BreakpointGrid(std::move(knots)), std::move(vals), 0.0,
                                std::nullopt);
  return {OrderKind::second, std::move(f), sample.mean(), Interval(sample.min(), sample.max())};
}

// Integrated empirical survival t -> int_t^inf (1 - F_hat). Zero at (and
// right of) the sample maximum; equals mean - t left of the minimum, so the
// grid is extended down to cover.lo when given (slope -1).
inline EmpiricalTargets integrated_survival(const Sample& sample,
                                            std::optional<Interval> cover = std::nullopt) {
  if (!sample.nonnegative()) {
    throw std::invalid_argument("integrated_survival: negative values");
  }
  auto [u, c] = detail::unique_with_cumcounts(sample.sorted());
  const double n = static_cast<double>(sample.n());
  std::vector<double> vals(u.size());
  vals[u.size() - 1] = 0.0;
  CompensatedSum acc;
  for (std::size_t i = u.size() - 1; i-- > 0;) {
    acc.add((1.0 - static_cast<double>(c[i]) / n) * (u[i + 1] - u[i]));
    vals[i] = acc.value();
  }
  std::vector<double> knots = u;
  if (cover && cover->lo < knots.front()) {
    acc.add(knots.front() - cover->lo);  // slope -1 left of the minimum
    knots.insert(knots.begin(), cover->lo);
    vals.insert(vals.begin(), acc.value());
  }
  PiecewiseFunction f =
      PiecewiseFunction::linear(BreakpointGrid(std::move(knots)), std::move(vals), std::nullopt,
                                0.0);
  return {OrderKind::stop_loss, std::move(f), sample.mean(),
          Interval(sample.min(), sample.max())};
}

// Empirical Lorenz curve on [0,1]: knots at i/n, ordinates are the cumulative
// shares of the sorted sample. Convex by construction; exactly 0 and 1 at the
// endpoints.
inline EmpiricalTargets lorenz(const Sample& sample) {
  if (!sample.nonnegative()) throw std::invalid_argument("lorenz: negative values");
  if (!(sample.mean() > 0.0)) throw std::invalid_argument("lorenz: zero mean");
  const std::size_t n = sample.n();
  const double total = sample.mean() * static_cast<double>(n);
  std::vector<double> knots(n + 1), vals(n + 1);
  CompensatedSum acc;
  knots[0] = 0.0;
  vals[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc.add(sample.sorted()[i]);
    knots[i + 1] = static_cast<double>(i + 1) / static_cast<double>(n);
    vals[i + 1] = acc.value() / total;
  }
  vals[n] = 1.0;
  PiecewiseFunction f = PiecewiseFunction::linear(BreakpointGrid(std::move(knots)),
                                                  std::move(vals), std::nullopt, std::nullopt);
  return {OrderKind::lorenz, std::move(f), sample.mean(), Interval(0.0, 1.0)};
}

// Gini index 1 - 2 * int_0^1 lorenz; in [0, 1 - 1/n].
inline double gini(const Sample& sample) {
  const EmpiricalTargets t = lorenz(sample);
  return 1.0 - 2.0 * integrate(t.s_hat, Interval(0.0, 1.0)).signed_part;
}

// Target constructor dispatch for a given stochastic order.
inline EmpiricalTargets make_targets(const Sample& sample, OrderKind order,
                                     std::optional<Interval> cover = std::nullopt) {
  switch (order) {
    case OrderKind::first: return ecdf(sample);
    case OrderKind::second: return integrated_cdf(sample, cover);
    case OrderKind::stop_loss: return integrated_survival(sample, cover);
    case OrderKind::lorenz: return lorenz(sample);
  }
  throw std::invalid_argument("unknown order");
}

}  // namespace asd
