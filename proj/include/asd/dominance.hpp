#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "asd/empirical.hpp"
#include "asd/numeric.hpp"
#include "asd/piecewise.hpp"

namespace asd {

// The pair (int(s1-s2), int|s1-s2|); always inside the triangle |x| <= y.
struct Index2DSD {
  double signed_part = 0.0;
  double abs_part = 0.0;
  OrderKind order = OrderKind::first;
  Interval domain;
};

struct MVREstimate {
  double epsilon0 = 0.5;
  bool degenerate = false;  // set when the L1 distance is zero
};

enum class Region { on_L1, on_L2, in_R1_eps, in_R2_eps, interior };

struct Classification {
  Region region = Region::interior;
  double epsilon_used = 0.0;
};

struct TailDiagnostics {
  std::array<double, 2> lambda21{};  // plug-in sqrt-survival tail integral, per sample
  std::array<double, 2> lambda42{};  // plug-in x*sqrt-survival tail integral, per sample
  double tail_constant = 0.0;        // mean2 - mean1
  bool truncation_warning = false;   // relevant for second/stop-loss truncation
};

namespace detail {

// Integration domain convention per order: the pooled sample range for the
// real-line orders (the first-order difference vanishes outside it; the
// integrated orders use the bounded-interval convention), [0,1] for Lorenz.
inline Interval integration_domain(const Sample& s1, const Sample& s2, OrderKind order) {
  if (order == OrderKind::lorenz) return Interval(0.0, 1.0);
  const double lo = std::min(s1.min(), s2.min());
  const double hi = std::max(s1.max(), s2.max());
  return Interval(lo, hi);
}

struct TargetPair {
  EmpiricalTargets t1;
  EmpiricalTargets t2;
  Interval domain;
};

inline TargetPair build_target_pair(const Sample& s1, const Sample& s2, OrderKind order) {
  const Interval dom = integration_domain(s1, s2, order);
  if (order == OrderKind::lorenz || order == OrderKind::first) {
    return {make_targets(s1, order), make_targets(s2, order), dom};
  }
  return {make_targets(s1, order, dom), make_targets(s2, order, dom), dom};
}

}  // namespace detail

// Plug-in 2DSD index of the ordered pair (sample1, sample2) for the given
// stochastic order.
inline Index2DSD dominance_index(const Sample& s1, const Sample& s2, OrderKind order) {
  const detail::TargetPair tp = detail::build_target_pair(s1, s2, order);
  const PiecewiseFunction diff = subtract(tp.t1.s_hat, tp.t2.s_hat);
  const SignedAbsIntegrals ints = integrate(diff, tp.domain);
  return {ints.signed_part, ints.absolute, order, tp.domain};
}

// Difference process theta_hat = s1_hat - s2_hat together with its domain.
inline std::pair<PiecewiseFunction, Interval> target_difference(const Sample& s1,
                                                                const Sample& s2,
                                                                OrderKind order) {
  const detail::TargetPair tp = detail::build_target_pair(s1, s2, order);
  return {subtract(tp.t1.s_hat, tp.t2.s_hat), tp.domain};
}

// Minimum violation ratio from the index; degenerate (reported as 0.5) when
// the target functions coincide.
inline MVREstimate mvr(const Index2DSD& idx) {
  if (idx.abs_part <= 0.0) return {0.5, true};
  double e = 0.5 * (1.0 - idx.signed_part / idx.abs_part);
  e = std::min(1.0, std::max(0.0, e));
  return {e, false};
}

// Region of the triangle the index lies in, for a violation ratio epsilon in
// [0, 1/2). The frontier rays L1/L2 characterize strict dominance; the cones
// R_{1,eps}/R_{2,eps} characterize eps-almost dominance.
inline Classification classify(const Index2DSD& idx, double epsilon, double tol) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("classify: epsilon must be in [0, 0.5)");
  }
  const double x = idx.signed_part, y = idx.abs_part;
  if (std::abs(y - x) <= tol) return {Region::on_L1, epsilon};
  if (std::abs(y + x) <= tol) return {Region::on_L2, epsilon};
  const double c = 1.0 - 2.0 * epsilon;
  if (x > 0.0 && y <= x / c + tol) return {Region::in_R1_eps, epsilon};
  if (x < 0.0 && y <= -x / c + tol) return {Region::in_R2_eps, epsilon};
  return {Region::interior, epsilon};
}

// phi(h) = int h - (1-2 eps)||h|| evaluated on an index; nonnegative exactly
// when eps-almost dominance holds.
inline double phi(const Index2DSD& idx, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("phi: epsilon must be in [0, 0.5)");
  }
  return idx.signed_part - (1.0 - 2.0 * epsilon) * idx.abs_part;
}

// Estimated directional derivative of phi at theta_hat applied to h:
//   int h - (1-2 eps) * ( int_{|theta|<=a_n} |h| + int_{|theta|>a_n} h sgn(theta) ).
inline double phi_hat_derivative(const PiecewiseFunction& h, const PiecewiseFunction& theta_hat,
                                 double epsilon, double a_n, const Interval& domain) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("phi_hat_derivative: epsilon must be in [0, 0.5)");
  }
  const RestrictedIntegrals r = restricted_integrals(h, theta_hat, a_n, domain);
  const double int_h = integrate(h, domain).signed_part;
  return int_h - (1.0 - 2.0 * epsilon) * (r.abs_on_contact + r.signed_off_contact);
}

namespace detail {

// Plug-in tail integrals of sqrt(P(|X|>x)) and x*sqrt(P(|X|>x)) computed
// exactly on the step survival function of |X|.
inline std::pair<double, double> tail_integrals(const Sample& s) {
  std::vector<double> a(s.sorted().size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(s.sorted()[i]);
  std::sort(a.begin(), a.end());
  auto [u, c] = unique_with_cumcounts(a);
  const double n = static_cast<double>(a.size());
  CompensatedSum l21, l42;
  double prev = 0.0;
  double surv = 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > prev) {
      const double root = std::sqrt(surv);
      l21.add(root * (u[i] - prev));
      l42.add(root * 0.5 * (u[i] * u[i] - prev * prev));
      prev = u[i];
    }
    surv = 1.0 - static_cast<double>(c[i]) / n;
  }
  return {l21.value(), l42.value()};
}

}  // namespace detail

// Integrability diagnostics behind the tail assumptions, plus the constant
// the truncated integrated orders lose when the means differ.
inline TailDiagnostics tail_diagnostics(const Sample& s1, const Sample& s2) {
  TailDiagnostics d;
  auto [a21, a42] = detail::tail_integrals(s1);
  auto [b21, b42] = detail::tail_integrals(s2);
  d.lambda21 = {a21, b21};
  d.lambda42 = {a42, b42};
  d.tail_constant = s2.mean() - s1.mean();
  if (s1.nonnegative() && s2.nonnegative()) {
    const Index2DSD idx = dominance_index(s1, s2, OrderKind::second);
    if (idx.abs_part > 0.0 && std::abs(d.tail_constant) / idx.abs_part > 0.01) {
      d.truncation_warning = true;
    }
  }
  return d;
}

}  // namespace asd
