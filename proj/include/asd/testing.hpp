#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "asd/bootstrap.hpp"
#include "asd/dominance.hpp"

namespace asd {

enum class TestVariant { a, b, c };
enum class TestMethod { case1, case2 };

// Which sample plays the candidate-dominated role. `forward` tests the pair
// as given (sample 1 dominated by sample 2); `reverse` swaps them.
enum class TestDirection { forward, reverse };

struct TestSpec {
  TestVariant variant = TestVariant::a;
  double epsilon = 0.05;  // pre-specified violation ratio, in [0, 0.5)
  double alpha = 0.05;    // significance level
  TestMethod method = TestMethod::case1;
  OrderKind order = OrderKind::first;
  TestDirection direction = TestDirection::forward;
};

struct TestDiagnostics {
  long degenerate_replicates = 0;
  double r_n = 0.0;
  std::optional<double> a_n;  // case 2 only
  int B = 0;
};

struct TestResult {
  bool reject = false;
  double epsilon_hat0 = 0.5;  // point estimate on the tested pair
  bool epsilon_hat0_degenerate = false;
  Index2DSD index;
  std::optional<double> boot_quantile_lower;  // eps0*^(alpha) or eps0*^(alpha/2)
  std::optional<double> boot_quantile_upper;  // eps0*^(1-alpha) / eps0*^(1-alpha/2) / c_hat
  std::optional<Interval> ci;                 // variant (c) confidence interval
  std::optional<double> statistic;            // case 2: r_n * phi(theta_hat; eps)
  TestDiagnostics diagnostics;
};

inline void validate_spec(const TestSpec& spec) {
  if (!(spec.epsilon >= 0.0 && spec.epsilon < 0.5)) {
    throw std::invalid_argument("test: epsilon must be in [0, 0.5)");
  }
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
    throw std::invalid_argument("test: alpha must be in (0, 1)");
  }
  if (spec.method == TestMethod::case2 && spec.variant != TestVariant::a) {
    throw std::invalid_argument("unsupported combination: case2 supports variant a only");
  }
}

// Order-statistic confidence interval [eps0*^(alpha/2), eps0*^(1-alpha/2)].
inline Interval confidence_interval(const BootstrapDistribution& dist, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  return Interval(dist.quantile(alpha / 2.0), dist.quantile(1.0 - alpha / 2.0));
}

namespace detail {

inline TestResult run_case1(const Sample& s1, const Sample& s2, const TestSpec& spec,
                            const BootstrapConfig& cfg,
                            const BootstrapDistribution* precomputed = nullptr) {
  BootstrapDistribution local;
  const BootstrapDistribution& dist =
      precomputed ? *precomputed
                  : (local = case1_mvr_distribution(s1, s2, spec.order, cfg), local);

  TestResult res;
  const Index2DSD idx = dominance_index(s1, s2, spec.order);
  const MVREstimate est = mvr(idx);
  res.index = idx;
  res.epsilon_hat0 = est.epsilon0;
  res.epsilon_hat0_degenerate = est.degenerate;
  res.diagnostics.degenerate_replicates = dist.degenerate_count;
  res.diagnostics.r_n = RateAndBandwidth::from(s1.n(), s2.n(), cfg.case2_c).r_n;
  res.diagnostics.B = cfg.B;

  switch (spec.variant) {
    case TestVariant::a: {
      const double q = dist.quantile(1.0 - spec.alpha);
      res.boot_quantile_upper = q;
      res.reject = spec.epsilon >= q;
      break;
    }
    case TestVariant::b: {
      const double q = dist.quantile(spec.alpha);
      res.boot_quantile_lower = q;
      res.reject = spec.epsilon <= q;
      break;
    }
    case TestVariant::c: {
      const Interval ci = confidence_interval(dist, spec.alpha);
      res.ci = ci;
      res.boot_quantile_lower = ci.lo;
      res.boot_quantile_upper = ci.hi;
      res.reject = spec.epsilon < ci.lo || spec.epsilon > ci.hi;
      break;
    }
  }
  return res;
}

inline TestResult run_case2(const Sample& s1, const Sample& s2, const TestSpec& spec,
                            const BootstrapConfig& cfg,
                            const Case2Components* precomputed = nullptr) {
  Case2Components local;
  const Case2Components& comp =
      precomputed ? *precomputed : (local = case2_components(s1, s2, spec.order, cfg), local);

  TestResult res;
  res.index = comp.original_index;
  const MVREstimate est = mvr(comp.original_index);
  res.epsilon_hat0 = est.epsilon0;
  res.epsilon_hat0_degenerate = est.degenerate;
  res.diagnostics.r_n = comp.rate.r_n;
  res.diagnostics.a_n = comp.rate.a_n;
  res.diagnostics.B = cfg.B;

  BootstrapDistribution dist;
  dist.kind = StatisticKind::derivative;
  dist.values.reserve(comp.replicates.size());
  for (const Case2Replicate& r : comp.replicates) dist.values.push_back(r.value(spec.epsilon));

  const double c_hat = dist.quantile(1.0 - spec.alpha);
  const double statistic = comp.rate.r_n * phi(comp.original_index, spec.epsilon);
  res.boot_quantile_upper = c_hat;
  res.statistic = statistic;
  res.reject = statistic > c_hat;
  return res;
}

}  // namespace detail

// Runs the requested almost-dominance test. Case 1 computes the bootstrap
// MVR distribution once and applies the variant's decision rule; Case 2
// (variant a only) rejects when r_n phi(theta_hat; eps) exceeds the
// (1-alpha)-quantile of the estimated-derivative bootstrap distribution.
inline TestResult run_test(const Sample& s1, const Sample& s2, const TestSpec& spec,
                           const BootstrapConfig& cfg) {
  validate_spec(spec);
  const Sample& a = spec.direction == TestDirection::forward ? s1 : s2;
  const Sample& b = spec.direction == TestDirection::forward ? s2 : s1;
  if (spec.method == TestMethod::case1) return detail::run_case1(a, b, spec, cfg);
  return detail::run_case2(a, b, spec, cfg);
}

// Smallest epsilon for which test (a) rejects at level alpha. Case 1: the
// (1-alpha) bootstrap quantile, by the decision rule. Case 2: bisection on
// [0, 0.5) at resolution 1e-4 against the same-seed bootstrap; returns 0.5
// when no epsilon below 0.5 rejects.
inline double min_rejected_epsilon(const Sample& s1, const Sample& s2, TestSpec spec,
                                   const BootstrapConfig& cfg) {
  spec.variant = TestVariant::a;
  spec.epsilon = 0.0;
  validate_spec(spec);
  const Sample& a = spec.direction == TestDirection::forward ? s1 : s2;
  const Sample& b = spec.direction == TestDirection::forward ? s2 : s1;

  if (spec.method == TestMethod::case1) {
    const BootstrapDistribution dist = case1_mvr_distribution(a, b, spec.order, cfg);
    return dist.quantile(1.0 - spec.alpha);
  }

  const Case2Components comp = case2_components(a, b, spec.order, cfg);
  auto rejects = [&](double eps) {
    TestSpec probe = spec;
    probe.epsilon = eps;
    return detail::run_case2(a, b, probe, cfg, &comp).reject;
  };

  // The decision is assumed monotone in epsilon; verify on three probes.
  constexpr double kHi = 0.5 - 1e-9;
  const bool r_lo = rejects(0.0), r_mid = rejects(0.25), r_hi = rejects(kHi);
  if ((r_lo && !r_mid) || (r_lo && !r_hi) || (r_mid && !r_hi)) {
    throw std::runtime_error("min_rejected_epsilon: decision not monotone in epsilon");
  }
  if (r_lo) return 0.0;
  if (!r_hi) return 0.5;

  double lo = 0.0, hi = r_mid ? 0.25 : kHi;
  if (r_mid) {
    lo = 0.0;
    hi = 0.25;
  } else {
    lo = 0.25;
    hi = kHi;
  }
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (rejects(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace asd
