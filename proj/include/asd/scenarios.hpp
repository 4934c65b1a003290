#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "asd/bootstrap.hpp"
#include "asd/distributions.hpp"
#include "asd/dominance.hpp"
#include "asd/empirical.hpp"
#include "asd/rng.hpp"
#include "asd/testing.hpp"

namespace asd {

// Which population plays the candidate-dominated role in the tested pair.
enum class ScenarioDirection { pop1_dominated, pop2_dominated };

struct ScenarioSpec {
  std::string id;
  DistributionSpec pop1;
  DistributionSpec pop2;
  OrderKind order = OrderKind::first;
  ScenarioDirection direction = ScenarioDirection::pop1_dominated;
  std::optional<double> reference_mvr;  // literature value, when one applies
};

struct OracleResult {
  double epsilon0 = 0.5;
  double signed_part = 0.0;
  double abs_part = 0.0;
  std::vector<double> crossings;
  double truncation_bound = 0.0;  // bound on the mass ignored beyond the cut
  bool degenerate = false;
};

struct PowerCurveResult {
  std::vector<double> epsilon_grid;
  std::vector<double> rejection_rate;
  std::string scenario_id;
  OrderKind order = OrderKind::first;
  TestMethod method = TestMethod::case1;
  std::size_t n = 0;
  int N = 0;
  int B = 0;
  double alpha = 0.05;
  std::optional<double> c;  // case 2 tuning constant
  std::uint64_t seed = 0;
};

// n draws; deterministic given the stream.
inline Sample sample_from(const DistributionSpec& spec, std::size_t n, RngStream& stream) {
  if (n < 1) throw std::invalid_argument("sample_from: n must be >= 1");
  std::vector<double> v(n);
  for (double& x : v) x = dist_sample_one(spec, stream);
  return Sample(std::move(v));
}

namespace detail {

inline double gk_integrate(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-11) {
  if (!(a < b)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 14, tol);
}

// Crossing points of a continuous function on [lo, hi], located from a sign
// scan over `grid` and refined to ~1e-12. Values below `zero_tol` count as
// zero so exact-contact stretches do not generate spurious roots.
inline std::vector<double> bracket_crossings(const std::function<double(double)>& f,
                                             const std::vector<double>& grid,
                                             double zero_tol) {
  std::vector<double> roots;
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = f(grid[i]);

  int last_sign = 0;
  double last_x = grid.front();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    int s = 0;
    if (vals[i] > zero_tol) s = 1;
    else if (vals[i] < -zero_tol) s = -1;
    if (s != 0) {
      if (last_sign != 0 && s != last_sign) {
        double a = last_x, b = grid[i];
        boost::math::tools::eps_tolerance<double> tol(48);
        std::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(f, a, b, tol, iters);
        roots.push_back(0.5 * (r.first + r.second));
      }
      last_sign = s;
      last_x = grid[i];
    }
  }
  return roots;
}

struct PopulationDifference {
  // theta(t) = s1(t) - s2(t) for the tested order, plus helpers for exact
  // piecewise quadrature of theta and |theta| over [lo, hi].
  std::function<double(double)> theta;
  std::function<double(double, double)> piece_integral;  // int_a^b theta
  double lo = 0.0;
  double hi = 0.0;
};

inline PopulationDifference first_order_difference(const DistributionSpec& d1,
                                                   const DistributionSpec& d2, double lo,
                                                   double hi) {
  PopulationDifference out;
  out.lo = lo;
  out.hi = hi;
  out.theta = [&d1, &d2](double x) { return dist_cdf(d1, x) - dist_cdf(d2, x); };
  auto th = out.theta;
  out.piece_integral = [th](double a, double b) { return gk_integrate(th, a, b); };
  return out;
}

// Cumulative machinery shared by the integrated orders and Lorenz: theta is
// an antiderivative of a directly computable g, so segment integrals of theta
// reduce to single quadratures via Fubini.
struct CumulativeDifference {
  std::function<double(double)> g;
  double lo = 0.0;
  double hi = 0.0;
  // ordered cache of (t, theta(t)) anchor points
  std::vector<std::pair<double, double>> anchors;

  double theta(double t) const {
    // integrate g from the nearest cached anchor at or below t
    auto it = std::upper_bound(
        anchors.begin(), anchors.end(), t,
        [](double x, const std::pair<double, double>& a) { return x < a.first; });
    if (it == anchors.begin()) return gk_integrate(g, lo, t);
    const auto& a = *(it - 1);
    return a.second + gk_integrate(g, a.first, t);
  }

  // int_a^b theta(t) dt = (b-a) theta(a) + int_a^b g(u) (b-u) du
  double piece_integral(double a, double b) const {
    const double th_a = theta(a);
    auto f = [this, b](double u) { return g(u) * (b - u); };
    return (b - a) * th_a + gk_integrate(f, a, b);
  }
};

}  // namespace detail

// Population MVR for the ordered pair (spec1, spec2) under the given order,
// by adaptive quadrature with crossing bracketing. Unbounded supports are cut
// at the 1 - 1e-10 quantiles; the reported truncation bound caps what the cut
// can have ignored.
inline OracleResult oracle_mvr(const DistributionSpec& spec1, const DistributionSpec& spec2,
                               OrderKind order) {
  OracleResult out;

  const bool positive = dist_nonnegative(spec1) && dist_nonnegative(spec2);
  if ((order == OrderKind::second || order == OrderKind::stop_loss || order == OrderKind::lorenz) &&
      !positive) {
    throw std::invalid_argument("oracle: order requires nonnegative populations");
  }

  double lo, hi;
  std::function<double(double)> theta_fn;
  std::function<double(double, double)> piece_fn;
  double signed_total = 0.0;
  detail::CumulativeDifference cum;

  if (order == OrderKind::lorenz) {
    lo = 0.0;
    hi = 1.0;
    const double m1 = dist_mean(spec1), m2 = dist_mean(spec2);
    if (!(m1 > 0.0 && m2 > 0.0)) throw std::invalid_argument("oracle: lorenz needs positive means");
    cum.g = [&spec1, &spec2, m1, m2](double u) {
      return dist_quantile(spec1, u) / m1 - dist_quantile(spec2, u) / m2;
    };
    cum.lo = 0.0;
    cum.hi = 1.0;
    // signed = int_0^1 g(u) (1-u) du
    signed_total = detail::gk_integrate([&cum](double u) { return cum.g(u) * (1.0 - u); },
                                        0.0, 1.0);
  } else {
    lo = std::min(dist_support_lower(spec1), dist_support_lower(spec2));
    hi = std::max(dist_support_upper(spec1), dist_support_upper(spec2));
    const double m1 = dist_mean(spec1), m2 = dist_mean(spec2);
    // Everything the cut can have ignored, in integral mass.
    out.truncation_bound = (m1 - dist_partial_expectation(spec1, hi) -
                            hi * (1.0 - dist_cdf(spec1, hi))) +
                           (m2 - dist_partial_expectation(spec2, hi) -
                            hi * (1.0 - dist_cdf(spec2, hi)));
    if (order == OrderKind::first) {
      const auto pd = detail::first_order_difference(spec1, spec2, lo, hi);
      theta_fn = pd.theta;
      piece_fn = pd.piece_integral;
      signed_total = detail::gk_integrate(theta_fn, lo, hi);
    } else if (order == OrderKind::second) {
      cum.g = [&spec1, &spec2](double x) { return dist_cdf(spec1, x) - dist_cdf(spec2, x); };
      cum.lo = lo;
      cum.hi = hi;
      signed_total = detail::gk_integrate(
          [&cum, hi](double u) { return cum.g(u) * (hi - u); }, lo, hi);
    } else {  // stop_loss: theta(t) = C - H(t), H antiderivative of F2-F1
      cum.g = [&spec1, &spec2](double x) { return dist_cdf(spec2, x) - dist_cdf(spec1, x); };
      cum.lo = lo;
      cum.hi = hi;
      signed_total = detail::gk_integrate(
          [&cum, lo](double u) { return cum.g(u) * (u - lo); }, lo, hi);
    }
  }

  const bool cumulative = order != OrderKind::first;
  double stoploss_total = 0.0;
  if (cumulative) {
    // anchor cache for theta evaluations
    const int anchor_count = 257;
    double acc = 0.0;
    cum.anchors.emplace_back(cum.lo, 0.0);
    for (int i = 1; i <= anchor_count; ++i) {
      const double t_prev = cum.lo + (cum.hi - cum.lo) * (i - 1) / double(anchor_count);
      const double t_cur = cum.lo + (cum.hi - cum.lo) * i / double(anchor_count);
      acc += detail::gk_integrate(cum.g, t_prev, t_cur);
      cum.anchors.emplace_back(t_cur, acc);
    }
    stoploss_total = acc;  // = H(hi)
    if (order == OrderKind::stop_loss) {
      theta_fn = [&cum, stoploss_total](double t) { return stoploss_total - cum.theta(t); };
      piece_fn = [&cum, stoploss_total](double a, double b) {
        return stoploss_total * (b - a) - cum.piece_integral(a, b);
      };
    } else {
      theta_fn = [&cum](double t) { return cum.theta(t); };
      piece_fn = [&cum](double a, double b) { return cum.piece_integral(a, b); };
    }
  }

  // Scan grid: quantile-spaced points from both populations plus a uniform
  // fill, so crossings in low-density zones are still bracketed.
  std::vector<double> grid;
  if (order == OrderKind::lorenz) {
    for (int i = 1; i < 800; ++i) grid.push_back(i / 800.0);
  } else {
    for (int i = 1; i < 400; ++i) {
      const double u = i / 400.0;
      grid.push_back(dist_quantile(spec1, u));
      grid.push_back(dist_quantile(spec2, u));
    }
    for (int i = 0; i <= 400; ++i) grid.push_back(lo + (hi - lo) * i / 400.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    while (!grid.empty() && grid.front() < lo) grid.erase(grid.begin());
    while (!grid.empty() && grid.back() > hi) grid.pop_back();
  }

  const double zero_tol = 1e-13;
  out.crossings = detail::bracket_crossings(theta_fn, grid, zero_tol);

  // Piecewise |integral|: theta keeps one sign between consecutive crossings.
  std::vector<double> cuts{lo};
  for (double r : out.crossings) cuts.push_back(r);
  cuts.push_back(hi);
  CompensatedSum abs_acc;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    abs_acc.add(std::abs(piece_fn(cuts[i], cuts[i + 1])));
  }
  out.signed_part = signed_total;
  out.abs_part = abs_acc.value();
  if (out.abs_part <= 1e-12) {
    out.degenerate = true;
    out.epsilon0 = 0.5;
  } else {
    out.epsilon0 = 0.5 * (1.0 - out.signed_part / out.abs_part);
  }
  return out;
}

// Table-driven scenario definitions. Populations 1/2 follow the Monte Carlo
// study; the tested pair order is recorded in `direction`.
inline ScenarioSpec scenario_by_id(const std::string& id) {
  if (id == "1") {
    return {"1", DistributionSpec(Lognormal{2.0, 1.0}), DistributionSpec(Lognormal{1.0, 1.5}),
            OrderKind::first, ScenarioDirection::pop2_dominated, 0.127290};
  }
  if (id == "2") {
    return {"2", DistributionSpec(Lognormal{1.0, 1.0}), DistributionSpec(Lognormal{1.0, 1.5}),
            OrderKind::first, ScenarioDirection::pop1_dominated, 0.036160};
  }
  if (id == "3") {
    const double b1 = gb2_unit_mean_scale(2.0, 0.8, 1.5);
    const double b2 = gb2_unit_mean_scale(9.0, 0.1, 7.0);
    return {"3", DistributionSpec(GB2{2.0, b1, 0.8, 1.5}), DistributionSpec(GB2{9.0, b2, 0.1, 7.0}),
            OrderKind::lorenz, ScenarioDirection::pop2_dominated, 0.063151};
  }
  if (id == "4sub") {
    // Composite population 2 with an exact contact set: identical to the
    // LN(1,1) CDF on (0,1], a truncated N(0,0.5) band on (1,2], and a
    // renormalized LN(1,1.1) tail beyond the declared cut at 3.7.
    const auto ln11 = std::make_shared<const DistributionSpec>(Lognormal{1.0, 1.0});
    const auto n05 = std::make_shared<const DistributionSpec>(Normal{0.0, 0.5});
    const auto ln1_11 = std::make_shared<const DistributionSpec>(Lognormal{1.0, 1.1});
    const double w1 = dist_cdf(*ln11, 1.0);  // = Phi(-1)
    const double w2 = 0.25;
    const double w3 = 1.0 - w1 - w2;
    Composite comp;
    comp.components.push_back({w1, 0.0, 1.0, ln11});
    comp.components.push_back({w2, 1.0, 2.0, n05});
    comp.components.push_back(
        {w3, 3.7, std::numeric_limits<double>::infinity(), ln1_11});
    return {"4sub", DistributionSpec(Lognormal{1.0, 1.0}), DistributionSpec(std::move(comp)),
            OrderKind::first, ScenarioDirection::pop1_dominated, std::nullopt};
  }
  throw std::invalid_argument("unknown scenario id: " + id);
}

// Ordered (dominated-candidate, dominating-candidate) populations.
inline std::pair<const DistributionSpec*, const DistributionSpec*> scenario_pair(
    const ScenarioSpec& sc) {
  if (sc.direction == ScenarioDirection::pop1_dominated) return {&sc.pop1, &sc.pop2};
  return {&sc.pop2, &sc.pop1};
}

// Monte Carlo power of test (a) over an epsilon grid. Runs are seed-indexed
// and independent; the bootstrap distribution (Case 1) or replicate
// components (Case 2) are computed once per run and reused across the grid.
inline PowerCurveResult power_curve(const ScenarioSpec& scenario, std::size_t n, int N, int B,
                                    double alpha, std::vector<double> epsilon_grid,
                                    TestMethod method, std::optional<double> c,
                                    std::uint64_t seed, int workers = 0) {
  if (N < 1 || B < 1) throw std::invalid_argument("power_curve: N and B must be >= 1");
  for (double e : epsilon_grid) {
    if (!(e >= 0.0 && e < 0.5)) throw std::invalid_argument("power_curve: epsilon in [0, 0.5)");
  }
  const auto pair = scenario_pair(scenario);
  const DistributionSpec* dom = pair.first;
  const DistributionSpec* other = pair.second;

  std::vector<long> reject_counts(epsilon_grid.size(), 0);
  std::vector<std::vector<unsigned char>> per_run(static_cast<std::size_t>(N));

  detail::parallel_tasks(N, workers, [&](int run) {
    RngStream g1 = RngStream::keyed(seed, rng_tag::monte_carlo, static_cast<std::uint64_t>(run), 1);
    RngStream g2 = RngStream::keyed(seed, rng_tag::monte_carlo, static_cast<std::uint64_t>(run), 2);
    const Sample s1 = sample_from(*dom, n, g1);
    const Sample s2 = sample_from(*other, n, g2);

    BootstrapConfig cfg;
    cfg.B = B;
    cfg.seed = RngStream::keyed(seed, rng_tag::monte_carlo, static_cast<std::uint64_t>(run), 3)
                   .next();
    cfg.workers = 1;  // runs are already parallel
    if (c) cfg.case2_c = *c;

    std::vector<unsigned char> rejected(epsilon_grid.size(), 0);
    if (method == TestMethod::case1) {
      const BootstrapDistribution dist = case1_mvr_distribution(s1, s2, scenario.order, cfg);
      const double q = dist.quantile(1.0 - alpha);
      for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
        rejected[i] = epsilon_grid[i] >= q ? 1 : 0;
      }
    } else {
      const Case2Components comp = case2_components(s1, s2, scenario.order, cfg);
      for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
        const double eps = epsilon_grid[i];
        BootstrapDistribution dist;
        dist.kind = StatisticKind::derivative;
        dist.values.reserve(comp.replicates.size());
        for (const auto& r : comp.replicates) dist.values.push_back(r.value(eps));
        const double c_hat = dist.quantile(1.0 - alpha);
        const double stat = comp.rate.r_n * phi(comp.original_index, eps);
        rejected[i] = stat > c_hat ? 1 : 0;
      }
    }
    per_run[static_cast<std::size_t>(run)] = std::move(rejected);
  });

  for (const auto& rejected : per_run) {
    for (std::size_t i = 0; i < rejected.size(); ++i) reject_counts[i] += rejected[i];
  }

  PowerCurveResult out;
  out.epsilon_grid = std::move(epsilon_grid);
  out.rejection_rate.resize(out.epsilon_grid.size());
  for (std::size_t i = 0; i < out.epsilon_grid.size(); ++i) {
    out.rejection_rate[i] = static_cast<double>(reject_counts[i]) / static_cast<double>(N);
  }
  out.scenario_id = scenario.id;
  out.order = scenario.order;
  out.method = method;
  out.n = n;
  out.N = N;
  out.B = B;
  out.alpha = alpha;
  out.c = c;
  out.seed = seed;
  return out;
}

}  // namespace asd
