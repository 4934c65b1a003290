#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "asd/dominance.hpp"
#include "asd/empirical.hpp"
#include "asd/rng.hpp"

namespace asd {

struct BootstrapConfig {
  int B = 2000;            // bootstrap replicates
  std::uint64_t seed = 0;  // stream seed; replicate b uses substream (seed, b)
  double case2_c = 0.01;   // tuning constant c in a_n = c log(n1 n2/(n1+n2)) / r_n
  int workers = 0;         // 0 = auto (hardware concurrency)
  bool record_indices = false;  // keep the (signed, abs) cloud for plotting
};

enum class StatisticKind { mvr, derivative };

struct BootstrapDistribution {
  std::vector<double> values;  // in replicate order
  long degenerate_count = 0;
  StatisticKind kind = StatisticKind::mvr;
  std::vector<std::pair<double, double>> index_cloud;  // optional (signed, abs) pairs

  // The ceil(B q)-th smallest value (order-statistic quantile).
  double quantile(double q) const {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile: q must be in (0,1)");
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const double bq = static_cast<double>(sorted.size()) * q;
    auto k = static_cast<std::size_t>(std::ceil(bq - 1e-9));
    if (k < 1) k = 1;
    if (k > sorted.size()) k = sorted.size();
    return sorted[k - 1];
  }
};

// Two-sample normalization rate and contact-set enlargement bandwidth:
//   r_n = sqrt(n1 n2 / (n1+n2)),   a_n = c log(n1 n2 / (n1+n2)) / r_n.
struct RateAndBandwidth {
  double r_n = 0.0;
  double a_n = 0.0;

  static RateAndBandwidth from(std::size_t n1, std::size_t n2, double c) {
    const double nh = static_cast<double>(n1) * static_cast<double>(n2) /
                      (static_cast<double>(n1) + static_cast<double>(n2));
    RateAndBandwidth r;
    r.r_n = std::sqrt(nh);
    r.a_n = c * std::log(nh) / r.r_n;
    return r;
  }
};

// n draws with replacement, uniform over indices; deterministic given the
// stream state.
inline Sample resample(const Sample& sample, RngStream& stream) {
  const std::size_t n = sample.n();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = sample.sorted()[stream.uniform_below(n)];
  }
  return Sample(std::move(out));
}

namespace detail {

inline int resolve_workers(int requested, int tasks) {
  int w = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  return std::min(w, tasks);
}

inline std::optional<double> scale_tail(std::optional<double> t, double factor) {
  if (!t) return std::nullopt;
  return *t * factor;
}

inline PiecewiseFunction scale(const PiecewiseFunction& f, double factor) {
  std::vector<double> v = f.values();
  for (double& x : v) x *= factor;
  if (f.kind() == PieceKind::step) {
    return PiecewiseFunction::step(f.grid(), std::move(v), scale_tail(f.left_tail(), factor),
                                   scale_tail(f.right_tail(), factor));
  }
  return PiecewiseFunction::linear(f.grid(), std::move(v), scale_tail(f.left_tail(), factor),
                                   scale_tail(f.right_tail(), factor));
}

// Runs fn(b) for b in [0, tasks) on `workers` threads. Each task owns its
// (replicate-indexed) output slot, so scheduling never affects results.
template <typename Fn>
void parallel_tasks(int tasks, int workers, Fn&& fn) {
  workers = resolve_workers(workers, tasks);
  if (workers <= 1) {
    for (int b = 0; b < tasks; ++b) fn(b);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int b = w; b < tasks; b += workers) fn(b);
      } catch (...) {
        std::lock_guard<std::mutex> lk(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Standard (Case 1) bootstrap distribution of the MVR: B replicates of the
// plug-in estimator on resampled pairs. Degenerate replicates (zero L1
// distance) contribute 0.5 and are counted, never dropped.
inline BootstrapDistribution case1_mvr_distribution(const Sample& s1, const Sample& s2,
                                                    OrderKind order,
                                                    const BootstrapConfig& cfg) {
  if (cfg.B < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
  BootstrapDistribution dist;
  dist.kind = StatisticKind::mvr;
  dist.values.assign(static_cast<std::size_t>(cfg.B), 0.0);
  std::vector<unsigned char> degen(static_cast<std::size_t>(cfg.B), 0);
  if (cfg.record_indices) dist.index_cloud.resize(static_cast<std::size_t>(cfg.B));

  detail::parallel_tasks(cfg.B, cfg.workers, [&](int b) {
    RngStream g1 = RngStream::keyed(cfg.seed, rng_tag::bootstrap, static_cast<std::uint64_t>(b), 1);
    RngStream g2 = RngStream::keyed(cfg.seed, rng_tag::bootstrap, static_cast<std::uint64_t>(b), 2);
    const Sample r1 = resample(s1, g1);
    const Sample r2 = resample(s2, g2);
    const Index2DSD idx = dominance_index(r1, r2, order);
    const MVREstimate e = mvr(idx);
    dist.values[static_cast<std::size_t>(b)] = e.epsilon0;
    degen[static_cast<std::size_t>(b)] = e.degenerate ? 1 : 0;
    if (cfg.record_indices) {
      dist.index_cloud[static_cast<std::size_t>(b)] = {idx.signed_part, idx.abs_part};
    }
  });
  for (unsigned char d : degen) dist.degenerate_count += d;
  return dist;
}

// Per-replicate components of the modified (Case 2) bootstrap: with
// h = r_n (theta* - theta), the statistic for any epsilon recombines as
//   integral_h - (1-2 eps) * (contact_abs + off_signed).
struct Case2Replicate {
  double integral_h = 0.0;
  double contact_abs = 0.0;
  double off_signed = 0.0;

  double value(double epsilon) const {
    return integral_h - (1.0 - 2.0 * epsilon) * (contact_abs + off_signed);
  }
};

struct Case2Components {
  std::vector<Case2Replicate> replicates;
  RateAndBandwidth rate;
  Interval domain;
  Index2DSD original_index;  // index of the original pair over the same domain
};

inline Case2Components case2_components(const Sample& s1, const Sample& s2, OrderKind order,
                                        const BootstrapConfig& cfg) {
  if (cfg.B < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
  const RateAndBandwidth rate = RateAndBandwidth::from(s1.n(), s2.n(), cfg.case2_c);
  if (!(rate.a_n > 0.0)) throw std::invalid_argument("invalid enlargement");

  const auto [theta, domain] = target_difference(s1, s2, order);
  const SignedAbsIntegrals orig = integrate(theta, domain);

  Case2Components out;
  out.rate = rate;
  out.domain = domain;
  out.original_index = {orig.signed_part, orig.absolute, order, domain};
  out.replicates.assign(static_cast<std::size_t>(cfg.B), Case2Replicate{});

  detail::parallel_tasks(cfg.B, cfg.workers, [&](int b) {
    RngStream g1 = RngStream::keyed(cfg.seed, rng_tag::bootstrap, static_cast<std::uint64_t>(b), 1);
    RngStream g2 = RngStream::keyed(cfg.seed, rng_tag::bootstrap, static_cast<std::uint64_t>(b), 2);
    const Sample r1 = resample(s1, g1);
    const Sample r2 = resample(s2, g2);
    // The bootstrap targets are built over the original pooled domain so that
    // theta* and theta live on a common representable grid.
    const EmpiricalTargets t1 = make_targets(r1, order, domain);
    const EmpiricalTargets t2 = make_targets(r2, order, domain);
    const PiecewiseFunction h =
        detail::scale(subtract(subtract(t1.s_hat, t2.s_hat), theta), rate.r_n);
    const RestrictedIntegrals ri = restricted_integrals(h, theta, rate.a_n, domain);
    Case2Replicate rep;
    rep.integral_h = integrate(h, domain).signed_part;
    rep.contact_abs = ri.abs_on_contact;
    rep.off_signed = ri.signed_off_contact;
    out.replicates[static_cast<std::size_t>(b)] = rep;
  });
  return out;
}

// Bootstrap distribution of the estimated directional derivative
// phi_hat'(r_n (theta* - theta)) for a fixed epsilon.
inline BootstrapDistribution case2_derivative_distribution(const Sample& s1, const Sample& s2,
                                                           OrderKind order, double epsilon,
                                                           const BootstrapConfig& cfg) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("case2: epsilon must be in [0, 0.5)");
  }
  const Case2Components comp = case2_components(s1, s2, order, cfg);
  BootstrapDistribution dist;
  dist.kind = StatisticKind::derivative;
  dist.values.reserve(comp.replicates.size());
  for (const Case2Replicate& r : comp.replicates) dist.values.push_back(r.value(epsilon));
  return dist;
}

}  // namespace asd
