#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "asd/numeric.hpp"

namespace asd {

// Strictly increasing, finite breakpoint abscissas. A single knot is allowed
// so that one-point samples (pure-tail step functions) are representable.
class BreakpointGrid {
 public:
  explicit BreakpointGrid(std::vector<double> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw std::invalid_argument("grid: no knots");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!std::isfinite(knots_[i])) throw std::invalid_argument("grid: non-finite knot");
      if (i > 0 && !(knots_[i - 1] < knots_[i])) {
        throw std::invalid_argument("grid: knots not strictly increasing");
      }
    }
  }

  const std::vector<double>& knots() const { return knots_; }
  std::size_t size() const { return knots_.size(); }
  double front() const { return knots_.front(); }
  double back() const { return knots_.back(); }

  static BreakpointGrid merged(const BreakpointGrid& a, const BreakpointGrid& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::merge(a.knots_.begin(), a.knots_.end(), b.knots_.begin(), b.knots_.end(),
               std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return BreakpointGrid(std::move(out));
  }

 private:
  std::vector<double> knots_;
};

enum class PieceKind { step, linear };

struct SignedAbsIntegrals {
  double signed_part = 0.0;  // integral of f
  double absolute = 0.0;     // integral of |f|
};

// Exact area of |h| over a segment of width w where h is linear with endpoint
// values (va, vb). Splits at the sign-change root; a zero endpoint creates no
// spurious split.
inline double segment_abs_area(double va, double vb, double w) {
  if (va * vb >= 0.0) return std::abs(0.5 * (va + vb) * w);
  const double aa = std::abs(va), ab = std::abs(vb);
  return 0.5 * w * (va * va + vb * vb) / (aa + ab);
}

inline double segment_signed_area(double va, double vb, double w) {
  return 0.5 * (va + vb) * w;
}

// Step or piecewise-linear function on a breakpoint grid, with optional
// constant tails outside the grid. Immutable after construction.
//
// Conventions:
//   step:   right-continuous; value on [knot_i, knot_{i+1}) is values[i];
//           x >= back() evaluates to the right tail, x < front() to the left.
//   linear: values[i] is the ordinate at knot_i, linear in between;
//           strictly outside the grid the (constant) tails apply.
class PiecewiseFunction {
 public:
  static PiecewiseFunction step(BreakpointGrid grid, std::vector<double> interval_values,
                                std::optional<double> left_tail,
                                std::optional<double> right_tail) {
    if (interval_values.size() + 1 != grid.size()) {
      throw std::invalid_argument("step function: need one value per inter-knot interval");
    }
    return PiecewiseFunction(std::move(grid), PieceKind::step, std::move(interval_values),
                             left_tail, right_tail);
  }

  static PiecewiseFunction linear(BreakpointGrid grid, std::vector<double> knot_values,
                                  std::optional<double> left_tail,
                                  std::optional<double> right_tail) {
    if (knot_values.size() != grid.size()) {
      throw std::invalid_argument("linear function: need one value per knot");
    }
    return PiecewiseFunction(std::move(grid), PieceKind::linear, std::move(knot_values),
                             left_tail, right_tail);
  }

  PieceKind kind() const { return kind_; }
  const BreakpointGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::optional<double> left_tail() const { return left_tail_; }
  std::optional<double> right_tail() const { return right_tail_; }

  double operator()(double x) const {
    const auto& k = grid_.knots();
    if (kind_ == PieceKind::step) {
      if (x < k.front()) return require_tail(left_tail_);
      if (x >= k.back()) return require_tail(right_tail_);
      const auto it = std::upper_bound(k.begin(), k.end(), x);
      return values_[static_cast<std::size_t>(it - k.begin()) - 1];
    }
    if (x < k.front()) return require_tail(left_tail_);
    if (x > k.back()) return require_tail(right_tail_);
    const auto it = std::lower_bound(k.begin(), k.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - k.begin());
    if (i < k.size() && k[i] == x) return values_[i];
    const double x0 = k[i - 1], x1 = k[i];
    const double t = (x - x0) / (x1 - x0);
    return values_[i - 1] + t * (values_[i] - values_[i - 1]);
  }

 private:
  PiecewiseFunction(BreakpointGrid grid, PieceKind kind, std::vector<double> values,
                    std::optional<double> lt, std::optional<double> rt)
      : grid_(std::move(grid)), kind_(kind), values_(std::move(values)),
        left_tail_(lt), right_tail_(rt) {
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("piecewise: non-finite value");
    }
  }

  static double require_tail(const std::optional<double>& t) {
    if (!t) throw std::domain_error("domain exceeds representation");
    return *t;
  }

  BreakpointGrid grid_;
  PieceKind kind_;
  std::vector<double> values_;
  std::optional<double> left_tail_;
  std::optional<double> right_tail_;
};

namespace detail {

// Interval value of a step function on the union-grid interval starting at u,
// without going through operator() (avoids tail throws when tails are unset
// but the interval lies inside the grid).
inline double step_value_at(const PiecewiseFunction& f, double u) {
  const auto& k = f.grid().knots();
  if (u < k.front()) {
    if (!f.left_tail()) throw std::domain_error("domain exceeds representation");
    return *f.left_tail();
  }
  if (u >= k.back()) {
    if (!f.right_tail()) throw std::domain_error("domain exceeds representation");
    return *f.right_tail();
  }
  const auto it = std::upper_bound(k.begin(), k.end(), u);
  return f.values()[static_cast<std::size_t>(it - k.begin()) - 1];
}

// Knot value of a linear function at union-grid knot u. Extension beyond the
// native grid is only representable when the corresponding tail is constant
// and continuous with the edge value.
inline double linear_value_at(const PiecewiseFunction& f, double u) {
  const auto& k = f.grid().knots();
  if (u < k.front()) {
    if (!f.left_tail() || *f.left_tail() != f.values().front()) {
      throw std::domain_error("domain exceeds representation");
    }
    return *f.left_tail();
  }
  if (u > k.back()) {
    if (!f.right_tail() || *f.right_tail() != f.values().back()) {
      throw std::domain_error("domain exceeds representation");
    }
    return *f.right_tail();
  }
  return f(u);
}

}  // namespace detail

// Re-expresses f and g on the union of their grids; both outputs evaluate
// pointwise identically to their inputs.
inline std::pair<PiecewiseFunction, PiecewiseFunction> align(const PiecewiseFunction& f,
                                                             const PiecewiseFunction& g) {
  if (f.kind() != g.kind()) throw std::invalid_argument("kind mismatch");
  const BreakpointGrid grid = BreakpointGrid::merged(f.grid(), g.grid());
  const auto& k = grid.knots();
  if (f.kind() == PieceKind::step) {
    std::vector<double> fv, gv;
    fv.reserve(k.size() - 1);
    gv.reserve(k.size() - 1);
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
      fv.push_back(detail::step_value_at(f, k[i]));
      gv.push_back(detail::step_value_at(g, k[i]));
    }
    return {PiecewiseFunction::step(grid, std::move(fv), f.left_tail(), f.right_tail()),
            PiecewiseFunction::step(grid, std::move(gv), g.left_tail(), g.right_tail())};
  }
  std::vector<double> fv, gv;
  fv.reserve(k.size());
  gv.reserve(k.size());
  for (double u : k) {
    fv.push_back(detail::linear_value_at(f, u));
    gv.push_back(detail::linear_value_at(g, u));
  }
  return {PiecewiseFunction::linear(grid, std::move(fv), f.left_tail(), f.right_tail()),
          PiecewiseFunction::linear(grid, std::move(gv), g.left_tail(), g.right_tail())};
}

// Exact pointwise difference f - g on the union grid.
inline PiecewiseFunction subtract(const PiecewiseFunction& f, const PiecewiseFunction& g) {
  auto [fa, ga] = align(f, g);
  std::vector<double> d(fa.values().size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = fa.values()[i] - ga.values()[i];
  std::optional<double> lt, rt;
  if (fa.left_tail() && ga.left_tail()) lt = *fa.left_tail() - *ga.left_tail();
  if (fa.right_tail() && ga.right_tail()) rt = *fa.right_tail() - *ga.right_tail();
  if (fa.kind() == PieceKind::step) {
    return PiecewiseFunction::step(fa.grid(), std::move(d), lt, rt);
  }
  return PiecewiseFunction::linear(fa.grid(), std::move(d), lt, rt);
}

namespace detail {

// Walks the segments of f clipped to [domain.lo, domain.hi], including the
// constant tail pieces, and calls visit(va, vb, width) with exact endpoint
// ordinates. For step segments va == vb.
template <typename Visit>
void for_each_segment(const PiecewiseFunction& f, const Interval& domain, Visit&& visit) {
  const auto& k = f.grid().knots();
  const double a = domain.lo, b = domain.hi;
  if (a >= b) return;

  const bool is_step = f.kind() == PieceKind::step;
  auto tail_value = [&](const std::optional<double>& t) {
    if (!t) throw std::domain_error("domain exceeds representation");
    return *t;
  };

  // Left tail piece.
  if (a < k.front()) {
    const double v = tail_value(f.left_tail());
    const double hi = std::min(b, k.front());
    visit(v, v, hi - a);
    if (b <= k.front()) return;
  }
  // Right-of-grid piece handled at the end; interior segments here.
  const double lo_in = std::max(a, k.front());
  const double hi_in = std::min(b, k.back());
  if (lo_in < hi_in) {
    // first segment index: largest i with k[i] <= lo_in
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(k.begin(), k.end(), lo_in) - k.begin() - 1);
    double x = lo_in;
    while (x < hi_in) {
      const double seg_end = std::min(k[i + 1], hi_in);
      if (is_step) {
        const double v = f.values()[i];
        visit(v, v, seg_end - x);
      } else {
        const double x0 = k[i], x1 = k[i + 1];
        const double v0 = f.values()[i], v1 = f.values()[i + 1];
        const double slope = (v1 - v0) / (x1 - x0);
        const double va = (x == x0) ? v0 : v0 + slope * (x - x0);
        const double vb = (seg_end == x1) ? v1 : v0 + slope * (seg_end - x0);
        visit(va, vb, seg_end - x);
      }
      x = seg_end;
      ++i;
      if (i + 1 >= k.size()) break;
    }
  }
  // Right tail piece (for step functions the tail starts at the last knot
  // by right-continuity, which is also where the interior walk stops).
  if (b > k.back()) {
    const double v = tail_value(f.right_tail());
    visit(v, v, b - std::max(a, k.back()));
  }
}

}  // namespace detail

// Exact signed and absolute integrals of f over the domain. Linear segments
// with opposite-sign endpoints are split exactly at the root for the
// absolute part.
inline SignedAbsIntegrals integrate(const PiecewiseFunction& f, const Interval& domain) {
  // Step functions are right-continuous: the grid's last knot already begins
  // the right tail, so only x >= back() needs the tail. For linear functions
  // the tail applies strictly beyond the grid.
  CompensatedSum s, a;
  detail::for_each_segment(f, domain, [&](double va, double vb, double w) {
    s.add(segment_signed_area(va, vb, w));
    a.add(segment_abs_area(va, vb, w));
  });
  return {s.value(), a.value()};
}

struct RestrictedIntegrals {
  double abs_on_contact = 0.0;      // integral of |h| over {|theta| <= a_n}
  double signed_off_contact = 0.0;  // integral of h*sgn(theta) over {|theta| > a_n}
};

namespace detail {

// Splits [0, w] at the points where the linear chord from ta to tb crosses
// the levels +level and -level, in increasing order.
inline void collect_level_crossings(double ta, double tb, double w, double level,
                                    double out[2], int& count) {
  count = 0;
  if (w <= 0.0 || ta == tb) return;
  for (double lv : {level, -level}) {
    if ((ta - lv) * (tb - lv) < 0.0) {
      out[count++] = w * (lv - ta) / (tb - ta);
    }
  }
  if (count == 2 && out[0] > out[1]) std::swap(out[0], out[1]);
}

}  // namespace detail

// Computes (integral of |h| over the estimated contact set {|theta| <= a_n},
// integral of h*sgn(theta) over its complement), exactly segment by segment.
// Points with |theta| == a_n belong to the contact set.
inline RestrictedIntegrals restricted_integrals(const PiecewiseFunction& h,
                                                const PiecewiseFunction& theta, double a_n,
                                                const Interval& domain) {
  if (!(a_n > 0.0) || !std::isfinite(a_n)) throw std::invalid_argument("invalid enlargement");
  auto [ha, th] = align(h, theta);

  CompensatedSum contact, off;
  struct Seg {
    double hva, hvb, tva, tvb, w;
  };
  auto emit = [&](double hva, double hvb, double tva, double tvb, double w) {
    if (w <= 0.0) return;
    const double tmid = 0.5 * (tva + tvb);
    if (std::abs(tmid) <= a_n) {
      contact.add(segment_abs_area(hva, hvb, w));
    } else {
      off.add(sgn(tmid) * segment_signed_area(hva, hvb, w));
    }
  };

  // Walk both functions' segments in lockstep over the domain; they share a
  // grid after alignment, so we iterate one and evaluate both.
  const auto& k = ha.grid().knots();
  const bool is_step = ha.kind() == PieceKind::step;

  // Collect the segment decomposition of the aligned pair over the domain.
  std::vector<Seg> segs;
  {
    std::vector<double> cuts;
    cuts.push_back(domain.lo);
    for (double u : k) {
      if (u > domain.lo && u < domain.hi) cuts.push_back(u);
    }
    cuts.push_back(domain.hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double x0 = cuts[i], x1 = cuts[i + 1];
      if (!(x0 < x1)) continue;
      if (is_step) {
        const double hv = detail::step_value_at(ha, x0);
        const double tv = detail::step_value_at(th, x0);
        segs.push_back({hv, hv, tv, tv, x1 - x0});
      } else {
        segs.push_back({detail::linear_value_at(ha, x0), detail::linear_value_at(ha, x1),
                        detail::linear_value_at(th, x0), detail::linear_value_at(th, x1),
                        x1 - x0});
      }
    }
  }

  for (const Seg& s : segs) {
    if (is_step) {
      emit(s.hva, s.hvb, s.tva, s.tvb, s.w);
      continue;
    }
    // Refine at crossings of theta with the +/- a_n levels.
    double cut[2];
    int nc = 0;
    detail::collect_level_crossings(s.tva, s.tvb, s.w, a_n, cut, nc);
    double x = 0.0;
    double hva = s.hva, tva = s.tva;
    const double hslope = (s.hvb - s.hva) / s.w;
    const double tslope = (s.tvb - s.tva) / s.w;
    for (int c = 0; c <= nc; ++c) {
      const double xe = (c < nc) ? cut[c] : s.w;
      if (xe > x) {
        const double hvb = (c == nc) ? s.hvb : s.hva + hslope * xe;
        const double tvb = (c == nc) ? s.tvb : s.tva + tslope * xe;
        emit(hva, hvb, tva, tvb, xe - x);
        hva = hvb;
        tva = tvb;
        x = xe;
      }
    }
  }
  return {contact.value(), off.value()};
}

}  // namespace asd
