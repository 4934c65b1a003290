#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace asd {

// Neumaier-compensated accumulator. Keeps long sums (n ~ 1e5 segments)
// accurate enough for the 1e-9/1e-10 tolerances used throughout.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double l, double h) : lo(l), hi(h) {
    if (!(std::isfinite(l) && std::isfinite(h)) || l > h) {
      throw std::invalid_argument("invalid interval");
    }
  }
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace asd
