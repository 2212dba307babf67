#pragma once

#include <string>
#include <vector>

namespace hexid {

/// Time series used as an exogenous signal. Breakpoints must be strictly
/// increasing; values before the first breakpoint take the first value and
/// values after the last take the last.
class Schedule {
 public:
  enum class Interpolation { zero_order_hold, linear };

  Schedule() = default;
  Schedule(std::vector<double> times, std::vector<double> values,
           Interpolation interp = Interpolation::zero_order_hold);

  static Schedule constant(double value);

  /// Reads `t,value` rows (header optional), zero-order hold between rows.
  static Schedule read_csv(const std::string& path);

  double operator()(double t) const;

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  Interpolation interpolation() const { return interp_; }
  bool empty() const { return times_.empty(); }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  Interpolation interp_ = Interpolation::zero_order_hold;
};

}  // namespace hexid
