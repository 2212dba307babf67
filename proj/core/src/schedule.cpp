#include "hexid/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hexid/dataset.hpp"

namespace hexid {

Schedule::Schedule(std::vector<double> times, std::vector<double> values,
                   Interpolation interp)
    : times_(std::move(times)), values_(std::move(values)), interp_(interp) {
  if (times_.empty() || times_.size() != values_.size()) {
    throw std::invalid_argument("schedule needs equally many (>=1) times and values");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw std::invalid_argument("schedule times must be strictly increasing");
    }
  }
}

Schedule Schedule::constant(double value) { return Schedule({0.0}, {value}); }

Schedule Schedule::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open schedule file");
  std::vector<double> t, v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("t,", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError(path, line_no, "expected `t,value`");
    }
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      t.push_back(std::stod(a, &used));
      if (used != a.size()) throw std::invalid_argument(a);
      v.push_back(std::stod(b, &used));
      if (used != b.size()) throw std::invalid_argument(b);
    } catch (const std::logic_error&) {
      throw ParseError(path, line_no, "non-numeric cell");
    }
  }
  try {
    return Schedule(std::move(t), std::move(v));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, line_no, e.what());
  }
}

double Schedule::operator()(double t) const {
  if (times_.empty()) throw std::logic_error("evaluating an empty schedule");
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  if (interp_ == Interpolation::zero_order_hold) return values_[lo];
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return values_[lo] + w * (values_[hi] - values_[lo]);
}

}  // namespace hexid
