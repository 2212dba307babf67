#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace hexid {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Vec>
bool all_finite(const Vec& v) {
  for (auto x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

/// One classical fourth-order Runge-Kutta step of y' = rhs(t, y).
/// `Vec` is any fixed-size vector type with vector arithmetic (Eigen).
template <class Rhs, class Vec>
Vec rk4_step(Rhs&& rhs, const Vec& y, double t, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4_step: step must be > 0");
  const Vec k1 = rhs(t, y);
  const Vec k2 = rhs(t + 0.5 * h, Vec(y + (0.5 * h) * k1));
  const Vec k3 = rhs(t + 0.5 * h, Vec(y + (0.5 * h) * k2));
  const Vec k4 = rhs(t + h, Vec(y + h * k3));
  if (!all_finite(k1) || !all_finite(k2) || !all_finite(k3) || !all_finite(k4)) {
    throw IntegrationError("non-finite derivative at t=" + std::to_string(t) +
                           " (blow-up or invalid parameters)");
  }
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace hexid
