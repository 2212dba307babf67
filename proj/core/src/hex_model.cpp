#include "hexid/hex_model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hexid {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite and > 0");
  }
}

}  // namespace

void PhysicalParams::validate() const {
  require_positive(area_A, "area_A");
  require_positive(flow_v_h, "flow_v_h");
  require_positive(flow_v_c, "flow_v_c");
  require_positive(vol_V_h, "vol_V_h");
  require_positive(vol_V_c, "vol_V_c");
  require_positive(cp_h, "cp_h");
  require_positive(cp_c, "cp_c");
  require_positive(rho_h, "rho_h");
  require_positive(rho_c, "rho_c");
}

void LumpedParams::validate() const {
  require_positive(alpha_h, "alpha_h");
  require_positive(alpha_c, "alpha_c");
  require_positive(beta_h, "beta_h");
  require_positive(beta_c, "beta_c");
}

void ControllerConfig::validate() const { require_positive(K_p, "K_p"); }

void FoulingParams::validate() const {
  if (!(k_t >= 0.0) || !(k_T >= 0.0)) {
    throw std::invalid_argument("fouling rates k_t, k_T must be >= 0");
  }
  if (!std::isfinite(T_ref)) {
    throw std::invalid_argument("fouling T_ref must be finite");
  }
  if (!(U_floor >= 0.0 && U_floor < U0_min && U0_min < U0_max)) {
    throw std::invalid_argument("fouling requires 0 <= U_floor < U0_min < U0_max");
  }
}

LumpedParams default_lumped_params() {
  return LumpedParams{0.0996, 0.0664, 2.41e-5, 3.11e-5};
}

PhysicalParams default_physical_params() {
  const LumpedParams lp = default_lumped_params();
  PhysicalParams p{};
  p.vol_V_h = 1.0;
  p.vol_V_c = 1.0;
  p.flow_v_h = lp.alpha_h * p.vol_V_h;
  p.flow_v_c = lp.alpha_c * p.vol_V_c;
  p.cp_h = 4180.0;
  p.rho_h = 1000.0;
  p.rho_c = 800.0;
  p.area_A = lp.beta_h * p.cp_h * p.rho_h * p.vol_V_h;
  p.cp_c = p.area_A / (lp.beta_c * p.rho_c * p.vol_V_c);
  return p;
}

LumpedParams lump(const PhysicalParams& p) {
  return LumpedParams{
      p.flow_v_h / p.vol_V_h,
      p.flow_v_c / p.vol_V_c,
      p.area_A / (p.cp_h * p.rho_h * p.vol_V_h),
      p.area_A / (p.cp_c * p.rho_c * p.vol_V_c),
  };
}

HexRate open_loop_rhs(const HexState& s, const ExogenousInputs& u, double U,
                      const LumpedParams& lp) {
  if (U < 0.0) {
    throw std::invalid_argument("heat transfer coefficient U must be >= 0");
  }
  const double coupling = U * (s.T_c_out - s.T_h_out);
  return HexRate{
      lp.alpha_h * (u.T_h_in - s.T_h_out) + lp.beta_h * coupling,
      lp.alpha_c * (u.T_c_in - s.T_c_out) - lp.beta_c * coupling,
  };
}

double controller_output(const ControllerConfig& c, double T_c_sp,
                         double T_c_out) {
  return c.K_p * (T_c_sp - T_c_out);
}

HexRate closed_loop_rhs(const HexState& s, double T_c_sp, double T_c_in,
                        double U, const ControllerConfig& c,
                        const LumpedParams& lp) {
  const ExogenousInputs u{controller_output(c, T_c_sp, s.T_c_out), T_c_in};
  return open_loop_rhs(s, u, U, lp);
}

double fouling_rate(double U, const HexState& s, const FoulingParams& fp) {
  const double T_mean = 0.5 * (s.T_h_out + s.T_c_out);
  const double rate = fp.k_t + fp.k_T * std::max(0.0, T_mean - fp.T_ref);
  return -rate * (U - fp.U_floor);
}

// Zeroing the balances gives
//   (a_h + b_h U) T_h - b_h U T_c = a_h T_h_in
//   -b_c U T_h + (a_c + b_c U) T_c = a_c T_c_in
HexState steady_state(const ExogenousInputs& u, double U,
                      const LumpedParams& lp) {
  if (U < 0.0) {
    throw std::invalid_argument("heat transfer coefficient U must be >= 0");
  }
  const double a11 = lp.alpha_h + lp.beta_h * U;
  const double a12 = -lp.beta_h * U;
  const double a21 = -lp.beta_c * U;
  const double a22 = lp.alpha_c + lp.beta_c * U;
  const double r1 = lp.alpha_h * u.T_h_in;
  const double r2 = lp.alpha_c * u.T_c_in;
  const double det = a11 * a22 - a12 * a21;
  assert(det > 0.0);
  return HexState{(r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det};
}

// Same balances with T_h_in = K_p (T_c_sp - T_c):
//   (a_h + b_h U) T_h + (a_h K_p - b_h U) T_c = a_h K_p T_c_sp
HexState closed_loop_steady_state(double T_c_sp, double T_c_in, double U,
                                  const ControllerConfig& c,
                                  const LumpedParams& lp) {
  if (U < 0.0) {
    throw std::invalid_argument("heat transfer coefficient U must be >= 0");
  }
  const double a11 = lp.alpha_h + lp.beta_h * U;
  const double a12 = lp.alpha_h * c.K_p - lp.beta_h * U;
  const double a21 = -lp.beta_c * U;
  const double a22 = lp.alpha_c + lp.beta_c * U;
  const double r1 = lp.alpha_h * c.K_p * T_c_sp;
  const double r2 = lp.alpha_c * T_c_in;
  const double det = a11 * a22 - a12 * a21;
  if (det == 0.0) {
    throw std::domain_error("closed-loop equilibrium is singular");
  }
  return HexState{(r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det};
}

}  // namespace hexid
