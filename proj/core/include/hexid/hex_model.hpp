#pragma once

// Lumped two-stream counterflow heat exchanger: plant parameters, open- and
// closed-loop right-hand sides, and the ground-truth fouling law used when
// generating data.

namespace hexid {

/// Geometry, flow and fluid properties of the exchanger (SI units).
struct PhysicalParams {
  double area_A;    // m^2
  double flow_v_h;  // m^3/s
  double flow_v_c;  // m^3/s
  double vol_V_h;   // m^3
  double vol_V_c;   // m^3
  double cp_h;      // J/(kg K)
  double cp_c;      // J/(kg K)
  double rho_h;     // kg/m^3
  double rho_c;     // kg/m^3

  void validate() const;
};

/// Rate constants of the lumped model: alpha = v/V in 1/s and
/// beta = A/(cp rho V) in m^2 K/J, so beta * U is a rate in 1/s.
struct LumpedParams {
  double alpha_h;
  double alpha_c;
  double beta_h;
  double beta_c;

  void validate() const;
};

/// Values used throughout the numerical study of the fouling problem.
LumpedParams default_lumped_params();

/// Physical parameters chosen so that lump() reproduces
/// default_lumped_params(): water on the hot side, a lighter oil on the cold
/// side, unit volumes.
PhysicalParams default_physical_params();

LumpedParams lump(const PhysicalParams& p);

struct HexState {
  double T_h_out;  // K
  double T_c_out;  // K
};

/// Time derivative of a HexState, in K/s.
struct HexRate {
  double dT_h_out;
  double dT_c_out;
};

/// Inlet temperatures that drive the open-loop plant.
struct ExogenousInputs {
  double T_h_in;  // K
  double T_c_in;  // K
};

struct ControllerConfig {
  double K_p = 50.0;

  void validate() const;
};

/// dU/dt = -(k_t + k_T * max(0, T_mean - T_ref)) * (U - U_floor): first-order
/// decay toward a floor, accelerated by the mean exchanger temperature.
struct FoulingParams {
  double k_t = 6.5e-5;      // 1/s
  double k_T = 5.0e-6;      // 1/(K s)
  double T_ref = 373.0;     // K
  double U_floor = 5000.0;  // W/(m^2 K)
  double U0_min = 9500.0;   // W/(m^2 K)
  double U0_max = 10500.0;  // W/(m^2 K)

  void validate() const;
};

/// Open-loop energy balances. Throws std::invalid_argument for U < 0.
HexRate open_loop_rhs(const HexState& s, const ExogenousInputs& u, double U,
                      const LumpedParams& lp);

/// Proportional law without bias or saturation: K_p * (T_c_sp - T_c_out).
double controller_output(const ControllerConfig& c, double T_c_sp,
                         double T_c_out);

/// open_loop_rhs with the hot inlet supplied by controller_output.
HexRate closed_loop_rhs(const HexState& s, double T_c_sp, double T_c_in,
                        double U, const ControllerConfig& c,
                        const LumpedParams& lp);

double fouling_rate(double U, const HexState& s, const FoulingParams& fp);

/// Equilibrium of the open-loop plant for constant inlets and U.
HexState steady_state(const ExogenousInputs& u, double U,
                      const LumpedParams& lp);

/// Equilibrium of the closed loop for constant set point, cold inlet and U.
HexState closed_loop_steady_state(double T_c_sp, double T_c_in, double U,
                                  const ControllerConfig& c,
                                  const LumpedParams& lp);

}  // namespace hexid
