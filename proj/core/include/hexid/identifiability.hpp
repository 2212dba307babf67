#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "hexid/hex_model.hpp"

namespace hexid {

/// Closed-loop plant states augmented with the (constant) controller gain.
struct AugmentedState {
  double T_h_out;
  double T_c_out;
  double K_p;
};

/// Control-affine decomposition of the augmented closed loop:
///   x' = g0(x) + f1(x) T_c_sp + f2(x) T_c_in + g1(x) U(t),
/// with outputs h1 = T_h_out and h2 = T_c_out.
struct VectorFieldsAt {
  Eigen::Vector3d g0;
  Eigen::Vector3d f1;
  Eigen::Vector3d f2;
  Eigen::Vector3d g1;
};

VectorFieldsAt eval_vector_fields(const AugmentedState& x, const LumpedParams& lp);

struct RankReport {
  Eigen::MatrixXd matrix;
  std::vector<double> singular_values;  // descending
  double tolerance = 0.0;               // relative to the largest singular value
  int rank = 0;
  std::string verdict;
};

inline constexpr double kDefaultRankTolerance = 1e-10;

/// SVD rank: number of singular values above rel_tol * sigma_max.
/// Throws std::invalid_argument on non-finite entries.
RankReport numeric_rank(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTolerance);

/// Rows: gradients of h1, h2, L_g0 h1, L_g0 h2.
RankReport observability_matrix(const AugmentedState& x, const LumpedParams& lp,
                                double rel_tol = kDefaultRankTolerance);

/// Column (L_g1 h1, L_g1 h2): the unknown-input reconstructibility matrix.
RankReport reconstructibility_matrix(const AugmentedState& x, const LumpedParams& lp,
                                     double rel_tol = kDefaultRankTolerance);

struct StateVerdict {
  AugmentedState state;
  RankReport observability;
  RankReport reconstructibility;
  bool identifiable = false;
};

struct IdentifiabilityReport {
  std::vector<StateVerdict> states;
  std::vector<std::size_t> failing;  // indices into `states`
  double rel_tol = kDefaultRankTolerance;

  bool all_identifiable() const { return failing.empty(); }
  std::string to_text() const;
  /// Header plus one row per state:
  /// index,T_h_out,T_c_out,K_p,obs_rank,rec_rank,sigma_min_obs,sigma_rec,tolerance,identifiable
  std::string to_csv() const;
};

/// Identifiable at a state iff the observability rank is 3 and the
/// reconstructibility rank equals the number of unknown time-varying inputs
/// (one: U).
IdentifiabilityReport identifiability_check(const std::vector<AugmentedState>& states,
                                            const LumpedParams& lp,
                                            double rel_tol = kDefaultRankTolerance);

}  // namespace hexid
