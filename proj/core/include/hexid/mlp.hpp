#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hexid/tape.hpp"

namespace hexid {

/// Dense network, tanh on hidden layers and identity on the output layer.
/// W[l] has shape widths[l+1] x widths[l].
struct MlpParams {
  std::vector<int> widths;
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;

  int n_inputs() const { return widths.front(); }
  int n_outputs() const { return widths.back(); }
  std::size_t layer_count() const { return W.size(); }
  std::size_t param_count() const;
  /// Throws std::invalid_argument on bad widths, shapes or non-finite entries.
  void validate() const;

  /// Canonical order: layer by layer, weights row-major, then the bias.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
};

/// Zero-filled parameters of the given widths (at least two entries, all > 0).
MlpParams zero_params(const std::vector<int>& widths);

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
MlpParams init_params(const std::vector<int>& widths, std::uint64_t seed);

/// Plain forward pass; X is n_inputs x batch.
Eigen::MatrixXd mlp_evaluate(const MlpParams& p, const Eigen::MatrixXd& X);
Eigen::VectorXd mlp_evaluate(const MlpParams& p, const Eigen::VectorXd& x);

struct MlpTangent {
  Eigen::MatrixXd out;   // n_outputs x batch
  Eigen::MatrixXd dout;  // derivative of each output w.r.t. input `time_index`
};

/// Outputs and their exact derivative w.r.t. one input coordinate
/// (forward-mode tangent propagated through the layers).
MlpTangent input_time_derivative(const MlpParams& p, const Eigen::MatrixXd& X, int time_index);

/// Parameters recorded on a tape as one contiguous block in canonical order.
struct MlpBinding {
  MlpParams params;
  ad::Var first;
  std::size_t count = 0;
};

MlpBinding bind_params(ad::Tape& tape, const MlpParams& p);

/// Scalar-recorded forward pass (one tape node per multiply-add).
std::vector<ad::Var> mlp_forward(const MlpBinding& bp, std::span<const ad::Var> input);

/// Fused batched forward pass. `inputs` holds n_inputs x batch Vars in
/// column-major order; returns n_outputs x batch Vars, column-major.
/// Gradients flow to the parameters and to the inputs.
std::vector<ad::Var> mlp_forward_batch(const MlpBinding& bp, std::span<const ad::Var> inputs,
                                       int batch);

/// Fused batched forward pass on constant inputs.
std::vector<ad::Var> mlp_forward_batch(const MlpBinding& bp, const Eigen::MatrixXd& X);

struct TangentVars {
  std::vector<ad::Var> out;   // n_outputs x batch, column-major
  std::vector<ad::Var> dout;  // same layout
};

/// Fused forward pass on constant inputs that also records the derivative of
/// every output w.r.t. input `time_index`; both are differentiable w.r.t. the
/// parameters.
TangentVars mlp_forward_tangent(const MlpBinding& bp, const Eigen::MatrixXd& X, int time_index);

/// d(loss)/d(params) in canonical order; requires a completed backward pass.
Eigen::VectorXd gradient(const MlpBinding& bp);

/// Coordinate-wise central differences.
Eigen::VectorXd finite_diff_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& p, double eps);

/// Text checkpoint:
///   hexid-mlp 1
///   widths 1 40 40 3
///   activation tanh
///   count <N>
///   <N lines, one value each, %.17g, canonical order>
void write_mlp(std::ostream& os, const MlpParams& p);
MlpParams read_mlp(std::istream& is, const std::string& source = "<stream>");

}  // namespace hexid
