#pragma once

#include <Eigen/Core>

namespace hexid {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// Adaptive-moment optimizer with bias correction, on a flat parameter vector.
class Adam {
 public:
  Adam(const AdamConfig& cfg, Eigen::Index n);

  /// params -= lr * m_hat / (sqrt(v_hat) + eps)
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

}  // namespace hexid
