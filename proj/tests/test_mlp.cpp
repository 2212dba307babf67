#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hexid/dataset.hpp"
#include "hexid/mlp.hpp"
#include "hexid/rng.hpp"

using namespace hexid;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(rows, cols);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1, 1);
  return X;
}

}  // namespace

TEST(Mlp, ParamCountAndFlattenRoundTrip) {
  const MlpParams p = init_params({2, 75, 75, 1}, 1);
  EXPECT_EQ(p.param_count(), 2u * 75 + 75 + 75 * 75 + 75 + 75 + 1);
  MlpParams q = zero_params({2, 75, 75, 1});
  q.unflatten(p.flatten());
  EXPECT_EQ(q.flatten(), p.flatten());
  EXPECT_EQ(q.W[0](3, 1), p.W[0](3, 1));
  EXPECT_THROW(q.unflatten(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(Mlp, CanonicalOrderIsRowMajorWeightsThenBias) {
  MlpParams p = zero_params({2, 2, 1});
  Eigen::VectorXd flat(9);
  flat << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  p.unflatten(flat);
  EXPECT_EQ(p.W[0](0, 1), 2.0);
  EXPECT_EQ(p.W[0](1, 0), 3.0);
  EXPECT_EQ(p.b[0](1), 6.0);
  EXPECT_EQ(p.W[1](0, 1), 8.0);
  EXPECT_EQ(p.b[1](0), 9.0);
}

TEST(Mlp, GlorotBoundsAndDeterminism) {
  const MlpParams p = init_params({1, 40, 3}, 9);
  const double bound = std::sqrt(6.0 / 41.0);
  EXPECT_LE(p.W[0].cwiseAbs().maxCoeff(), bound);
  EXPECT_TRUE(p.b[0].isZero());
  EXPECT_EQ(p.flatten(), init_params({1, 40, 3}, 9).flatten());
  EXPECT_NE(p.flatten(), init_params({1, 40, 3}, 10).flatten());
}

TEST(Mlp, EvaluateMatchesHandComputation) {
  MlpParams p = zero_params({1, 2, 1});
  p.W[0] << 0.5, -1.0;
  p.b[0] << 0.1, 0.2;
  p.W[1] << 2.0, 3.0;
  p.b[1] << -0.5;
  const double x = 0.7;
  const double want = 2.0 * std::tanh(0.5 * x + 0.1) + 3.0 * std::tanh(-x + 0.2) - 0.5;
  EXPECT_NEAR(mlp_evaluate(p, Eigen::VectorXd(Eigen::VectorXd::Constant(1, x)))(0), want, 1e-15);
}

TEST(Mlp, FusedAndScalarPathsAgree) {
  const MlpParams p = init_params({3, 10, 10, 2}, 4);
  const Eigen::MatrixXd X = random_matrix(3, 5, 1);
  ad::Tape t;
  const MlpBinding b = bind_params(t, p);
  const auto fused = mlp_forward_batch(b, X);
  const Eigen::MatrixXd ref = mlp_evaluate(p, X);
  std::vector<ad::Var> loss_terms;
  for (int j = 0; j < 5; ++j) {
    std::vector<ad::Var> in;
    for (int i = 0; i < 3; ++i) in.push_back(t.constant(X(i, j)));
    const auto out = mlp_forward(b, in);
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(out[k].value(), ref(k, j), 1e-14);
      EXPECT_NEAR(fused[2 * j + k].value(), ref(k, j), 1e-14);
      loss_terms.push_back(out[k] - fused[2 * j + k]);
    }
  }
  // d/dtheta of (scalar - fused) vanishes when both paths are differentiated.
  t.backward(ad::sum(loss_terms));
  EXPECT_LT(gradient(b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mlp, FusedGradientMatchesFiniteDifferences) {
  const MlpParams p = init_params({2, 6, 6, 1}, 12);
  const Eigen::MatrixXd X = random_matrix(2, 4, 2);
  ad::Tape t;
  const MlpBinding b = bind_params(t, p);
  const auto out = mlp_forward_batch(b, X);
  std::vector<ad::Var> sq;
  for (const auto& o : out) sq.push_back(ad::square(o - 0.3));
  t.backward(ad::sum(sq));
  auto f = [&](const Eigen::VectorXd& v) {
    MlpParams q = p;
    q.unflatten(v);
    return (mlp_evaluate(q, X).array() - 0.3).square().sum();
  };
  const Eigen::VectorXd fd = finite_diff_grad(f, p.flatten(), 1e-6);
  EXPECT_LT((gradient(b) - fd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Mlp, InputTimeDerivativeMatchesFiniteDifferences) {
  const MlpParams p = init_params({2, 8, 8, 3}, 5);
  const Eigen::MatrixXd X = random_matrix(2, 6, 3);
  const MlpTangent tg = input_time_derivative(p, X, 1);
  Eigen::MatrixXd Xp = X, Xm = X;
  Xp.row(1).array() += 1e-6;
  Xm.row(1).array() -= 1e-6;
  const Eigen::MatrixXd fd = (mlp_evaluate(p, Xp) - mlp_evaluate(p, Xm)) / 2e-6;
  EXPECT_LT((tg.dout - fd).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((tg.out - mlp_evaluate(p, X)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Mlp, TangentParameterGradientMatchesFiniteDifferences) {
  // Loss mixes outputs and their time derivatives, as the PINN residual does.
  const MlpParams p = init_params({1, 7, 7, 3}, 6);
  const Eigen::MatrixXd X = random_matrix(1, 5, 4);
  ad::Tape t;
  const MlpBinding b = bind_params(t, p);
  const TangentVars tv = mlp_forward_tangent(b, X, 0);
  std::vector<ad::Var> terms;
  for (std::size_t i = 0; i < tv.out.size(); ++i) terms.push_back(ad::square(tv.dout[i] - 0.5 * tv.out[i]));
  t.backward(ad::sum(terms));
  auto f = [&](const Eigen::VectorXd& v) {
    MlpParams q = p;
    q.unflatten(v);
    const MlpTangent tg = input_time_derivative(q, X, 0);
    return (tg.dout - 0.5 * tg.out).array().square().sum();
  };
  const Eigen::VectorXd fd = finite_diff_grad(f, p.flatten(), 1e-6);
  EXPECT_LT((gradient(b) - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Mlp, InputGradientsFlowThroughFusedBatch) {
  const MlpParams p = init_params({2, 5, 1}, 8);
  ad::Tape t;
  const MlpBinding b = bind_params(t, p);
  std::vector<ad::Var> in{t.input(0.2), t.input(-0.4)};
  const auto out = mlp_forward_batch(b, in, 1);
  t.backward(out[0]);
  Eigen::VectorXd x(2);
  x << 0.2, -0.4;
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += 1e-6;
    xm(i) -= 1e-6;
    const double fd = (mlp_evaluate(p, xp)(0) - mlp_evaluate(p, xm)(0)) / 2e-6;
    EXPECT_NEAR(in[static_cast<std::size_t>(i)].adjoint(), fd, 1e-8);
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const MlpParams p = init_params({1, 40, 40, 3}, 1234);
  std::stringstream ss;
  write_mlp(ss, p);
  const MlpParams q = read_mlp(ss);
  EXPECT_EQ(q.widths, p.widths);
  EXPECT_EQ(q.flatten(), p.flatten());
}

TEST(Checkpoint, BadFilesAreRejected) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_mlp(in, "mem");
  };
  EXPECT_THROW(parse("not-a-checkpoint\n"), ParseError);
  EXPECT_THROW(parse("hexid-mlp 2\n"), ParseError);
  EXPECT_THROW(parse("hexid-mlp 1\nwidths 1 1\nactivation tanh\ncount 3\n1\n2\n"), ParseError);
  EXPECT_THROW(parse("hexid-mlp 1\nwidths 1 1\nactivation tanh\ncount 2\n1\nnan\n"), ParseError);
  EXPECT_NO_THROW(parse("hexid-mlp 1\nwidths 1 1\nactivation tanh\ncount 2\n1\n2\n"));
}
