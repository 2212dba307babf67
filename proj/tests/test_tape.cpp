#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "hexid/rng.hpp"
#include "hexid/tape.hpp"

using namespace hexid;
using ad::Var;

namespace {

// Reverse-mode gradient of f at x against central differences of the same
// expression evaluated in doubles through a fresh tape.
void expect_matches_fd(const std::function<Var(ad::Tape&, const std::vector<Var>&)>& f,
                       const std::vector<double>& x, double tol) {
  auto eval = [&](const std::vector<double>& v) {
    ad::Tape t;
    std::vector<Var> in;
    for (double d : v) in.push_back(t.input(d));
    return f(t, in).value();
  };
  ad::Tape tape;
  std::vector<Var> in;
  for (double d : x) in.push_back(tape.input(d));
  tape.backward(f(tape, in));
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> p = x, m = x;
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    p[i] += h;
    m[i] -= h;
    const double fd = (eval(p) - eval(m)) / (2 * h);
    EXPECT_NEAR(in[i].adjoint(), fd, tol * std::max(1.0, std::abs(fd))) << "input " << i;
  }
}

}  // namespace

TEST(Tape, ElementaryDerivatives) {
  ad::Tape t;
  const Var x = t.input(0.3), y = t.input(-1.7);
  const Var f = x * y + ad::tanh(x) - y / x + ad::exp(y) * 2.0 + ad::pow(x, 3.0) - ad::logistic(y);
  t.backward(f);
  const double sx = 0.3, sy = -1.7;
  const double th = std::tanh(sx), lg = 1.0 / (1.0 + std::exp(-sy));
  EXPECT_NEAR(x.adjoint(), sy + (1 - th * th) + sy / (sx * sx) + 3 * sx * sx, 1e-12);
  EXPECT_NEAR(y.adjoint(), sx - 1.0 / sx + 2 * std::exp(sy) - lg * (1 - lg), 1e-12);
}

TEST(Tape, SharedSubexpressionsAccumulate) {
  ad::Tape t;
  const Var x = t.input(2.0);
  const Var a = x * x;
  const Var f = a * a + a;
  t.backward(f);
  EXPECT_DOUBLE_EQ(x.adjoint(), 4 * 8.0 + 2 * 2.0);
}

TEST(Tape, RandomCompositionsMatchFiniteDifferences) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x{rng.uniform(0.5, 2), rng.uniform(-1, 1), rng.uniform(0.5, 2)};
    expect_matches_fd(
        [](ad::Tape&, const std::vector<Var>& v) {
          const Var s = ad::tanh(v[0] * v[1] - 0.3) + ad::logistic(v[2] / v[0]);
          std::vector<Var> terms{ad::square(s), v[1] * v[2], ad::exp(-v[0])};
          return ad::mean(terms) * 3.0 - 1.0 + ad::pow(v[2], 1.5);
        },
        x, 1e-7);
  }
}

TEST(Tape, JacobianNodePropagatesThroughAllOutputs) {
  ad::Tape t;
  const Var a = t.input(1.5), b = t.input(-0.5);
  const std::vector<Var> ins{a, b};
  // outputs (a*b, a+b) with Jacobian [[b, a], [1, 1]]
  const double outs[] = {a.value() * b.value(), a.value() + b.value()};
  const double jac[] = {b.value(), a.value(), 1.0, 1.0};
  const Var o0 = t.jacobian(ins, outs, jac);
  const Var o1 = t.at(o0.id + 1);
  const Var f = 3.0 * o0 + o1 * o1;
  t.backward(f);
  EXPECT_DOUBLE_EQ(a.adjoint(), 3 * -0.5 + 2 * 1.0);
  EXPECT_DOUBLE_EQ(b.adjoint(), 3 * 1.5 + 2 * 1.0);
}

TEST(Tape, ParametersAreContiguous) {
  ad::Tape t;
  t.input(1.0);
  const double vals[] = {1.0, 2.0, 3.0};
  const Var p = t.parameters(vals);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(t.op(p.id + i), ad::Op::parameter);
    EXPECT_EQ(t.value(p.id + i), vals[i]);
  }
}

TEST(Tape, ErrorsAndClear) {
  ad::Tape t, other;
  const Var x = t.input(1.0);
  const Var y = other.input(2.0);
  EXPECT_THROW(x + y, ad::TapeError);
  EXPECT_THROW(t.adjoint(x.id), ad::TapeError);
  t.backward(x * 2.0);
  EXPECT_DOUBLE_EQ(x.adjoint(), 2.0);
  t.clear();
  EXPECT_EQ(t.size(), 0u);
  EXPECT_FALSE(t.has_adjoints());
}

TEST(Tape, BackwardTwiceGivesSameAdjoints) {
  ad::Tape t;
  const Var x = t.input(0.7);
  const Var f = ad::tanh(x) * x;
  t.backward(f);
  const double first = x.adjoint();
  t.backward(f);
  EXPECT_EQ(x.adjoint(), first);
}
