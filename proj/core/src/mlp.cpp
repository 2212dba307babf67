#include "hexid/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "hexid/rng.hpp"

namespace hexid {

using ad::Tape;
using ad::Var;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::size_t MlpParams::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    n += static_cast<std::size_t>(widths[l + 1]) * (static_cast<std::size_t>(widths[l]) + 1);
  }
  return n;
}

void MlpParams::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("mlp needs at least input and output widths");
  for (int w : widths) {
    if (w <= 0) throw std::invalid_argument("mlp widths must be > 0");
  }
  if (W.size() != widths.size() - 1 || b.size() != W.size()) {
    throw std::invalid_argument("mlp layer count does not match widths");
  }
  for (std::size_t l = 0; l < W.size(); ++l) {
    if (W[l].rows() != widths[l + 1] || W[l].cols() != widths[l] || b[l].size() != widths[l + 1]) {
      throw std::invalid_argument("mlp layer " + std::to_string(l) + " has incompatible shape");
    }
    if (!W[l].allFinite() || !b[l].allFinite()) {
      throw std::invalid_argument("mlp layer " + std::to_string(l) + " has non-finite entries");
    }
  }
}

VectorXd MlpParams::flatten() const {
  VectorXd flat(static_cast<Eigen::Index>(param_count()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < W.size(); ++l) {
    for (Eigen::Index r = 0; r < W[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < W[l].cols(); ++c) flat[k++] = W[l](r, c);
    }
    for (Eigen::Index r = 0; r < b[l].size(); ++r) flat[k++] = b[l][r];
  }
  return flat;
}

void MlpParams::unflatten(const VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != param_count()) {
    throw std::invalid_argument("unflatten: expected " + std::to_string(param_count()) +
                                " values, got " + std::to_string(flat.size()));
  }
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < W.size(); ++l) {
    for (Eigen::Index r = 0; r < W[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < W[l].cols(); ++c) W[l](r, c) = flat[k++];
    }
    for (Eigen::Index r = 0; r < b[l].size(); ++r) b[l][r] = flat[k++];
  }
}

MlpParams zero_params(const std::vector<int>& widths) {
  MlpParams p;
  p.widths = widths;
  if (widths.size() < 2) throw std::invalid_argument("mlp needs at least input and output widths");
  for (int w : widths) {
    if (w <= 0) throw std::invalid_argument("mlp widths must be > 0");
  }
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    p.W.push_back(MatrixXd::Zero(widths[l + 1], widths[l]));
    p.b.push_back(VectorXd::Zero(widths[l + 1]));
  }
  return p;
}

MlpParams init_params(const std::vector<int>& widths, std::uint64_t seed) {
  MlpParams p = zero_params(widths);
  Rng rng(seed);
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    const double lim = std::sqrt(6.0 / static_cast<double>(widths[l] + widths[l + 1]));
    for (Eigen::Index r = 0; r < p.W[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < p.W[l].cols(); ++c) p.W[l](r, c) = rng.uniform(-lim, lim);
    }
  }
  return p;
}

MatrixXd mlp_evaluate(const MlpParams& p, const MatrixXd& X) {
  if (X.rows() != p.n_inputs()) {
    throw std::invalid_argument("mlp input has " + std::to_string(X.rows()) + " rows, expected " +
                                std::to_string(p.n_inputs()));
  }
  MatrixXd a = X;
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    MatrixXd z = p.W[l] * a;
    z.colwise() += p.b[l];
    if (l + 1 < p.W.size()) {
      a = z.array().tanh().matrix();
    } else {
      a = std::move(z);
    }
  }
  return a;
}

VectorXd mlp_evaluate(const MlpParams& p, const VectorXd& x) {
  return mlp_evaluate(p, MatrixXd(x)).col(0);
}

MlpTangent input_time_derivative(const MlpParams& p, const MatrixXd& X, int time_index) {
  if (X.rows() != p.n_inputs()) throw std::invalid_argument("mlp input dimension mismatch");
  if (time_index < 0 || time_index >= p.n_inputs()) {
    throw std::invalid_argument("time index out of range");
  }
  MatrixXd a = X;
  MatrixXd ad = MatrixXd::Zero(X.rows(), X.cols());
  ad.row(time_index).setOnes();
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    MatrixXd z = p.W[l] * a;
    z.colwise() += p.b[l];
    MatrixXd zd = p.W[l] * ad;
    if (l + 1 < p.W.size()) {
      a = z.array().tanh().matrix();
      ad = ((1.0 - a.array().square()) * zd.array()).matrix();
    } else {
      a = std::move(z);
      ad = std::move(zd);
    }
  }
  return MlpTangent{std::move(a), std::move(ad)};
}

MlpBinding bind_params(Tape& tape, const MlpParams& p) {
  p.validate();
  const VectorXd flat = p.flatten();
  MlpBinding bp;
  bp.params = p;
  bp.first = tape.parameters(std::span<const double>(flat.data(), static_cast<std::size_t>(flat.size())));
  bp.count = static_cast<std::size_t>(flat.size());
  return bp;
}

namespace {

std::vector<std::size_t> layer_offsets(const MlpParams& p) {
  std::vector<std::size_t> off;
  std::size_t k = 0;
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    off.push_back(k);
    k += static_cast<std::size_t>(p.W[l].size() + p.b[l].size());
  }
  return off;
}

// Adds dW (column-major Eigen) and db of every layer into the tape adjoints
// of the parameter block, in canonical order.
void scatter_param_adjoints(double* adj, std::int32_t first, const MlpParams& p,
                            const std::vector<MatrixXd>& dW, const std::vector<VectorXd>& db) {
  std::size_t k = static_cast<std::size_t>(first);
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    for (Eigen::Index r = 0; r < dW[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < dW[l].cols(); ++c) adj[k++] += dW[l](r, c);
    }
    for (Eigen::Index r = 0; r < db[l].size(); ++r) adj[k++] += db[l][r];
  }
}

class MlpBatchOp final : public ad::CustomOp {
 public:
  MlpBatchOp(const MlpBinding& bp, std::vector<std::int32_t> input_ids)
      : params_(bp.params), first_param_(bp.first.id), input_ids_(std::move(input_ids)) {}

  MatrixXd forward(const MatrixXd& X) {
    acts_.clear();
    acts_.push_back(X);
    for (std::size_t l = 0; l < params_.W.size(); ++l) {
      MatrixXd z = params_.W[l] * acts_.back();
      z.colwise() += params_.b[l];
      if (l + 1 < params_.W.size()) z = z.array().tanh().matrix();
      acts_.push_back(std::move(z));
    }
    return acts_.back();
  }

  void backward(Tape& tape, std::int32_t first_output, std::int32_t n_outputs) override {
    const std::size_t L = params_.W.size();
    const Eigen::Index batch = acts_[0].cols();
    double* adj = tape.adjoint_data();
    MatrixXd G = Eigen::Map<const MatrixXd>(adj + first_output, params_.n_outputs(), batch);
    (void)n_outputs;
    std::vector<MatrixXd> dW(L);
    std::vector<VectorXd> db(L);
    for (std::size_t l = L; l-- > 0;) {
      MatrixXd Gz = l + 1 < L ? MatrixXd((G.array() * (1.0 - acts_[l + 1].array().square())).matrix())
                              : G;
      dW[l] = Gz * acts_[l].transpose();
      db[l] = Gz.rowwise().sum();
      if (l > 0 || !input_ids_.empty()) G = params_.W[l].transpose() * Gz;
    }
    scatter_param_adjoints(adj, first_param_, params_, dW, db);
    if (!input_ids_.empty()) {
      for (std::size_t i = 0; i < input_ids_.size(); ++i) adj[input_ids_[i]] += G.data()[i];
    }
  }

 private:
  MlpParams params_;
  std::int32_t first_param_;
  std::vector<std::int32_t> input_ids_;  // empty when the inputs are constants
  std::vector<MatrixXd> acts_;
};

class MlpTangentOp final : public ad::CustomOp {
 public:
  MlpTangentOp(const MlpBinding& bp, int time_index)
      : params_(bp.params), first_param_(bp.first.id), time_index_(time_index) {}

  MlpTangent forward(const MatrixXd& X) {
    acts_.assign(1, X);
    MatrixXd ad0 = MatrixXd::Zero(X.rows(), X.cols());
    ad0.row(time_index_).setOnes();
    tangents_.assign(1, std::move(ad0));
    zdots_.clear();
    for (std::size_t l = 0; l < params_.W.size(); ++l) {
      MatrixXd z = params_.W[l] * acts_.back();
      z.colwise() += params_.b[l];
      MatrixXd zd = params_.W[l] * tangents_.back();
      if (l + 1 < params_.W.size()) {
        MatrixXd a = z.array().tanh().matrix();
        tangents_.push_back(((1.0 - a.array().square()) * zd.array()).matrix());
        acts_.push_back(std::move(a));
      } else {
        tangents_.push_back(zd);
        acts_.push_back(std::move(z));
      }
      zdots_.push_back(std::move(zd));
    }
    return MlpTangent{acts_.back(), tangents_.back()};
  }

  void backward(Tape& tape, std::int32_t first_output, std::int32_t) override {
    const std::size_t L = params_.W.size();
    const Eigen::Index batch = acts_[0].cols();
    const Eigen::Index n_out = params_.n_outputs();
    double* adj = tape.adjoint_data();
    MatrixXd G = Eigen::Map<const MatrixXd>(adj + first_output, n_out, batch);
    MatrixXd Gd = Eigen::Map<const MatrixXd>(adj + first_output + n_out * batch, n_out, batch);
    std::vector<MatrixXd> dW(L);
    std::vector<VectorXd> db(L);
    for (std::size_t l = L; l-- > 0;) {
      MatrixXd Gz, Gzd;
      if (l + 1 == L) {
        Gz = std::move(G);
        Gzd = std::move(Gd);
      } else {
        const auto a = acts_[l + 1].array();
        const Eigen::ArrayXXd s = 1.0 - a.square();
        Gzd = (s * Gd.array()).matrix();
        Gz = (s * (G.array() - 2.0 * a * zdots_[l].array() * Gd.array())).matrix();
      }
      dW[l] = Gz * acts_[l].transpose() + Gzd * tangents_[l].transpose();
      db[l] = Gz.rowwise().sum();
      if (l > 0) {
        G = params_.W[l].transpose() * Gz;
        Gd = params_.W[l].transpose() * Gzd;
      }
    }
    scatter_param_adjoints(adj, first_param_, params_, dW, db);
  }

 private:
  MlpParams params_;
  std::int32_t first_param_;
  int time_index_;
  std::vector<MatrixXd> acts_;
  std::vector<MatrixXd> tangents_;
  std::vector<MatrixXd> zdots_;
};

void check_binding(const MlpBinding& bp) {
  if (!bp.first.valid()) throw ad::TapeError("mlp binding is not attached to a tape");
}

std::vector<Var> output_vars(Tape& tape, Var first, std::size_t n) {
  std::vector<Var> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = tape.at(first.id + static_cast<std::int32_t>(i));
  return out;
}

}  // namespace

std::vector<Var> mlp_forward(const MlpBinding& bp, std::span<const Var> input) {
  check_binding(bp);
  const MlpParams& p = bp.params;
  if (static_cast<int>(input.size()) != p.n_inputs()) {
    throw std::invalid_argument("mlp input has " + std::to_string(input.size()) +
                                " entries, expected " + std::to_string(p.n_inputs()));
  }
  Tape& tape = *bp.first.tape;
  const std::vector<std::size_t> off = layer_offsets(p);
  std::vector<Var> a(input.begin(), input.end());
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    const Eigen::Index rows = p.W[l].rows(), cols = p.W[l].cols();
    const std::int32_t base = bp.first.id + static_cast<std::int32_t>(off[l]);
    std::vector<Var> next;
    next.reserve(static_cast<std::size_t>(rows));
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::vector<Var> terms;
      terms.reserve(static_cast<std::size_t>(cols) + 1);
      terms.push_back(tape.at(base + static_cast<std::int32_t>(rows * cols + r)));
      for (Eigen::Index c = 0; c < cols; ++c) {
        terms.push_back(tape.at(base + static_cast<std::int32_t>(r * cols + c)) *
                        a[static_cast<std::size_t>(c)]);
      }
      Var z = ad::sum(terms);
      next.push_back(l + 1 < p.W.size() ? ad::tanh(z) : z);
    }
    a = std::move(next);
  }
  return a;
}

std::vector<Var> mlp_forward_batch(const MlpBinding& bp, std::span<const Var> inputs, int batch) {
  check_binding(bp);
  const MlpParams& p = bp.params;
  if (batch <= 0 || inputs.size() != static_cast<std::size_t>(p.n_inputs()) * static_cast<std::size_t>(batch)) {
    throw std::invalid_argument("mlp_forward_batch: inputs must hold n_inputs x batch Vars");
  }
  Tape& tape = *bp.first.tape;
  MatrixXd X(p.n_inputs(), batch);
  std::vector<std::int32_t> ids(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].tape != &tape) throw ad::TapeError("mlp input on a different tape");
    X.data()[i] = inputs[i].value();
    ids[i] = inputs[i].id;
  }
  auto op = std::make_shared<MlpBatchOp>(bp, std::move(ids));
  const MatrixXd out = op->forward(X);
  const Var first = tape.custom(op, std::span<const double>(out.data(), static_cast<std::size_t>(out.size())));
  return output_vars(tape, first, static_cast<std::size_t>(out.size()));
}

std::vector<Var> mlp_forward_batch(const MlpBinding& bp, const MatrixXd& X) {
  check_binding(bp);
  if (X.rows() != bp.params.n_inputs() || X.cols() == 0) {
    throw std::invalid_argument("mlp_forward_batch: input dimension mismatch");
  }
  Tape& tape = *bp.first.tape;
  auto op = std::make_shared<MlpBatchOp>(bp, std::vector<std::int32_t>{});
  const MatrixXd out = op->forward(X);
  const Var first = tape.custom(op, std::span<const double>(out.data(), static_cast<std::size_t>(out.size())));
  return output_vars(tape, first, static_cast<std::size_t>(out.size()));
}

TangentVars mlp_forward_tangent(const MlpBinding& bp, const MatrixXd& X, int time_index) {
  check_binding(bp);
  if (X.rows() != bp.params.n_inputs() || X.cols() == 0) {
    throw std::invalid_argument("mlp_forward_tangent: input dimension mismatch");
  }
  if (time_index < 0 || time_index >= bp.params.n_inputs()) {
    throw std::invalid_argument("time index out of range");
  }
  Tape& tape = *bp.first.tape;
  auto op = std::make_shared<MlpTangentOp>(bp, time_index);
  const MlpTangent res = op->forward(X);
  const std::size_t n = static_cast<std::size_t>(res.out.size());
  std::vector<double> values(2 * n);
  std::copy(res.out.data(), res.out.data() + n, values.begin());
  std::copy(res.dout.data(), res.dout.data() + n, values.begin() + static_cast<std::ptrdiff_t>(n));
  const Var first = tape.custom(op, values);
  TangentVars tv;
  tv.out = output_vars(tape, first, n);
  tv.dout = output_vars(tape, tape.at(first.id + static_cast<std::int32_t>(n)), n);
  return tv;
}

VectorXd gradient(const MlpBinding& bp) {
  check_binding(bp);
  const Tape& tape = *bp.first.tape;
  VectorXd g(static_cast<Eigen::Index>(bp.count));
  for (std::size_t i = 0; i < bp.count; ++i) {
    g[static_cast<Eigen::Index>(i)] = tape.adjoint(bp.first.id + static_cast<std::int32_t>(i));
  }
  return g;
}

VectorXd finite_diff_grad(const std::function<double(const VectorXd&)>& f, const VectorXd& p,
                          double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_grad: eps must be > 0");
  VectorXd g(p.size());
  VectorXd q = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    q[i] = p[i] + eps;
    const double fp = f(q);
    q[i] = p[i] - eps;
    const double fm = f(q);
    q[i] = p[i];
    g[i] = (fp - fm) / (2.0 * eps);
  }
  return g;
}

}  // namespace hexid
