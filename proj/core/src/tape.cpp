#include "hexid/tape.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hexid::ad {

const char* op_name(Op op) {
  switch (op) {
    case Op::constant: return "constant";
    case Op::input: return "input";
    case Op::parameter: return "parameter";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::scale: return "scale";
    case Op::shift: return "shift";
    case Op::neg: return "neg";
    case Op::tanh: return "tanh";
    case Op::exp: return "exp";
    case Op::logistic: return "logistic";
    case Op::power: return "power";
    case Op::sum: return "sum";
    case Op::jacobian: return "jacobian";
    case Op::custom: return "custom";
  }
  return "?";
}

double Var::value() const {
  if (!valid()) throw TapeError("value of an unbound Var");
  return tape->value(id);
}

double Var::adjoint() const {
  if (!valid()) throw TapeError("adjoint of an unbound Var");
  return tape->adjoint(id);
}

void Tape::reserve(std::size_t nodes, std::size_t edges) {
  ops_.reserve(nodes);
  values_.reserve(nodes);
  edge_begin_.reserve(nodes);
  edge_count_.reserve(nodes);
  parents_.reserve(edges);
  partials_.reserve(edges);
}

void Tape::clear() {
  ops_.clear();
  values_.clear();
  edge_begin_.clear();
  edge_count_.clear();
  parents_.clear();
  partials_.clear();
  adjoints_.clear();
  customs_.clear();
  adjoints_valid_ = false;
}

void Tape::check(Var v) const {
  if (v.tape != this) throw TapeError("Var belongs to a different tape");
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= values_.size()) {
    throw TapeError("Var id out of range");
  }
}

void Tape::push_node(Op op, double value, std::uint32_t edge_begin, std::uint32_t edge_count) {
  if (values_.size() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw TapeError("tape node limit exceeded");
  }
  ops_.push_back(op);
  values_.push_back(value);
  edge_begin_.push_back(edge_begin);
  edge_count_.push_back(edge_count);
  adjoints_valid_ = false;
}

Var Tape::leaf(Op op, double v) {
  push_node(op, v, static_cast<std::uint32_t>(parents_.size()), 0);
  return Var{this, static_cast<std::int32_t>(values_.size() - 1)};
}

Var Tape::parameters(std::span<const double> values) {
  if (values.empty()) throw TapeError("empty parameter block");
  Var first = parameter(values[0]);
  for (std::size_t i = 1; i < values.size(); ++i) parameter(values[i]);
  return first;
}

Var Tape::unary(Op op, double value, Var a, double da) {
  check(a);
  const auto begin = static_cast<std::uint32_t>(parents_.size());
  parents_.push_back(a.id);
  partials_.push_back(da);
  push_node(op, value, begin, 1);
  return Var{this, static_cast<std::int32_t>(values_.size() - 1)};
}

Var Tape::binary(Op op, double value, Var a, double da, Var b, double db) {
  check(a);
  check(b);
  const auto begin = static_cast<std::uint32_t>(parents_.size());
  parents_.push_back(a.id);
  partials_.push_back(da);
  parents_.push_back(b.id);
  partials_.push_back(db);
  push_node(op, value, begin, 2);
  return Var{this, static_cast<std::int32_t>(values_.size() - 1)};
}

Var Tape::nary(Op op, double value, std::span<const Var> parents,
               std::span<const double> partials) {
  if (parents.size() != partials.size()) throw TapeError("nary: parents/partials size mismatch");
  const auto begin = static_cast<std::uint32_t>(parents_.size());
  for (std::size_t i = 0; i < parents.size(); ++i) {
    check(parents[i]);
    parents_.push_back(parents[i].id);
    partials_.push_back(partials[i]);
  }
  push_node(op, value, begin, static_cast<std::uint32_t>(parents.size()));
  return Var{this, static_cast<std::int32_t>(values_.size() - 1)};
}

Var Tape::jacobian(std::span<const Var> inputs, std::span<const double> outputs,
                   std::span<const double> jac_row_major) {
  const std::size_t n_in = inputs.size();
  const std::size_t n_out = outputs.size();
  if (n_out == 0) throw TapeError("jacobian: no outputs");
  if (jac_row_major.size() != n_in * n_out) throw TapeError("jacobian: wrong Jacobian size");
  for (Var v : inputs) check(v);
  const auto first = static_cast<std::int32_t>(values_.size());
  for (std::size_t r = 0; r < n_out; ++r) {
    const auto begin = static_cast<std::uint32_t>(parents_.size());
    for (std::size_t c = 0; c < n_in; ++c) {
      parents_.push_back(inputs[c].id);
      partials_.push_back(jac_row_major[r * n_in + c]);
    }
    push_node(Op::jacobian, outputs[r], begin, static_cast<std::uint32_t>(n_in));
  }
  return Var{this, first};
}

Var Tape::custom(std::shared_ptr<CustomOp> op, std::span<const double> outputs) {
  if (!op) throw TapeError("custom: null op");
  if (outputs.empty()) throw TapeError("custom: no outputs");
  const auto first = static_cast<std::int32_t>(values_.size());
  for (double v : outputs) push_node(Op::custom, v, static_cast<std::uint32_t>(parents_.size()), 0);
  customs_.push_back(CustomGroup{first, static_cast<std::int32_t>(outputs.size()), std::move(op)});
  return Var{this, first};
}

void Tape::backward(Var loss) {
  check(loss);
  adjoints_.assign(values_.size(), 0.0);
  adjoints_[static_cast<std::size_t>(loss.id)] = 1.0;
  std::ptrdiff_t k = static_cast<std::ptrdiff_t>(customs_.size()) - 1;
  // Nodes after the loss cannot influence it.
  while (k >= 0 && customs_[static_cast<std::size_t>(k)].first > loss.id) --k;
  const std::int32_t* par = parents_.data();
  const double* dp = partials_.data();
  double* adj = adjoints_.data();
  for (std::int32_t i = loss.id; i >= 0; --i) {
    const auto ui = static_cast<std::size_t>(i);
    const double g = adj[ui];
    if (ops_[ui] == Op::custom) {
      if (k >= 0 && customs_[static_cast<std::size_t>(k)].first == i) {
        CustomGroup& grp = customs_[static_cast<std::size_t>(k)];
        grp.op->backward(*this, grp.first, grp.count);
        --k;
      }
      continue;
    }
    if (g == 0.0) continue;
    const std::uint32_t b = edge_begin_[ui];
    const std::uint32_t e = b + edge_count_[ui];
    for (std::uint32_t j = b; j < e; ++j) adj[par[j]] += dp[j] * g;
  }
  adjoints_valid_ = true;
}

double Tape::adjoint(std::int32_t id) const {
  if (!adjoints_valid_) throw TapeError("adjoint requested before backward()");
  if (id < 0 || static_cast<std::size_t>(id) >= adjoints_.size()) {
    throw TapeError("adjoint id out of range");
  }
  return adjoints_[static_cast<std::size_t>(id)];
}

namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw TapeError("operation on an unbound Var");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw TapeError("operands live on different tapes");
  return tape_of(a);
}

}  // namespace

Var operator+(Var a, Var b) { return tape_of(a, b).binary(Op::add, a.value() + b.value(), a, 1.0, b, 1.0); }
Var operator-(Var a, Var b) { return tape_of(a, b).binary(Op::sub, a.value() - b.value(), a, 1.0, b, -1.0); }

Var operator*(Var a, Var b) {
  const double x = a.value(), y = b.value();
  return tape_of(a, b).binary(Op::mul, x * y, a, y, b, x);
}

Var operator/(Var a, Var b) {
  const double x = a.value(), y = b.value();
  return tape_of(a, b).binary(Op::div, x / y, a, 1.0 / y, b, -x / (y * y));
}

Var operator-(Var a) { return tape_of(a).unary(Op::neg, -a.value(), a, -1.0); }
Var operator+(Var a, double c) { return tape_of(a).unary(Op::shift, a.value() + c, a, 1.0); }
Var operator+(double c, Var a) { return a + c; }
Var operator-(Var a, double c) { return a + (-c); }
Var operator-(double c, Var a) { return tape_of(a).unary(Op::shift, c - a.value(), a, -1.0); }
Var operator*(Var a, double c) { return tape_of(a).unary(Op::scale, a.value() * c, a, c); }
Var operator*(double c, Var a) { return a * c; }
Var operator/(Var a, double c) { return a * (1.0 / c); }

Var tanh(Var a) {
  const double y = std::tanh(a.value());
  return tape_of(a).unary(Op::tanh, y, a, 1.0 - y * y);
}

Var exp(Var a) {
  const double y = std::exp(a.value());
  return tape_of(a).unary(Op::exp, y, a, y);
}

Var logistic(Var a) {
  const double x = a.value();
  const double y = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return tape_of(a).unary(Op::logistic, y, a, y * (1.0 - y));
}

Var pow(Var a, double p) {
  const double x = a.value();
  const double d = p == 0.0 ? 0.0 : p * std::pow(x, p - 1.0);
  return tape_of(a).unary(Op::power, std::pow(x, p), a, d);
}

Var square(Var a) {
  const double x = a.value();
  return tape_of(a).unary(Op::power, x * x, a, 2.0 * x);
}

Var sum(std::span<const Var> xs) {
  if (xs.empty()) throw TapeError("sum of an empty list");
  Tape& t = tape_of(xs[0]);
  double s = 0.0;
  for (Var v : xs) s += v.value();
  const std::vector<double> ones(xs.size(), 1.0);
  return t.nary(Op::sum, s, xs, ones);
}

Var mean(std::span<const Var> xs) {
  if (xs.empty()) throw TapeError("mean of an empty list");
  Tape& t = tape_of(xs[0]);
  double s = 0.0;
  for (Var v : xs) s += v.value();
  const double w = 1.0 / static_cast<double>(xs.size());
  const std::vector<double> weights(xs.size(), w);
  return t.nary(Op::sum, s * w, xs, weights);
}

}  // namespace hexid::ad
