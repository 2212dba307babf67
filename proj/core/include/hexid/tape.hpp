#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace hexid::ad {

enum class Op : std::uint8_t {
  constant,
  input,
  parameter,
  add,
  sub,
  mul,
  div,
  scale,
  shift,
  neg,
  tanh,
  exp,
  logistic,
  power,
  sum,
  jacobian,  // one output of a multi-output node with recorded local Jacobian
  custom,    // one output of a fused operation with its own reverse pass
};

const char* op_name(Op op);

class Tape;

/// Handle to a scalar node of a tape.
struct Var {
  Tape* tape = nullptr;
  std::int32_t id = -1;

  double value() const;
  double adjoint() const;
  bool valid() const { return tape != nullptr && id >= 0; }
};

class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Fused operation whose outputs occupy contiguous nodes. `backward` runs
/// once the sweep reaches the first output; by then every output adjoint is
/// final. It must only add into adjoints of nodes recorded before the op.
class CustomOp {
 public:
  virtual ~CustomOp() = default;
  virtual void backward(Tape& tape, std::int32_t first_output, std::int32_t n_outputs) = 0;
};

/// Reverse-mode tape. Each node stores its value, its parents and the local
/// partial derivatives w.r.t. them, computed during the forward pass; the
/// reverse sweep is then a sparse transposed product.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void reserve(std::size_t nodes, std::size_t edges);
  void clear();
  std::size_t size() const { return values_.size(); }
  std::size_t edge_count() const { return parents_.size(); }

  Var constant(double v) { return leaf(Op::constant, v); }
  Var input(double v) { return leaf(Op::input, v); }
  Var parameter(double v) { return leaf(Op::parameter, v); }
  /// Contiguous parameter nodes; returns the first.
  Var parameters(std::span<const double> values);

  Var unary(Op op, double value, Var a, double da);
  Var binary(Op op, double value, Var a, double da, Var b, double db);
  /// Node with arbitrary parents and partials (same length).
  Var nary(Op op, double value, std::span<const Var> parents, std::span<const double> partials);

  /// Multi-output node y = f(x) with Jacobian J (n_out x n_in, row-major).
  /// Returns the first output; outputs are contiguous.
  Var jacobian(std::span<const Var> inputs, std::span<const double> outputs,
               std::span<const double> jac_row_major);

  /// Registers a fused op producing `outputs`; returns the first output.
  Var custom(std::shared_ptr<CustomOp> op, std::span<const double> outputs);

  Var at(std::int32_t id) { return Var{this, id}; }
  double value(std::int32_t id) const { return values_[static_cast<std::size_t>(id)]; }
  Op op(std::int32_t id) const { return ops_[static_cast<std::size_t>(id)]; }

  /// Seeds d(loss)/d(loss) = 1 and sweeps backward over the whole tape.
  void backward(Var loss);
  bool has_adjoints() const { return adjoints_valid_; }
  double adjoint(std::int32_t id) const;
  /// Mutable adjoint storage for custom ops during the sweep.
  double* adjoint_data() { return adjoints_.data(); }
  const double* value_data() const { return values_.data(); }

 private:
  Var leaf(Op op, double v);
  void check(Var v) const;
  void push_node(Op op, double value, std::uint32_t edge_begin, std::uint32_t edge_count);

  std::vector<Op> ops_;
  std::vector<double> values_;
  std::vector<std::uint32_t> edge_begin_;
  std::vector<std::uint32_t> edge_count_;
  std::vector<std::int32_t> parents_;
  std::vector<double> partials_;
  std::vector<double> adjoints_;
  // Custom groups: first output id -> (op, n_outputs).
  struct CustomGroup {
    std::int32_t first;
    std::int32_t count;
    std::shared_ptr<CustomOp> op;
  };
  std::vector<CustomGroup> customs_;
  bool adjoints_valid_ = false;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);

Var tanh(Var a);
Var exp(Var a);
Var logistic(Var a);
/// a^p for a > 0, or any a when p is a non-negative integer.
Var pow(Var a, double p);
Var square(Var a);
Var sum(std::span<const Var> xs);
Var mean(std::span<const Var> xs);

}  // namespace hexid::ad
