#pragma once

#include <cstdint>
#include <vector>

#include "coolflex/numcore/dense.hpp"

namespace coolflex::numcore {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives
/// and has not been cleared.
class Var {
 public:
  Var() = default;

  Tape* tape() const noexcept { return tape_; }
  std::size_t index() const noexcept { return index_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// Reverse-mode computation tape over dense matrix values.
///
/// Nodes are appended in evaluation order, so the node list is always
/// topologically sorted. Leaves are either parameters (included in the
/// gradient returned by backward) or constants (never differentiated).
class Tape {
 public:
  enum class Op : std::uint8_t {
    Parameter,
    Constant,
    Affine,
    MatMul,
    Add,
    Sub,
    Mul,
    ScaleShift,
    Sigmoid,
    Tanh,
    Square,
    Sum,
    SliceRows,
    Pointwise,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var parameter(Matrix value);
  Var constant(Matrix value);

  Var affine(Var w, Var x, Var b);
  Var matmul(Var w, Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale_shift(Var a, double alpha, double beta);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var square(Var a);
  Var sum(Var a);
  Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
  /// Elementwise y = g(a) where the caller supplies g(a) and g'(a).
  Var pointwise(Var a, Matrix value, Matrix derivative);

  /// Gradient of the 1x1 node `root` with respect to every parameter leaf,
  /// concatenated in registration order (each block flattened column-major).
  /// Throws ContractError if root is not scalar.
  std::vector<double> backward(Var root);

  const Matrix& value(Var v) const { return nodes_[v.index_].value; }
  Op op(Var v) const { return nodes_[v.index_].op; }
  std::size_t size() const noexcept { return nodes_.size(); }
  /// Total number of scalar entries across all parameter leaves.
  std::size_t parameter_size() const noexcept { return parameter_size_; }
  void clear();

 private:
  struct Node {
    explicit Node(Op o) : op(o) {}
    Op op;
    std::int64_t a = -1;
    std::int64_t b = -1;
    std::int64_t c = -1;
    double alpha = 0.0;
    double beta = 0.0;
    bool needs_grad = false;
    Matrix value;
    Matrix adjoint;
    Matrix aux;
  };

  Var push(Node node);
  bool needs_grad(Var v) const { return nodes_[v.index_].needs_grad; }
  void check(Var v) const;
  void accumulate(std::int64_t index, const Matrix& delta);

  std::vector<Node> nodes_;
  std::vector<std::size_t> parameters_;
  std::size_t parameter_size_ = 0;
};

inline const Matrix& Var::value() const { return tape_->value(*this); }

// Free-function spellings so templated code can use one vocabulary for
// Matrix, Var and Dual<...>.
inline Var affine(Var w, Var x, Var b) { return w.tape()->affine(w, x, b); }
inline Var matmul(Var w, Var x) { return w.tape()->matmul(w, x); }
inline Var add(Var a, Var b) { return a.tape()->add(a, b); }
inline Var sub(Var a, Var b) { return a.tape()->sub(a, b); }
inline Var mul(Var a, Var b) { return a.tape()->mul(a, b); }
inline Var scale_shift(Var a, double alpha, double beta) {
  return a.tape()->scale_shift(a, alpha, beta);
}
inline Var sigmoid(Var a) { return a.tape()->sigmoid(a); }
inline Var tanh(Var a) { return a.tape()->tanh(a); }
inline Var square(Var a) { return a.tape()->square(a); }
inline Var sum(Var a) { return a.tape()->sum(a); }
inline Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  return a.tape()->slice_rows(a, start, count);
}

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace coolflex::numcore
