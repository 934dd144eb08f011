#include "coolflex/numcore/tape.hpp"

#include <string>

#include "coolflex/errors.hpp"

namespace coolflex::numcore {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ")");
  }
}

}  // namespace

void Tape::check(Var v) const {
  if (v.tape_ != this || v.index_ >= nodes_.size()) {
    throw ContractError("variable does not belong to this tape");
  }
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Matrix value) {
  Node n{Op::Parameter};
  n.needs_grad = true;
  parameter_size_ += static_cast<std::size_t>(value.size());
  n.value = std::move(value);
  Var v = push(std::move(n));
  parameters_.push_back(v.index_);
  return v;
}

Var Tape::constant(Matrix value) {
  Node n{Op::Constant};
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::affine(Var w, Var x, Var b) {
  check(w), check(x), check(b);
  const Matrix& wv = value(w);
  const Matrix& xv = value(x);
  const Matrix& bv = value(b);
  if (wv.cols() != xv.rows() || bv.rows() != wv.rows() || bv.cols() != 1) {
    throw ContractError("affine: incompatible shapes");
  }
  Node n{Op::Affine};
  n.a = static_cast<std::int64_t>(w.index_);
  n.b = static_cast<std::int64_t>(x.index_);
  n.c = static_cast<std::int64_t>(b.index_);
  n.needs_grad = needs_grad(w) || needs_grad(x) || needs_grad(b);
  n.value.noalias() = wv * xv;
  n.value.colwise() += bv.col(0);
  return push(std::move(n));
}

Var Tape::matmul(Var w, Var x) {
  check(w), check(x);
  const Matrix& wv = value(w);
  const Matrix& xv = value(x);
  if (wv.cols() != xv.rows()) throw ContractError("matmul: incompatible shapes");
  Node n{Op::MatMul};
  n.a = static_cast<std::int64_t>(w.index_);
  n.b = static_cast<std::int64_t>(x.index_);
  n.needs_grad = needs_grad(w) || needs_grad(x);
  n.value.noalias() = wv * xv;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  check(a), check(b);
  require_same_shape(value(a), value(b), "add");
  Node n{Op::Add};
  n.a = static_cast<std::int64_t>(a.index_);
  n.b = static_cast<std::int64_t>(b.index_);
  n.needs_grad = needs_grad(a) || needs_grad(b);
  n.value = value(a) + value(b);
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  check(a), check(b);
  require_same_shape(value(a), value(b), "sub");
  Node n{Op::Sub};
  n.a = static_cast<std::int64_t>(a.index_);
  n.b = static_cast<std::int64_t>(b.index_);
  n.needs_grad = needs_grad(a) || needs_grad(b);
  n.value = value(a) - value(b);
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  check(a), check(b);
  require_same_shape(value(a), value(b), "mul");
  Node n{Op::Mul};
  n.a = static_cast<std::int64_t>(a.index_);
  n.b = static_cast<std::int64_t>(b.index_);
  n.needs_grad = needs_grad(a) || needs_grad(b);
  n.value = value(a).cwiseProduct(value(b));
  return push(std::move(n));
}

Var Tape::scale_shift(Var a, double alpha, double beta) {
  check(a);
  Node n{Op::ScaleShift};
  n.a = static_cast<std::int64_t>(a.index_);
  n.alpha = alpha;
  n.beta = beta;
  n.needs_grad = needs_grad(a);
  n.value = (alpha * value(a).array() + beta).matrix();
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  check(a);
  Node n{Op::Sigmoid};
  n.a = static_cast<std::int64_t>(a.index_);
  n.needs_grad = needs_grad(a);
  n.value = numcore::sigmoid(value(a));
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  check(a);
  Node n{Op::Tanh};
  n.a = static_cast<std::int64_t>(a.index_);
  n.needs_grad = needs_grad(a);
  n.value = value(a).array().tanh().matrix();
  return push(std::move(n));
}

Var Tape::square(Var a) {
  check(a);
  Node n{Op::Square};
  n.a = static_cast<std::int64_t>(a.index_);
  n.needs_grad = needs_grad(a);
  n.value = value(a).array().square().matrix();
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  check(a);
  Node n{Op::Sum};
  n.a = static_cast<std::int64_t>(a.index_);
  n.needs_grad = needs_grad(a);
  n.value = Matrix::Constant(1, 1, value(a).sum());
  return push(std::move(n));
}

Var Tape::slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  check(a);
  if (start < 0 || count < 0 || start + count > value(a).rows()) {
    throw ContractError("slice_rows: range out of bounds");
  }
  Node n{Op::SliceRows};
  n.a = static_cast<std::int64_t>(a.index_);
  n.alpha = static_cast<double>(start);
  n.needs_grad = needs_grad(a);
  n.value = value(a).middleRows(start, count);
  return push(std::move(n));
}

Var Tape::pointwise(Var a, Matrix value_out, Matrix derivative) {
  check(a);
  require_same_shape(value(a), value_out, "pointwise value");
  require_same_shape(value(a), derivative, "pointwise derivative");
  Node n{Op::Pointwise};
  n.a = static_cast<std::int64_t>(a.index_);
  n.needs_grad = needs_grad(a);
  n.value = std::move(value_out);
  n.aux = std::move(derivative);
  return push(std::move(n));
}

void Tape::accumulate(std::int64_t index, const Matrix& delta) {
  Node& n = nodes_[static_cast<std::size_t>(index)];
  if (!n.needs_grad) return;
  if (n.adjoint.size() == 0) {
    n.adjoint = delta;
  } else {
    n.adjoint += delta;
  }
}

std::vector<double> Tape::backward(Var root) {
  check(root);
  if (value(root).rows() != 1 || value(root).cols() != 1) {
    throw ContractError("backward: root must be a scalar (1x1) node");
  }
  for (Node& n : nodes_) n.adjoint.resize(0, 0);
  nodes_[root.index_].adjoint = Matrix::Ones(1, 1);

  for (std::size_t i = root.index_ + 1; i-- > 0;) {
    // The node is read through an index because accumulate() writes into
    // other elements of nodes_; no reallocation happens during the sweep.
    if (!nodes_[i].needs_grad || nodes_[i].adjoint.size() == 0) continue;
    const Node& n = nodes_[i];
    const Matrix& dy = n.adjoint;
    switch (n.op) {
      case Op::Parameter:
      case Op::Constant:
        break;
      case Op::Affine:
      case Op::MatMul: {
        const Matrix& w = nodes_[static_cast<std::size_t>(n.a)].value;
        const Matrix& x = nodes_[static_cast<std::size_t>(n.b)].value;
        if (nodes_[static_cast<std::size_t>(n.a)].needs_grad) {
          accumulate(n.a, dy * x.transpose());
        }
        if (nodes_[static_cast<std::size_t>(n.b)].needs_grad) {
          accumulate(n.b, w.transpose() * dy);
        }
        if (n.op == Op::Affine && nodes_[static_cast<std::size_t>(n.c)].needs_grad) {
          accumulate(n.c, dy.rowwise().sum());
        }
        break;
      }
      case Op::Add:
        accumulate(n.a, dy);
        accumulate(n.b, dy);
        break;
      case Op::Sub:
        accumulate(n.a, dy);
        if (nodes_[static_cast<std::size_t>(n.b)].needs_grad) accumulate(n.b, -dy);
        break;
      case Op::Mul: {
        const Matrix& a = nodes_[static_cast<std::size_t>(n.a)].value;
        const Matrix& b = nodes_[static_cast<std::size_t>(n.b)].value;
        if (nodes_[static_cast<std::size_t>(n.a)].needs_grad) accumulate(n.a, dy.cwiseProduct(b));
        if (nodes_[static_cast<std::size_t>(n.b)].needs_grad) accumulate(n.b, dy.cwiseProduct(a));
        break;
      }
      case Op::ScaleShift:
        accumulate(n.a, n.alpha * dy);
        break;
      case Op::Sigmoid:
        accumulate(n.a, (dy.array() * n.value.array() * (1.0 - n.value.array())).matrix());
        break;
      case Op::Tanh:
        accumulate(n.a, (dy.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case Op::Square: {
        const Matrix& a = nodes_[static_cast<std::size_t>(n.a)].value;
        accumulate(n.a, (2.0 * dy.array() * a.array()).matrix());
        break;
      }
      case Op::Sum: {
        const Matrix& a = nodes_[static_cast<std::size_t>(n.a)].value;
        accumulate(n.a, Matrix::Constant(a.rows(), a.cols(), dy(0, 0)));
        break;
      }
      case Op::SliceRows: {
        Node& src = nodes_[static_cast<std::size_t>(n.a)];
        if (!src.needs_grad) break;
        if (src.adjoint.size() == 0) src.adjoint = Matrix::Zero(src.value.rows(), src.value.cols());
        src.adjoint.middleRows(static_cast<Eigen::Index>(n.alpha), dy.rows()) += dy;
        break;
      }
      case Op::Pointwise:
        accumulate(n.a, dy.cwiseProduct(n.aux));
        break;
    }
  }

  std::vector<double> grad;
  grad.reserve(parameter_size_);
  for (std::size_t p : parameters_) {
    const Node& n = nodes_[p];
    if (n.adjoint.size() == 0) {
      grad.insert(grad.end(), static_cast<std::size_t>(n.value.size()), 0.0);
    } else {
      grad.insert(grad.end(), n.adjoint.data(), n.adjoint.data() + n.adjoint.size());
    }
  }
  return grad;
}

void Tape::clear() {
  nodes_.clear();
  parameters_.clear();
  parameter_size_ = 0;
}

}  // namespace coolflex::numcore
