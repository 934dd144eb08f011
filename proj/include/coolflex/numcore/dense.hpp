#pragma once

// Plain (non-recorded) versions of the primitive operations. The same names
// are overloaded for tape variables in tape.hpp and for dual numbers in
// dual.hpp, so network code can be written once and evaluated on any of them.

#include <Eigen/Dense>
#include <cmath>

namespace coolflex::numcore {

/// Column-major dense matrix. Batched activations are stored one sample per column.
using Matrix = Eigen::MatrixXd;

inline double add(double a, double b) { return a + b; }
inline double sub(double a, double b) { return a - b; }
inline double mul(double a, double b) { return a * b; }
inline double scale_shift(double a, double alpha, double beta) { return alpha * a + beta; }
inline double square(double a) { return a * a; }
inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }
inline double tanh(double a) { return std::tanh(a); }

inline Matrix add(const Matrix& a, const Matrix& b) { return a + b; }
inline Matrix sub(const Matrix& a, const Matrix& b) { return a - b; }
inline Matrix mul(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b); }
inline Matrix scale_shift(const Matrix& a, double alpha, double beta) {
  return (alpha * a.array() + beta).matrix();
}
inline Matrix square(const Matrix& a) { return a.array().square().matrix(); }
inline Matrix sigmoid(const Matrix& a) {
  return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}
inline Matrix tanh(const Matrix& a) { return a.array().tanh().matrix(); }

/// w * x + b, with the column vector b broadcast across the batch.
inline Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b) {
  Matrix y = w * x;
  y.colwise() += b.col(0);
  return y;
}
inline Matrix matmul(const Matrix& w, const Matrix& x) { return w * x; }
inline Matrix slice_rows(const Matrix& a, Eigen::Index start, Eigen::Index count) {
  return a.middleRows(start, count);
}
inline double sum(const Matrix& a) { return a.sum(); }

}  // namespace coolflex::numcore
