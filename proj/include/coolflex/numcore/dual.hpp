#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "coolflex/errors.hpp"
#include "coolflex/numcore/dense.hpp"
#include "coolflex/numcore/tape.hpp"

namespace coolflex::numcore {

/// Forward-mode dual number: a value and its derivative along one input
/// direction. T may be double, Matrix or a tape Var; with Var the tangent
/// is itself recorded on the tape and can be differentiated again in
/// reverse mode.
template <class T>
struct Dual {
  T value{};
  T tangent{};
};

// Generic rules, written against the primitive vocabulary (add, mul, ...).

template <class T>
Dual<T> add(const Dual<T>& a, const Dual<T>& b) {
  return {add(a.value, b.value), add(a.tangent, b.tangent)};
}

template <class T>
Dual<T> sub(const Dual<T>& a, const Dual<T>& b) {
  return {sub(a.value, b.value), sub(a.tangent, b.tangent)};
}

template <class T>
Dual<T> mul(const Dual<T>& a, const Dual<T>& b) {
  return {mul(a.value, b.value), add(mul(a.value, b.tangent), mul(a.tangent, b.value))};
}

template <class T>
Dual<T> scale_shift(const Dual<T>& a, double alpha, double beta) {
  return {scale_shift(a.value, alpha, beta), scale_shift(a.tangent, alpha, 0.0)};
}

template <class T>
Dual<T> square(const Dual<T>& a) {
  return {square(a.value), scale_shift(mul(a.value, a.tangent), 2.0, 0.0)};
}

template <class T>
Dual<T> sigmoid(const Dual<T>& a) {
  T s = sigmoid(a.value);
  T ds = mul(s, scale_shift(s, -1.0, 1.0));
  return {s, mul(ds, a.tangent)};
}

template <class T>
Dual<T> tanh(const Dual<T>& a) {
  T y = tanh(a.value);
  T dy = scale_shift(square(y), -1.0, 1.0);
  return {y, mul(dy, a.tangent)};
}

/// w * x + b for a dual input; weights carry no tangent.
template <class W, class T>
Dual<T> affine(const W& w, const Dual<T>& x, const W& b) {
  return {affine(w, x.value, b), matmul(w, x.tangent)};
}

template <class W, class T>
Dual<T> matmul(const W& w, const Dual<T>& x) {
  return {matmul(w, x.value), matmul(w, x.tangent)};
}

template <class T>
Dual<T> slice_rows(const Dual<T>& a, Eigen::Index start, Eigen::Index count) {
  return {slice_rows(a.value, start, count), slice_rows(a.tangent, start, count)};
}

// Scalar arithmetic, used by the psychrometric formulas.

using DualScalar = Dual<double>;

inline DualScalar operator+(DualScalar a, DualScalar b) { return {a.value + b.value, a.tangent + b.tangent}; }
inline DualScalar operator-(DualScalar a, DualScalar b) { return {a.value - b.value, a.tangent - b.tangent}; }
inline DualScalar operator*(DualScalar a, DualScalar b) {
  return {a.value * b.value, a.value * b.tangent + a.tangent * b.value};
}
inline DualScalar operator/(DualScalar a, DualScalar b) {
  return {a.value / b.value, (a.tangent * b.value - a.value * b.tangent) / (b.value * b.value)};
}
inline DualScalar operator-(DualScalar a) { return {-a.value, -a.tangent}; }
inline DualScalar operator+(DualScalar a, double b) { return {a.value + b, a.tangent}; }
inline DualScalar operator+(double a, DualScalar b) { return {a + b.value, b.tangent}; }
inline DualScalar operator-(DualScalar a, double b) { return {a.value - b, a.tangent}; }
inline DualScalar operator-(double a, DualScalar b) { return {a - b.value, -b.tangent}; }
inline DualScalar operator*(DualScalar a, double b) { return {a.value * b, a.tangent * b}; }
inline DualScalar operator*(double a, DualScalar b) { return {a * b.value, a * b.tangent}; }
inline DualScalar operator/(DualScalar a, double b) { return {a.value / b, a.tangent / b}; }
inline DualScalar operator/(double a, DualScalar b) {
  return {a / b.value, -a * b.tangent / (b.value * b.value)};
}
inline bool operator<(DualScalar a, double b) { return a.value < b; }
inline bool operator>(DualScalar a, double b) { return a.value > b; }

inline DualScalar exp(DualScalar a) {
  const double e = std::exp(a.value);
  return {e, e * a.tangent};
}
inline DualScalar sqrt(DualScalar a) {
  const double s = std::sqrt(a.value);
  return {s, a.tangent / (2.0 * s)};
}

inline double value_of(double x) { return x; }
inline double value_of(const DualScalar& x) { return x.value; }

namespace detail {
inline double ones_like(double) { return 1.0; }
inline double zeros_like(double) { return 0.0; }
inline Matrix ones_like(const Matrix& m) { return Matrix::Ones(m.rows(), m.cols()); }
inline Matrix zeros_like(const Matrix& m) { return Matrix::Zero(m.rows(), m.cols()); }
}  // namespace detail

/// Evaluates f on dual inputs where only input `seed` carries a unit
/// tangent. Returns (output value, d output / d input[seed]).
/// `f` takes std::span<const Dual<V>> and returns Dual<V>.
template <class V, class F>
std::pair<V, V> forward_derivative(F&& f, std::span<const V> inputs, std::size_t seed) {
  if (seed >= inputs.size()) throw ContractError("forward_derivative: seed index out of range");
  std::vector<Dual<V>> duals;
  duals.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    duals.push_back({inputs[i], i == seed ? detail::ones_like(inputs[i]) : detail::zeros_like(inputs[i])});
  }
  Dual<V> out = f(std::span<const Dual<V>>(duals));
  return {std::move(out.value), std::move(out.tangent)};
}

}  // namespace coolflex::numcore
