#include <doctest.h>

#include <cmath>
#include <random>

#include "coolflex/errors.hpp"
#include "coolflex/kvconfig.hpp"
#include "coolflex/numcore/dual.hpp"
#include "coolflex/numcore/gradcheck.hpp"
#include "coolflex/numcore/tape.hpp"

using namespace coolflex;
using namespace coolflex::numcore;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// Two-layer sigmoid net with an MSE head, written once on the tape and once
// with plain matrices so the finite differences never touch the tape.
double net_loss_plain(std::span<const double> th, const Matrix& x, const Matrix& y) {
  Eigen::Map<const Matrix> w1(th.data(), 5, 3), b1(th.data() + 15, 5, 1), w2(th.data() + 20, 1, 5),
      b2(th.data() + 25, 1, 1);
  const Matrix h = sigmoid(affine(Matrix(w1), x, Matrix(b1)));
  const Matrix out = affine(Matrix(w2), h, Matrix(b2));
  return (out - y).array().square().sum() / static_cast<double>(x.cols());
}

double net_loss_tape(std::span<const double> th, const Matrix& x, const Matrix& y, std::vector<double>& g) {
  Tape t;
  Var w1 = t.parameter(Eigen::Map<const Matrix>(th.data(), 5, 3));
  Var b1 = t.parameter(Eigen::Map<const Matrix>(th.data() + 15, 5, 1));
  Var w2 = t.parameter(Eigen::Map<const Matrix>(th.data() + 20, 1, 5));
  Var b2 = t.parameter(Eigen::Map<const Matrix>(th.data() + 25, 1, 1));
  Var out = affine(w2, sigmoid(affine(w1, t.constant(x), b1)), b2);
  Var loss = scale_shift(sum(square(out - t.constant(y))), 1.0 / static_cast<double>(x.cols()), 0.0);
  g = t.backward(loss);
  return loss.value()(0, 0);
}

}  // namespace

TEST_CASE("backward: square and sigmoid at known points") {
  Tape t;
  Var a = t.parameter(scalar(3.0));
  CHECK(t.backward(square(a))[0] == doctest::Approx(6.0).epsilon(1e-15));

  Tape s;
  Var b = s.parameter(scalar(0.0));
  CHECK(s.backward(sigmoid(b))[0] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("backward: rejects a non-scalar root and leaves values unchanged") {
  Tape t;
  Var a = t.parameter(Matrix::Ones(2, 1));
  Var y = sigmoid(a);
  const Matrix before = y.value();
  CHECK_THROWS_AS(t.backward(y), ContractError);
  t.backward(sum(y));
  CHECK(y.value() == before);
}

TEST_CASE("backward: root adjoint is one and constants get no gradient") {
  Tape t;
  Var c = t.constant(scalar(2.0));
  Var p = t.parameter(scalar(5.0));
  const auto g = t.backward(p * c);
  REQUIRE(g.size() == 1);
  CHECK(g[0] == 2.0);
  CHECK(t.parameter_size() == 1);
}

TEST_CASE("backward: every op against central differences") {
  std::mt19937_64 rng(11);
  const Matrix x = random_matrix(rng, 3, 7);
  const Matrix y = random_matrix(rng, 1, 7);
  std::vector<double> theta(26);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (double& v : theta) v = u(rng);

  const ValueAndGradient f = [&](std::span<const double> th, std::vector<double>& g) {
    return net_loss_tape(th, x, y, g);
  };
  std::vector<double> g;
  CHECK(f(theta, g) == doctest::Approx(net_loss_plain(theta, x, y)).epsilon(1e-14));
  const GradCheckReport r = grad_check(f, theta);
  CHECK(r.max_rel < 1e-6);
  CHECK(r.max_scaled < 1e-6);

  // Remaining ops: matmul, sub, mul, tanh, slice_rows, pointwise.
  const ValueAndGradient h = [&](std::span<const double> th, std::vector<double>& grad) {
    Tape t;
    Var w = t.parameter(Eigen::Map<const Matrix>(th.data(), 4, 3));
    Var z = matmul(w, t.constant(x));
    Var top = slice_rows(z, 0, 2);
    Var bottom = slice_rows(z, 2, 2);
    Var m = tanh(top) * bottom - scale_shift(top, 0.5, 0.1);
    const Matrix v = m.value().array().exp().matrix();
    Var e = t.pointwise(m, v, v);
    Var root = sum(e);
    grad = t.backward(root);
    return root.value()(0, 0);
  };
  std::vector<double> th2(12);
  for (double& v : th2) v = u(rng);
  CHECK(grad_check(h, th2).max_rel < 1e-6);
}

TEST_CASE("backward: identical tapes give bitwise identical gradients") {
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(rng, 3, 9);
  const Matrix y = random_matrix(rng, 1, 9);
  std::vector<double> theta(26, 0.3);
  std::vector<double> g1, g2;
  net_loss_tape(theta, x, y, g1);
  net_loss_tape(theta, x, y, g2);
  CHECK(g1 == g2);
}

TEST_CASE("dual rules") {
  const DualScalar a{2.0, 1.0};
  const DualScalar b{3.0, 0.5};
  const DualScalar p = a * b;
  CHECK(p.value == 6.0);
  CHECK(p.tangent == 2.0 * 0.5 + 1.0 * 3.0);

  const Dual<Matrix> s = sigmoid(Dual<Matrix>{scalar(0.3), scalar(2.0)});
  const double sv = 1.0 / (1.0 + std::exp(-0.3));
  CHECK(s.value(0, 0) == doctest::Approx(sv).epsilon(1e-15));
  CHECK(s.tangent(0, 0) == doctest::Approx(sv * (1 - sv) * 2.0).epsilon(1e-14));

  const DualScalar q = DualScalar{1.5, 1.0} / DualScalar{0.5, 0.0};
  CHECK(q.tangent == doctest::Approx(2.0));
  CHECK(exp(DualScalar{0.0, 1.0}).tangent == 1.0);
  CHECK(sqrt(DualScalar{4.0, 1.0}).tangent == doctest::Approx(0.25));
}

TEST_CASE("forward_derivative: identity, sigmoid and seed validation") {
  const std::vector<double> in{0.0, 5.0};
  const auto id = [](std::span<const DualScalar> v) { return v[0]; };
  CHECK(forward_derivative<double>(id, in, 0).second == 1.0);
  CHECK(forward_derivative<double>(id, in, 1).second == 0.0);

  const auto sig = [](std::span<const Dual<Matrix>> v) { return sigmoid(v[0]); };
  const std::vector<Matrix> m{scalar(0.0)};
  CHECK(forward_derivative<Matrix>(sig, m, 0).second(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(forward_derivative<double>(id, in, 2), ContractError);
}

TEST_CASE("forward mode agrees with reverse mode on the same scalar path") {
  std::mt19937_64 rng(5);
  const Matrix w1 = random_matrix(rng, 6, 1);
  const Matrix b1 = random_matrix(rng, 6, 1);
  const Matrix w2 = random_matrix(rng, 1, 6);
  const Matrix b2 = random_matrix(rng, 1, 1);
  for (double t0 : {-1.3, 0.0, 0.4, 2.2}) {
    const Dual<Matrix> y =
        affine(w2, tanh(sigmoid(affine(w1, Dual<Matrix>{scalar(t0), scalar(1.0)}, b1))), b2);
    Tape tape;
    Var t = tape.parameter(scalar(t0));
    Var out = affine(tape.constant(w2), tanh(sigmoid(affine(tape.constant(w1), t, tape.constant(b1)))),
                     tape.constant(b2));
    CHECK(std::abs(y.tangent(0, 0) - tape.backward(out)[0]) < 1e-10);
  }
}

TEST_CASE("forward over reverse: gradient of a squared time derivative") {
  // L(w) = (d/dt sigmoid(w t))^2 at t = 0.7; the tangent lives on the tape.
  const double t0 = 0.7;
  const auto loss = [&](double w) {
    const double s = 1.0 / (1.0 + std::exp(-w * t0));
    const double d = s * (1 - s) * w;
    return d * d;
  };
  Tape tape;
  Var w = tape.parameter(scalar(1.3));
  const Dual<Var> x{tape.constant(scalar(t0)), tape.constant(scalar(1.0))};
  const Dual<Var> y = sigmoid(Dual<Var>{matmul(w, x.value), matmul(w, x.tangent)});
  Var root = sum(square(y.tangent));
  CHECK(root.value()(0, 0) == doctest::Approx(loss(1.3)).epsilon(1e-14));
  const double numeric = (loss(1.3 + 1e-6) - loss(1.3 - 1e-6)) / 2e-6;
  CHECK(tape.backward(root)[0] == doctest::Approx(numeric).epsilon(1e-8));
}

TEST_CASE("grad_check: quadratic, constant and bad input") {
  const ValueAndGradient quad = [](std::span<const double> th, std::vector<double>& g) {
    g.assign(th.size(), 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) {
      s += th[i] * th[i];
      g[i] = 2 * th[i];
    }
    return s;
  };
  const std::vector<double> p{0.3, -1.2, 4.0};
  CHECK(grad_check(quad, p).max_scaled < 1e-8);

  const ValueAndGradient constant = [](std::span<const double> th, std::vector<double>& g) {
    g.assign(th.size(), 0.0);
    return 4.2;
  };
  const GradCheckReport c = grad_check(constant, p);
  CHECK(c.max_scaled == 0.0);
  CHECK(c.max_rel == 0.0);

  CHECK_THROWS_AS(grad_check(quad, p, 0.0), ContractError);
  const ValueAndGradient nan = [](std::span<const double> th, std::vector<double>& g) {
    g.assign(th.size(), 0.0);
    return std::nan("");
  };
  CHECK_THROWS_AS(grad_check(nan, p), DivergenceError);
}

TEST_CASE("key = value config") {
  const auto cfg = KeyValueConfig::parse("# comment\nalpha = 1.5\n  beta=7 \nname = hull\n\n");
  CHECK(cfg.get_double("alpha") == 1.5);
  CHECK(cfg.get_int("beta") == 7);
  CHECK(cfg.get("name") == "hull");
  int b = 0;
  cfg.read("beta", b);
  CHECK(b == 7);
  double missing = 3.0;
  cfg.read("gamma", missing);
  CHECK(missing == 3.0);
  CHECK_THROWS_AS(cfg.get("gamma"), ConfigError);
  CHECK_THROWS_AS(cfg.get_int("alpha"), ConfigError);
  CHECK_THROWS_AS(cfg.require_known({"alpha", "beta"}), ConfigError);
  CHECK_NOTHROW(cfg.require_known({"alpha", "beta", "name"}));
  CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign"), ConfigError);
}
