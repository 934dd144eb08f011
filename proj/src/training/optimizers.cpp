#include "coolflex/training/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "coolflex/errors.hpp"

namespace coolflex::training {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

/// d = -H g by the two-loop recursion with H0 = gamma I.
std::vector<double> search_direction(const std::deque<Pair>& pairs, const std::vector<double>& g) {
  std::vector<double> q = g;
  std::vector<double> alpha(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alpha[i] = pairs[i].rho * dot(pairs[i].s, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * pairs[i].y[j];
  }
  if (!pairs.empty()) {
    const Pair& last = pairs.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double beta = pairs[i].rho * dot(pairs[i].y, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += pairs[i].s[j] * (alpha[i] - beta);
  }
  for (double& v : q) v = -v;
  return q;
}

struct LinePoint {
  double a = 0.0;
  double f = 0.0;
  double d = 0.0;  ///< directional derivative
};

/// Minimizer of the cubic through two points with slopes, safeguarded to
/// the interior of the bracket; falls back to bisection.
double interpolate(const LinePoint& lo, const LinePoint& hi) {
  const double mid = 0.5 * (lo.a + hi.a);
  if (!std::isfinite(hi.f) || !std::isfinite(hi.d)) return mid;
  const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
  const double disc = d1 * d1 - lo.d * hi.d;
  if (disc < 0.0) return mid;
  const double d2 = std::copysign(std::sqrt(disc), hi.a - lo.a);
  const double a = hi.a - (hi.a - lo.a) * (hi.d + d2 - d1) / (hi.d - lo.d + 2.0 * d2);
  const double left = std::min(lo.a, hi.a);
  const double right = std::max(lo.a, hi.a);
  const double margin = 0.1 * (right - left);
  if (!std::isfinite(a) || a < left + margin || a > right - margin) return mid;
  return a;
}

}  // namespace

void adam_step(std::vector<double>& theta, std::span<const double> grad, AdamState& state, const AdamOptions& o) {
  if (grad.size() != theta.size()) throw ContractError("adam: gradient and parameters differ in size");
  for (double g : grad) {
    if (!std::isfinite(g)) throw DivergenceError("adam: non-finite gradient");
  }
  if (state.m.empty()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
  }
  if (state.m.size() != theta.size()) throw ContractError("adam: state does not match parameters");
  ++state.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * grad[i];
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    theta[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

LbfgsResult lbfgs_minimize(const numcore::ValueAndGradient& f, std::vector<double> x0, const LbfgsOptions& o,
                           const std::function<void(double)>& on_eval) {
  if (o.memory == 0) throw ConfigError("lbfgs: memory must be >= 1");
  if (o.max_evals == 0) throw ConfigError("lbfgs: max_evals must be >= 1");

  LbfgsResult result;
  const std::size_t n = x0.size();
  std::vector<double> trial(n);
  std::vector<double> trial_grad;

  const auto evaluate = [&](const std::vector<double>& x, std::vector<double>& g) {
    const double v = f(x, g);
    ++result.evaluations;
    if (on_eval) on_eval(v);
    bool finite = std::isfinite(v);
    for (double gi : g) finite = finite && std::isfinite(gi);
    if (finite && v < result.loss) {
      result.loss = v;
      result.theta = x;
    }
    return finite ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<double> x = std::move(x0);
  std::vector<double> g;
  result.loss = std::numeric_limits<double>::infinity();
  double fx = evaluate(x, g);
  if (!std::isfinite(fx)) throw DivergenceError("lbfgs: loss is not finite at the start point");

  std::deque<Pair> pairs;
  while (true) {
    if (norm2(g) < o.grad_tol) {
      result.stop_reason = "gradient norm";
      break;
    }
    if (result.evaluations >= o.max_evals) {
      result.stop_reason = "max evaluations";
      break;
    }
    if (o.max_iterations > 0 && result.iterations >= o.max_iterations) {
      result.stop_reason = "max iterations";
      break;
    }

    std::vector<double> d = search_direction(pairs, g);
    double slope = dot(d, g);
    if (!(slope < 0.0)) {
      pairs.clear();
      d = g;
      for (double& v : d) v = -v;
      slope = dot(d, g);
    }
    const double a0 = pairs.empty() ? std::min(1.0, 1.0 / norm2(g)) : 1.0;

    const LinePoint origin{0.0, fx, slope};
    double trial_f = 0.0;
    const auto probe = [&](double a) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + a * d[i];
      trial_f = evaluate(trial, trial_grad);
      return LinePoint{a, trial_f, std::isfinite(trial_f) ? dot(trial_grad, d) : 0.0};
    };
    const auto sufficient = [&](const LinePoint& p) { return p.f <= fx + o.c1 * p.a * slope; };
    const auto curvature = [&](const LinePoint& p) { return std::abs(p.d) <= -o.c2 * slope; };

    std::optional<LinePoint> accepted;
    std::size_t line_evals = 0;
    const auto budget_left = [&] { return line_evals < o.max_line_evals && result.evaluations < o.max_evals; };

    const auto zoom = [&](LinePoint lo, LinePoint hi) -> std::optional<LinePoint> {
      while (budget_left()) {
        ++line_evals;
        const LinePoint p = probe(interpolate(lo, hi));
        if (!sufficient(p) || p.f >= lo.f) {
          hi = p;
        } else {
          if (curvature(p)) return p;
          if (p.d * (hi.a - lo.a) >= 0.0) hi = lo;
          lo = p;
        }
        if (std::abs(hi.a - lo.a) < 1e-16 * std::max(1.0, lo.a)) break;
      }
      return std::nullopt;
    };

    LinePoint prev = origin;
    double a = a0;
    while (budget_left()) {
      ++line_evals;
      const LinePoint p = probe(a);
      if (!sufficient(p) || (line_evals > 1 && p.f >= prev.f)) {
        accepted = zoom(prev, p);
        break;
      }
      if (curvature(p)) {
        accepted = p;
        break;
      }
      if (p.d >= 0.0) {
        accepted = zoom(p, prev);
        break;
      }
      prev = p;
      a *= 2.0;
    }

    if (!accepted) {
      if (result.evaluations >= o.max_evals) {
        result.stop_reason = "max evaluations";
      } else {
        result.line_search_failed = true;
        result.stop_reason = "line search failed";
      }
      break;
    }

    // The accepted point is the last one probed, so trial/trial_grad hold it.
    ++result.iterations;
    Pair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = trial[i] - x[i];
      pair.y[i] = trial_grad[i] - g[i];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-12 * norm2(pair.s) * norm2(pair.y)) {
      pair.rho = 1.0 / sy;
      pairs.push_back(std::move(pair));
      if (pairs.size() > o.memory) pairs.pop_front();
    }
    const double f_new = accepted->f;
    const double change = std::abs(fx - f_new) / std::max({std::abs(fx), std::abs(f_new), 1e-300});
    x = trial;
    g = trial_grad;
    fx = f_new;
    if (change < o.rel_tol) {
      result.stop_reason = "relative change";
      break;
    }
  }
  return result;
}

}  // namespace coolflex::training
