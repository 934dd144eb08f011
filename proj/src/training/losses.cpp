#include "coolflex/training/losses.hpp"

#include <algorithm>
#include <cmath>

#include "coolflex/errors.hpp"
#include "coolflex/models/networks.hpp"
#include "coolflex/numcore/allocator.hpp"
#include "coolflex/numcore/tape.hpp"
#include "coolflex/whitebox/tower_model.hpp"

namespace coolflex::training {
namespace {

using models::Sample;
using numcore::Dual;
using numcore::Matrix;
using numcore::Tape;
using numcore::Var;

constexpr double kMinutesPerDay = 1440.0;
constexpr double kGuard = 20.0;

std::vector<Var> register_parameters(Tape& tape, const models::ModelSpec& spec, std::span<const double> theta) {
  const models::WeightLayout layout = models::WeightLayout::for_spec(spec);
  if (theta.size() != layout.size()) throw ContractError("loss: parameter vector has the wrong length");
  std::vector<Var> vars;
  vars.reserve(layout.blocks().size());
  for (const models::WeightBlock& b : layout.blocks()) {
    vars.push_back(tape.parameter(Eigen::Map<const Matrix>(theta.data() + b.offset, b.rows, b.cols)));
  }
  return vars;
}

Matrix time_tangent(Eigen::Index cols) {
  Matrix t = Matrix::Zero(models::ModelSpec::data_input_dim(), cols);
  t.row(2).setOnes();
  return t;
}

/// Scaled physics term H * 60 / range as a function of the normalized
/// estimate, with its derivative. The temperature is clamped to the guard
/// band so that wild trial points during optimization stay evaluable.
class ScaledRhs {
 public:
  ScaledRhs(const models::Normalizer& norm, const whitebox::TowerParams& params)
      : norm_(norm), params_(params), scale_(residual_scale(norm)) {}

  void apply(const Matrix& y, std::span<const Sample* const> samples, Matrix& value, Matrix& deriv) const {
    value.resize(1, y.cols());
    deriv.resize(1, y.cols());
    const double lo = params_.T_b_min - kGuard;
    const double hi = params_.T_b_max + kGuard;
    for (Eigen::Index i = 0; i < y.cols(); ++i) {
      const Sample& s = *samples[static_cast<std::size_t>(i)];
      const double T = norm_.kelvin(y(0, i));
      const bool inside = std::isfinite(T) && T > lo && T < hi;
      const double Tc = inside ? T : std::clamp(std::isfinite(T) ? T : lo, lo, hi);
      const Dual<double> h = whitebox::physics_rhs_with_derivative(Tc, s.total_power(), s.weather, params_);
      value(0, i) = h.value * scale_;
      deriv(0, i) = inside ? h.tangent * scale_ * norm_.range() : 0.0;
    }
  }

 private:
  models::Normalizer norm_;
  whitebox::TowerParams params_;
  double scale_;
};

double l2_term(std::span<const double> theta, double lambda, double n, std::vector<double>* grad) {
  double ss = 0.0;
  for (double v : theta) ss += v * v;
  if (grad) {
    for (std::size_t i = 0; i < theta.size(); ++i) (*grad)[i] += 2.0 * lambda / n * theta[i];
  }
  return lambda / n * ss;
}

}  // namespace

Objective::Objective(models::ModelSpec spec, models::Normalizer norm, std::vector<Sample> batch,
                     whitebox::TowerParams params, double lambda, std::size_t chunk_columns)
    : spec_(spec),
      norm_(norm),
      batch_(std::move(batch)),
      params_(params),
      lambda_(lambda),
      chunk_columns_(chunk_columns) {
  numcore::retain_freed_memory();
  spec_.validate();
  if (batch_.empty()) throw ContractError("loss: empty batch");
  if (lambda_ < 0.0) throw ConfigError("loss: lambda must be >= 0");
  if (chunk_columns_ == 0) throw ConfigError("loss: chunk_columns must be >= 1");
  dimension_ = models::WeightLayout::for_spec(spec_).size();
  if (models::is_recurrent(spec_.kind)) {
    const auto k = static_cast<std::size_t>(spec_.seq_len);
    windows_ = batch_.size() / k;
    if (windows_ == 0) throw ContractError("loss: batch shorter than one window (C = 0)");
    used_ = windows_ * k;
    for (std::size_t c = 0; c < windows_; ++c) {
      models::check_window(std::span<const Sample>(batch_).subspan(c * k, k));
    }
  } else {
    used_ = batch_.size();
  }
}

double Objective::operator()(std::span<const double> theta, std::vector<double>& grad) const {
  grad.assign(dimension_, 0.0);
  return evaluate(theta, &grad).total();
}

LossTerms Objective::terms(std::span<const double> theta) const { return evaluate(theta, nullptr); }

LossTerms Objective::evaluate(std::span<const double> theta, std::vector<double>* grad) const {
  LossTerms t = models::is_recurrent(spec_.kind) ? evaluate_recurrent(theta, grad) : evaluate_dense(theta, grad);
  t.l2 = l2_term(theta, lambda_, static_cast<double>(used_), grad);
  return t;
}

LossTerms Objective::evaluate_dense(std::span<const double> theta, std::vector<double>* grad) const {
  const double n = static_cast<double>(used_);
  const auto cols = static_cast<Eigen::Index>(used_);
  Matrix targets(1, cols);
  for (Eigen::Index i = 0; i < cols; ++i) targets(0, i) = norm_.temperature(batch_[static_cast<std::size_t>(i)].target);

  Tape tape;
  const auto net = models::make_dense(spec_, register_parameters(tape, spec_, theta));
  const Var x = tape.constant(models::input_matrix(batch_, norm_));
  const Var target = tape.constant(targets);

  LossTerms terms;
  Var root;
  if (models::is_physics_informed(spec_.kind)) {
    const Dual<Var> y = models::dense_forward(net, Dual<Var>{x, tape.constant(time_tangent(cols))});
    const Var data = sum(square(y.value - target));
    std::vector<const Sample*> ptrs;
    ptrs.reserve(used_);
    for (const Sample& s : batch_) ptrs.push_back(&s);
    Matrix hv, hd;
    ScaledRhs(norm_, params_).apply(y.value.value(), ptrs, hv, hd);
    const Var h = tape.pointwise(y.value, hv, hd);
    const Var phys = sum(square(scale_shift(y.tangent, 1.0 / kMinutesPerDay, 0.0) - h));
    terms.data = data.value()(0, 0) / n;
    terms.physics = phys.value()(0, 0) / n;
    root = scale_shift(data + phys, 1.0 / n, 0.0);
  } else {
    const Var y = models::dense_forward(net, x);
    const Var data = sum(square(y - target));
    terms.data = data.value()(0, 0) / n;
    root = scale_shift(data, 1.0 / n, 0.0);
  }
  if (grad) {
    const std::vector<double> g = tape.backward(root);
    for (std::size_t i = 0; i < g.size(); ++i) (*grad)[i] += g[i];
  }
  return terms;
}

LossTerms Objective::evaluate_recurrent(std::span<const double> theta, std::vector<double>* grad) const {
  const double n = static_cast<double>(used_);
  const auto k_len = static_cast<std::size_t>(spec_.seq_len);
  const bool physics = models::is_physics_informed(spec_.kind);
  const bool feedback = models::has_feedback(spec_.kind);
  const ScaledRhs rhs(norm_, params_);
  LossTerms terms;

  Tape tape;
  for (std::size_t c0 = 0; c0 < windows_; c0 += chunk_columns_) {
    const std::size_t count = std::min(chunk_columns_, windows_ - c0);
    const auto cols = static_cast<Eigen::Index>(count);
    tape.clear();
    const auto net = models::make_lstm(spec_, register_parameters(tape, spec_, theta));

    // Step k of every window in the chunk forms one column block.
    std::vector<std::vector<const Sample*>> step_samples(k_len);
    std::vector<Sample> gathered(count);
    std::vector<Var> targets(k_len);
    std::vector<Var> inputs(k_len);
    std::vector<Var> fb(feedback ? k_len : 0);
    for (std::size_t k = 0; k < k_len; ++k) {
      Matrix tgt(1, cols);
      Matrix prev(1, cols);
      for (std::size_t c = 0; c < count; ++c) {
        const Sample& s = batch_[(c0 + c) * k_len + k];
        step_samples[k].push_back(&s);
        gathered[c] = s;
        tgt(0, static_cast<Eigen::Index>(c)) = norm_.temperature(s.target);
        prev(0, static_cast<Eigen::Index>(c)) = norm_.temperature(s.previous);
      }
      inputs[k] = tape.constant(models::input_matrix(gathered, norm_));
      targets[k] = tape.constant(tgt);
      if (feedback) fb[k] = tape.constant(prev);
    }

    Var data;
    Var phys;
    if (physics) {
      const Var tangent = tape.constant(time_tangent(cols));
      const Var zero = tape.constant(Matrix::Zero(1, cols));
      std::vector<Dual<Var>> xs;
      std::vector<Dual<Var>> fbs;
      for (std::size_t k = 0; k < k_len; ++k) {
        xs.push_back({inputs[k], tangent});
        if (feedback) fbs.push_back({fb[k], zero});
      }
      const auto out = models::lstm_sequence<Dual<Var>>(net, xs, feedback ? models::Feedback::Teacher
                                                                            : models::Feedback::None, fbs);
      Matrix hv, hd;
      for (std::size_t k = 0; k < k_len; ++k) {
        const Var d = sum(square(out[k].value - targets[k]));
        rhs.apply(out[k].value.value(), step_samples[k], hv, hd);
        const Var h = tape.pointwise(out[k].value, hv, hd);
        const Var p = sum(square(scale_shift(out[k].tangent, 1.0 / kMinutesPerDay, 0.0) - h));
        data = k == 0 ? d : data + d;
        phys = k == 0 ? p : phys + p;
      }
      terms.physics += phys.value()(0, 0) / n;
    } else {
      const auto out = models::lstm_sequence<Var>(net, inputs, models::Feedback::None);
      for (std::size_t k = 0; k < k_len; ++k) {
        const Var d = sum(square(out[k] - targets[k]));
        data = k == 0 ? d : data + d;
      }
    }
    terms.data += data.value()(0, 0) / n;
    if (grad) {
      const Var root = scale_shift(physics ? data + phys : data, 1.0 / n, 0.0);
      const std::vector<double> g = tape.backward(root);
      for (std::size_t i = 0; i < g.size(); ++i) (*grad)[i] += g[i];
    }
  }
  return terms;
}

namespace {

double loss_for(models::ModelKind kind, const models::ModelWeights& w, std::span<const Sample> batch,
                const whitebox::TowerParams& params, double lambda) {
  models::ModelSpec spec = w.spec;
  spec.kind = kind;
  const Objective obj(spec, w.norm, {batch.begin(), batch.end()}, params, lambda);
  return obj.terms(w.theta).total();
}

}  // namespace

double loss_nn(const models::ModelWeights& w, std::span<const Sample> batch, double lambda) {
  if (models::is_recurrent(w.spec.kind)) throw ContractError("loss_nn: needs a feed-forward layout");
  return loss_for(models::ModelKind::NN, w, batch, {}, lambda);
}

double loss_phynn(const models::ModelWeights& w, std::span<const Sample> batch, const whitebox::TowerParams& params,
                  double lambda) {
  if (models::is_recurrent(w.spec.kind)) throw ContractError("loss_phynn: needs a feed-forward layout");
  return loss_for(models::ModelKind::PhyNN, w, batch, params, lambda);
}

double loss_phylstm(const models::ModelWeights& w, std::span<const Sample> batch, const whitebox::TowerParams& params,
                    double lambda) {
  if (!models::is_recurrent(w.spec.kind)) throw ContractError("loss_phylstm: needs a recurrent layout");
  return loss_for(w.spec.kind, w, batch, params, lambda);
}

}  // namespace coolflex::training
