#include "coolflex/models/forward.hpp"

#include <cmath>

#include "coolflex/errors.hpp"
#include "coolflex/whitebox/tower_model.hpp"

namespace coolflex::models {
namespace {

using numcore::Dual;
using numcore::Matrix;
using DualMatrix = Dual<Matrix>;

constexpr double kSlotHours = 1.0 / 60.0;

void require_kind(const ModelWeights& w, bool ok, const char* what) {
  if (!ok) throw ContractError(std::string(what) + ": not valid for model kind " + to_string(w.spec.kind));
}

/// Tangent of the inputs when every time input moves with t: unit on the
/// time row, zero elsewhere.
Matrix time_tangent(Eigen::Index cols) {
  Matrix t = Matrix::Zero(ModelSpec::data_input_dim(), cols);
  t.row(2).setOnes();
  return t;
}

DualMatrix dual_inputs(std::span<const Sample> samples, const Normalizer& norm) {
  return {input_matrix(samples, norm), time_tangent(static_cast<Eigen::Index>(samples.size()))};
}

/// Inputs for step k of `count` windows of length `len` laid out back to back.
DualMatrix window_step(std::span<const Sample> samples, std::size_t len, std::size_t count, std::size_t k,
                       const Normalizer& norm) {
  std::vector<Sample> column;
  column.reserve(count);
  for (std::size_t c = 0; c < count; ++c) column.push_back(samples[c * len + k]);
  return dual_inputs(column, norm);
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

PhysicsOutput physics_output(const Normalizer& norm, double value, double tangent, const Sample& s,
                             const whitebox::TowerParams& params) {
  PhysicsOutput out;
  out.T_b = norm.kelvin(value);
  out.dT_dt = norm.kelvin_per_second(tangent);
  out.residual = out.dT_dt - whitebox::physics_rhs(out.T_b, s.total_power(), s.weather, params);
  return out;
}

}  // namespace

std::vector<Sample> make_samples(std::span<const datagen::SimRecord> records, bool noisy_target,
                                 const datagen::SimRecord* before) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const datagen::SimRecord& r = records[i];
    Sample s;
    s.p_f1 = r.P_F1;
    s.p_f2 = r.P_F2;
    s.hours = r.hours();
    s.weather = r.weather();
    s.target = noisy_target ? r.T_b_noisy : r.T_b;
    if (i > 0) {
      s.previous = records[i - 1].T_b_noisy;
    } else {
      s.previous = before ? before->T_b_noisy : r.T_b_noisy;
    }
    out.push_back(s);
  }
  return out;
}

void check_window(std::span<const Sample> window) {
  for (std::size_t k = 1; k < window.size(); ++k) {
    if (std::abs(window[k].hours - window[k - 1].hours - kSlotHours) > 1e-9) {
      throw ContractError("window timestamps must increase by one minute per step");
    }
  }
}

Matrix input_matrix(std::span<const Sample> samples, const Normalizer& norm) {
  Matrix x(ModelSpec::data_input_dim(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    x(0, c) = norm.power(samples[i].p_f1);
    x(1, c) = norm.power(samples[i].p_f2);
    x(2, c) = Normalizer::time(samples[i].hours);
  }
  return x;
}

double nn_forward_normalized(const ModelWeights& w, double p_f1, double p_f2, double t_enc) {
  return nn_forward_dual(w, p_f1, p_f2, t_enc).value;
}

double nn_forward(const ModelWeights& w, double p_f1, double p_f2, double t_enc) {
  return w.norm.kelvin(nn_forward_normalized(w, p_f1, p_f2, t_enc));
}

Dual<double> nn_forward_dual(const ModelWeights& w, double p_f1, double p_f2, double t_enc) {
  require_kind(w, !is_recurrent(w.spec.kind), "nn_forward");
  const DenseNet<Matrix> net = make_dense(w.spec, w.unpack());
  Matrix x(3, 1);
  x << w.norm.power(p_f1), w.norm.power(p_f2), t_enc;
  const DualMatrix out = dense_forward(net, DualMatrix{x, time_tangent(1)});
  return {out.value(0, 0), out.tangent(0, 0)};
}

PhysicsOutput phynn_forward(const ModelWeights& w, const Sample& s, const whitebox::TowerParams& params) {
  const Dual<double> y = nn_forward_dual(w, s.p_f1, s.p_f2, Normalizer::time(s.hours));
  return physics_output(w.norm, y.value, y.tangent, s, params);
}

double lstm_forward(const ModelWeights& w, std::span<const Sample> window) {
  return lstm_forward_sequence(w, window).back();
}

std::vector<double> lstm_forward_sequence(const ModelWeights& w, std::span<const Sample> window) {
  require_kind(w, is_recurrent(w.spec.kind) && !has_feedback(w.spec.kind), "lstm_forward");
  if (window.size() != static_cast<std::size_t>(w.spec.seq_len)) {
    throw ContractError("lstm_forward: window length must equal seq_len");
  }
  check_window(window);
  const LstmNet<Matrix> net = make_lstm(w.spec, w.unpack());
  std::vector<Matrix> xs;
  for (const Sample& s : window) xs.push_back(input_matrix(std::span(&s, 1), w.norm));
  const std::vector<Matrix> out = lstm_sequence<Matrix>(net, xs, Feedback::None);
  std::vector<double> t;
  for (const Matrix& m : out) t.push_back(w.norm.kelvin(m(0, 0)));
  return t;
}

std::vector<PhysicsOutput> phylstm_forward(const ModelWeights& w, std::span<const Sample> window,
                                           const whitebox::TowerParams& params, bool teacher_forcing,
                                           std::optional<double> feedback0) {
  require_kind(w, is_recurrent(w.spec.kind), "phylstm_forward");
  if (window.size() != static_cast<std::size_t>(w.spec.seq_len)) {
    throw ContractError("phylstm_forward: window length must equal seq_len");
  }
  check_window(window);
  const LstmNet<Matrix> net = make_lstm(w.spec, w.unpack());

  std::vector<DualMatrix> xs;
  std::vector<DualMatrix> fb;
  for (std::size_t k = 0; k < window.size(); ++k) {
    xs.push_back(dual_inputs(window.subspan(k, 1), w.norm));
    if (teacher_forcing || k == 0) {
      const double prev = (k == 0 && feedback0) ? *feedback0 : window[k].previous;
      fb.push_back({scalar(w.norm.temperature(prev)), scalar(0.0)});
    }
  }
  Feedback mode = Feedback::None;
  if (has_feedback(w.spec.kind)) mode = teacher_forcing ? Feedback::Teacher : Feedback::FreeRunning;
  const std::vector<DualMatrix> out = lstm_sequence<DualMatrix>(net, xs, mode, fb);

  std::vector<PhysicsOutput> result;
  for (std::size_t k = 0; k < out.size(); ++k) {
    result.push_back(physics_output(w.norm, out[k].value(0, 0), out[k].tangent(0, 0), window[k], params));
  }
  return result;
}

Prediction predict(const ModelWeights& w, std::span<const Sample> samples) {
  Prediction p;
  p.T_b.reserve(samples.size());
  p.dT_dt.reserve(samples.size());
  if (samples.empty()) return p;

  if (!is_recurrent(w.spec.kind)) {
    const DenseNet<Matrix> net = make_dense(w.spec, w.unpack());
    const DualMatrix out = dense_forward(net, dual_inputs(samples, w.norm));
    for (Eigen::Index i = 0; i < out.value.cols(); ++i) {
      p.T_b.push_back(w.norm.kelvin(out.value(0, i)));
      p.dT_dt.push_back(w.norm.kelvin_per_second(out.tangent(0, i)));
    }
    return p;
  }

  check_window(samples);
  const LstmNet<Matrix> net = make_lstm(w.spec, w.unpack());
  const std::size_t len = static_cast<std::size_t>(w.spec.seq_len);

  if (!has_feedback(w.spec.kind)) {
    // Windows are independent: batch all full windows as columns.
    const std::size_t full = samples.size() / len;
    const auto run = [&](std::span<const Sample> part, std::size_t wlen, std::size_t count) {
      std::vector<DualMatrix> xs;
      for (std::size_t k = 0; k < wlen; ++k) xs.push_back(window_step(part, wlen, count, k, w.norm));
      return lstm_sequence<DualMatrix>(net, xs, Feedback::None);
    };
    if (full > 0) {
      const auto out = run(samples.first(full * len), len, full);
      for (std::size_t c = 0; c < full; ++c) {
        for (std::size_t k = 0; k < len; ++k) {
          p.T_b.push_back(w.norm.kelvin(out[k].value(0, static_cast<Eigen::Index>(c))));
          p.dT_dt.push_back(w.norm.kelvin_per_second(out[k].tangent(0, static_cast<Eigen::Index>(c))));
        }
      }
    }
    const std::size_t rest = samples.size() - full * len;
    if (rest > 0) {
      const auto out = run(samples.subspan(full * len), rest, 1);
      for (const DualMatrix& m : out) {
        p.T_b.push_back(w.norm.kelvin(m.value(0, 0)));
        p.dT_dt.push_back(w.norm.kelvin_per_second(m.tangent(0, 0)));
      }
    }
    return p;
  }

  double feedback = w.norm.temperature(samples.front().previous);
  for (std::size_t start = 0; start < samples.size(); start += len) {
    const auto window = samples.subspan(start, std::min(len, samples.size() - start));
    std::vector<DualMatrix> xs;
    for (std::size_t k = 0; k < window.size(); ++k) xs.push_back(dual_inputs(window.subspan(k, 1), w.norm));
    const std::vector<DualMatrix> fb{{scalar(feedback), scalar(0.0)}};
    const auto out = lstm_sequence<DualMatrix>(net, xs, Feedback::FreeRunning, fb);
    for (const DualMatrix& m : out) {
      p.T_b.push_back(w.norm.kelvin(m.value(0, 0)));
      p.dT_dt.push_back(w.norm.kelvin_per_second(m.tangent(0, 0)));
    }
    feedback = out.back().value(0, 0);
  }
  return p;
}

}  // namespace coolflex::models
