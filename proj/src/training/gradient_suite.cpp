#include "coolflex/training/gradient_suite.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "coolflex/datagen/dataset.hpp"
#include "coolflex/errors.hpp"
#include "coolflex/training/losses.hpp"

namespace coolflex::training {
namespace {

models::ModelSpec suite_spec(models::ModelKind kind, const SuiteOptions& o) {
  models::ModelSpec s;
  s.kind = kind;
  s.hidden_layers = o.hidden_layers;
  s.hidden_width = o.hidden_width;
  s.seq_len = o.seq_len;
  return s;
}

/// Per-step normalized outputs with every timestamp shifted by `shift` days.
std::vector<double> shifted_outputs(const models::ModelWeights& w, std::vector<models::Sample> window, double shift,
                                    const whitebox::TowerParams& params, bool teacher) {
  for (models::Sample& s : window) s.hours += 24.0 * shift;
  std::vector<double> y;
  if (models::is_recurrent(w.spec.kind)) {
    for (const models::PhysicsOutput& o : models::phylstm_forward(w, window, params, teacher)) {
      y.push_back(w.norm.temperature(o.T_b));
    }
  } else {
    for (const models::Sample& s : window) {
      y.push_back(models::nn_forward_normalized(w, s.p_f1, s.p_f2, models::Normalizer::time(s.hours)));
    }
  }
  return y;
}

}  // namespace

std::vector<models::Sample> suite_samples(std::uint64_t seed, int count, const whitebox::TowerParams& params) {
  if (count < 1 || count > datagen::kMinutesPerDay - 2) throw ContractError("suite_samples: count out of range");
  datagen::DatasetConfig cfg;
  cfg.seed = seed;
  cfg.n_days = 2;
  const auto records = datagen::generate_dataset(params, cfg);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  // Day 1, away from both midnights so a small time shift never wraps.
  std::uniform_int_distribution<int> pick(1, datagen::kMinutesPerDay - count - 1);
  const std::size_t start = datagen::kMinutesPerDay + static_cast<std::size_t>(pick(rng));
  return models::make_samples(std::span(records).subspan(start, static_cast<std::size_t>(count)), true,
                              &records[start - 1]);
}

models::ModelWeights suite_weights(const models::ModelSpec& spec, const models::Normalizer& norm, std::uint64_t seed) {
  models::ModelWeights w = models::ModelWeights::initialize(spec, norm, seed);
  std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> bias(-0.2, 0.2);
  const models::WeightLayout layout = w.layout();
  for (const models::WeightBlock& b : layout.blocks()) {
    if (!b.name.ends_with(".b")) continue;
    for (std::size_t i = 0; i < b.size(); ++i) w.theta[b.offset + i] = bias(rng);
  }
  return w;
}

numcore::GradCheckReport check_loss_gradient(models::ModelKind kind, std::uint64_t seed,
                                             const whitebox::TowerParams& params, const SuiteOptions& opts) {
  const models::ModelSpec spec = suite_spec(kind, opts);
  const models::Normalizer norm = models::Normalizer::from_params(params);
  const models::ModelWeights w = suite_weights(spec, norm, seed);
  const Objective objective(spec, norm, suite_samples(seed, opts.batch, params), params, opts.lambda);
  return numcore::grad_check(objective, w.theta, opts.eps);
}

DerivativeCheck check_time_derivative(models::ModelKind kind, std::uint64_t seed, const whitebox::TowerParams& params,
                                      const SuiteOptions& opts) {
  if (!models::is_physics_informed(kind)) throw ContractError("check_time_derivative: needs a physics-informed kind");
  const models::ModelSpec spec = suite_spec(kind, opts);
  const models::Normalizer norm = models::Normalizer::from_params(params);
  const models::ModelWeights w = suite_weights(spec, norm, seed);
  const int n = models::is_recurrent(kind) ? opts.seq_len : opts.batch;
  const std::vector<models::Sample> window = suite_samples(seed, n, params);
  const double h = 1e-5;  // [day]

  std::vector<bool> modes{true};
  if (models::has_feedback(kind)) modes.push_back(false);

  DerivativeCheck out;
  for (bool teacher : modes) {
    std::vector<double> forward;
    if (models::is_recurrent(kind)) {
      for (const models::PhysicsOutput& o : models::phylstm_forward(w, window, params, teacher)) {
        forward.push_back(o.dT_dt);
      }
    } else {
      for (const models::Sample& s : window) forward.push_back(models::phynn_forward(w, s, params).dT_dt);
    }
    const auto up = shifted_outputs(w, window, h, params, teacher);
    const auto down = shifted_outputs(w, window, -h, params, teacher);
    double scale = 0.0;
    for (double v : forward) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < forward.size(); ++i) {
      const double numeric = norm.kelvin_per_second((up[i] - down[i]) / (2.0 * h));
      const double d = std::abs(forward[i] - numeric);
      out.max_abs = std::max(out.max_abs, d);
      out.max_rel = std::max(out.max_rel, d / std::max({std::abs(forward[i]), std::abs(numeric), 1e-3 * scale}));
    }
  }
  return out;
}

}  // namespace coolflex::training
