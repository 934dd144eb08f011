#include "coolflex/training/trainer.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>

#include "coolflex/errors.hpp"
#include "coolflex/training/losses.hpp"
#include "coolflex/training/optimizers.hpp"

namespace coolflex::training {
namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MissingInputError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (adam_iters < 0) throw ConfigError("train: adam_iters must be >= 0");
  if (!(adam_lr > 0.0)) throw ConfigError("train: adam_lr must be > 0");
  if (lbfgs_max_evals < 0) throw ConfigError("train: lbfgs_max_evals must be >= 0");
  if (lbfgs_memory < 1) throw ConfigError("train: lbfgs_memory must be >= 1");
  if (!(lambda >= 0.0)) throw ConfigError("train: lambda must be >= 0");
  if (batch_size < 0) throw ConfigError("train: batch_size must be >= 0");
  if (seq_len < 1) throw ConfigError("train: seq_len must be >= 1");
  if (chunk_columns < 1) throw ConfigError("train: chunk_columns must be >= 1");
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& cfg, TrainConfig base) {
  cfg.read("adam_iters", base.adam_iters);
  cfg.read("adam_lr", base.adam_lr);
  cfg.read("lbfgs_max_evals", base.lbfgs_max_evals);
  cfg.read("lbfgs_memory", base.lbfgs_memory);
  cfg.read("lambda", base.lambda);
  cfg.read("batch_size", base.batch_size);
  cfg.read("seq_len", base.seq_len);
  cfg.read("chunk_columns", base.chunk_columns);
  unsigned long long seed = base.seed;
  cfg.read("seed", seed);
  base.seed = seed;
  base.validate();
  return base;
}

const std::set<std::string>& TrainConfig::keys() {
  static const std::set<std::string> k{"adam_iters", "adam_lr",  "lbfgs_max_evals", "lbfgs_memory", "lambda",
                                       "batch_size", "seq_len", "seed",            "chunk_columns"};
  return k;
}

void TrainReport::write_curve(const std::filesystem::path& path) const {
  std::ofstream out = open_out(path);
  out << "iteration,loss,wall_ms\n";
  for (std::size_t i = 0; i < loss.size(); ++i) out << i << ',' << fmt(loss[i]) << ',' << fmt(wall_ms[i]) << '\n';
}

void TrainReport::write_summary(const std::filesystem::path& path) const {
  std::ofstream out = open_out(path);
  out << "key,value\n"
      << "model," << models::to_string(kind) << '\n'
      << "adam_iterations," << adam_iterations << '\n'
      << "lbfgs_evaluations," << lbfgs_evaluations << '\n'
      << "initial_loss," << fmt(initial_loss) << '\n'
      << "final_loss," << fmt(final_loss) << '\n'
      << "iterations_to_90," << (iterations_to_90 ? std::to_string(*iterations_to_90) : "none") << '\n'
      << "diverged," << (diverged ? 1 : 0) << '\n'
      << "line_search_warning," << (line_search_warning ? 1 : 0) << '\n'
      << "total_wall_ms," << fmt(wall_ms.empty() ? 0.0 : wall_ms.back()) << '\n';
}

std::optional<std::size_t> iterations_to_fraction(std::span<const double> loss, double fraction) {
  if (loss.empty()) return std::nullopt;
  const double threshold = fraction * loss.front();
  for (std::size_t i = 0; i < loss.size(); ++i) {
    if (loss[i] <= threshold) return i;
  }
  return std::nullopt;
}

TrainReport train(const models::ModelSpec& spec, const models::Normalizer& norm,
                  std::span<const models::Sample> samples, const whitebox::TowerParams& params,
                  const TrainConfig& cfg) {
  models::ModelSpec s = spec;
  if (models::is_recurrent(s.kind)) s.seq_len = cfg.seq_len;
  return train_from(models::ModelWeights::initialize(s, norm, cfg.seed), samples, params, cfg);
}

TrainReport train_from(models::ModelWeights start, std::span<const models::Sample> samples,
                       const whitebox::TowerParams& params, const TrainConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw ContractError("train: empty training slice");
  std::size_t used = samples.size();
  if (cfg.batch_size > 0) used = std::min(used, static_cast<std::size_t>(cfg.batch_size));

  const Objective objective(start.spec, start.norm, {samples.begin(), samples.begin() + static_cast<long>(used)},
                            params, cfg.lambda, static_cast<std::size_t>(cfg.chunk_columns));

  TrainReport report;
  report.kind = start.spec.kind;
  report.weights = std::move(start);
  const auto t0 = std::chrono::steady_clock::now();
  const auto record = [&](double loss) {
    report.loss.push_back(loss);
    report.wall_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  };
  const auto finish = [&] {
    report.iterations_to_90 = iterations_to_fraction(report.loss);
    if (!report.loss.empty()) report.initial_loss = report.loss.front();
    return report;
  };

  std::vector<double>& theta = report.weights.theta;
  std::vector<double> grad;
  AdamState state;
  const AdamOptions adam{cfg.adam_lr};
  for (int it = 0; it < cfg.adam_iters; ++it) {
    const double loss = objective(theta, grad);
    record(loss);
    bool finite = std::isfinite(loss);
    for (double g : grad) finite = finite && std::isfinite(g);
    if (!finite) {
      report.diverged = true;
      report.message = "non-finite loss at Adam iteration " + std::to_string(it);
      return finish();
    }
    adam_step(theta, grad, state, adam);
    ++report.adam_iterations;
  }

  if (cfg.lbfgs_max_evals > 0) {
    LbfgsOptions opts;
    opts.max_evals = static_cast<std::size_t>(cfg.lbfgs_max_evals);
    opts.memory = static_cast<std::size_t>(cfg.lbfgs_memory);
    try {
      const LbfgsResult r = lbfgs_minimize(objective, theta, opts, [&](double loss) {
        record(loss);
        ++report.lbfgs_evaluations;
      });
      theta = r.theta;
      report.final_loss = r.loss;
      report.line_search_warning = r.line_search_failed;
      report.message = "lbfgs stop: " + r.stop_reason;
    } catch (const DivergenceError& e) {
      report.diverged = true;
      report.message = e.what();
      return finish();
    }
  } else {
    report.final_loss = objective.terms(theta).total();
  }
  return finish();
}

}  // namespace coolflex::training
