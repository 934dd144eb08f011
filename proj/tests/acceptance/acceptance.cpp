// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coolflex/cli/app.hpp"
#include "coolflex/datagen/dataset.hpp"
#include "coolflex/flexibility/flexibility.hpp"
#include "coolflex/training/evaluation.hpp"
#include "coolflex/training/gradient_suite.hpp"
#include "coolflex/training/trainer.hpp"
#include "coolflex/training/walk_forward.hpp"
#include "coolflex/whitebox/tower_model.hpp"

namespace fs = std::filesystem;
using namespace coolflex;
using models::ModelKind;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& name, const Outcome& o, double secs) {
  std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

void run_criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(id, name, o, seconds_since(t0));
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The loss column of a training curve; wall times differ run to run.
std::string loss_column(const fs::path& curve) {
  std::istringstream in(slurp(curve));
  std::string line, out;
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    out += line.substr(0, b) + '\n';
  }
  return out;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "coolflex");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::printf("  cli error (%d): %s", code, err.str().c_str());
  return code;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const whitebox::TowerParams params;
  double worst = 0.0;
  std::string per_kind;
  for (ModelKind kind : models::kAllKinds) {
    double kind_worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      kind_worst = std::max(kind_worst, training::check_loss_gradient(kind, seed, params).max_rel);
    }
    per_kind += models::to_string(kind) + "=" + fmt("%.1e", kind_worst) + " ";
    worst = std::max(worst, kind_worst);
  }
  return {worst < 1e-4, "max relative error " + per_kind + "(tol 1e-4)"};
}

Outcome time_derivative_correctness() {
  const whitebox::TowerParams params;
  double worst = 0.0;
  std::string per_kind;
  for (ModelKind kind : {ModelKind::PhyNN, ModelKind::PhyLSTM_WOF, ModelKind::PhyLSTM_WF}) {
    double kind_worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      kind_worst = std::max(kind_worst, training::check_time_derivative(kind, seed, params).max_rel);
    }
    per_kind += models::to_string(kind) + "=" + fmt("%.1e", kind_worst) + " ";
    worst = std::max(worst, kind_worst);
  }
  return {worst < 1e-4, "max relative error " + per_kind + "(tol 1e-4)"};
}

const std::vector<datagen::SimRecord>& desk_dataset(std::uint64_t seed) {
  static std::map<std::uint64_t, std::vector<datagen::SimRecord>> cache;
  auto it = cache.find(seed);
  if (it == cache.end()) {
    datagen::DatasetConfig cfg;
    cfg.seed = seed;
    cfg.n_days = 8;
    it = cache.emplace(seed, datagen::generate_dataset(whitebox::TowerParams{}, cfg)).first;
  }
  return it->second;
}

Outcome integrator_oracle() {
  const whitebox::TowerParams params;
  const auto& recs = desk_dataset(1);
  const std::size_t begin = datagen::kMinutesPerDay;  // day 1
  whitebox::TowerState euler{recs[begin].T_b};
  whitebox::TowerState rk4 = euler;
  double gap = 0.0;
  for (std::size_t m = begin; m < begin + datagen::kMinutesPerDay; ++m) {
    const whitebox::TowerInputs in{recs[m].total_power(), recs[m].weather()};
    euler = whitebox::step_euler(euler, in, 60.0, params);
    for (int s = 0; s < 60; ++s) rk4 = whitebox::step_rk4(rk4, in, 1.0, params);
    gap = std::max(gap, std::abs(euler.T_b - rk4.T_b));
  }
  return {gap < 0.05, "max |T_euler - T_rk4| = " + fmt("%.4g", gap) + " K over 1440 min (tol 0.05)"};
}

Outcome residual_vanishing() {
  const whitebox::TowerParams params;
  datagen::DatasetConfig cfg;
  cfg.seed = 1;
  cfg.n_days = 2;
  cfg.noise_sigma = 0.0;
  const auto recs = datagen::generate_dataset(params, cfg);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
    const double derivative = (recs[i + 1].T_b - recs[i].T_b) / 60.0;
    sum += std::abs(derivative - whitebox::physics_rhs(recs[i].T_b, recs[i].total_power(), recs[i].weather(), params));
  }
  const double mean = sum / static_cast<double>(recs.size() - 1);
  return {mean < 1e-7, "mean |f| = " + fmt("%.3g", mean) + " K/s (tol 1e-7)"};
}

Outcome soc_range() {
  const whitebox::TowerParams params;
  const auto& recs = desk_dataset(1);
  double lo = 1e300, hi = -1e300;
  for (const auto& r : recs) {
    const double s = flexibility::soc(std::clamp(r.T_b, params.T_b_min, params.T_b_max), params);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  const double top = flexibility::soc(params.T_b_max, params);
  const double bottom = flexibility::soc(params.T_b_min, params);
  const bool ok = lo >= 0.0 && hi <= 16.2 && bottom == 0.0 && std::abs(top - 16.2) < 1e-12;
  return {ok, "trajectory SoC in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "], limits map to [" +
                  fmt("%.3f", bottom) + ", " + fmt("%.12g", top) + "]"};
}

// ---------------------------------------------------------------------------

struct DeskRun {
  ModelKind kind;
  std::uint64_t seed;
  training::TrainReport report;
  double mae60 = 0.0;
  double mae1440 = 0.0;
  double soc_mae60 = 0.0;
  double temp_mae60 = 0.0;
  double seconds = 0.0;
};

std::vector<DeskRun> g_desk;

training::TrainConfig desk_config(std::uint64_t seed) {
  training::TrainConfig cfg;
  cfg.seed = seed;
  cfg.adam_iters = 1000;
  cfg.lbfgs_max_evals = 300;
  return cfg;
}

void run_desk_scale() {
  const whitebox::TowerParams params;
  const models::Normalizer norm = models::Normalizer::from_params(params);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto& recs = desk_dataset(seed);
    const std::span<const datagen::SimRecord> all(recs);
    const std::size_t split = 7 * datagen::kMinutesPerDay;
    const auto train = models::make_samples(all.first(split), true);
    const auto test = models::make_samples(all.subspan(split), false, &recs[split - 1]);
    for (ModelKind kind : models::kAllKinds) {
      const auto t0 = Clock::now();
      models::ModelSpec spec;
      spec.kind = kind;
      DeskRun run{kind, seed, training::train(spec, norm, train, params, desk_config(seed))};
      run.seconds = seconds_since(t0);
      if (!run.report.diverged) {
        const std::size_t horizons[] = {60, 1440};
        const auto eval = training::evaluate(run.report.weights, test, horizons);
        run.mae60 = eval.buckets[0].mean;
        run.mae1440 = eval.buckets[1].mean;
        double t = 0.0;
        for (std::size_t i = 0; i < 60; ++i) t += std::abs(eval.estimate[i] - eval.truth[i]);
        run.temp_mae60 = t / 60.0;
        run.soc_mae60 = flexibility::soc_mae(eval.estimate, eval.truth, 60, params);
      }
      std::printf("  seed %llu %-12s %6.1f s  loss %.3g -> %.3g  it90 %s  mae60 %.3f K  mae1440 %.3f K%s\n",
                  static_cast<unsigned long long>(seed), models::to_string(kind).c_str(), run.seconds,
                  run.report.initial_loss, run.report.final_loss,
                  run.report.iterations_to_90 ? std::to_string(*run.report.iterations_to_90).c_str() : "none",
                  run.mae60, run.mae1440, run.report.diverged ? "  DIVERGED" : "");
      std::fflush(stdout);
      g_desk.push_back(std::move(run));
    }
  }
}

const DeskRun& desk(ModelKind kind, std::uint64_t seed) {
  for (const DeskRun& r : g_desk) {
    if (r.kind == kind && r.seed == seed) return r;
  }
  throw std::runtime_error("missing desk run");
}

Outcome desk_end_to_end() {
  const auto t0 = Clock::now();
  run_desk_scale();
  const double secs = seconds_since(t0);
  int diverged = 0;
  for (const DeskRun& r : g_desk) diverged += r.report.diverged ? 1 : 0;
  int wins = 0;
  double worst_wf = 0.0;
  std::string detail;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const double wf = desk(ModelKind::PhyLSTM_WF, seed).mae60;
    const double nn = desk(ModelKind::NN, seed).mae60;
    wins += wf <= nn ? 1 : 0;
    worst_wf = std::max(worst_wf, wf);
    detail += "seed " + std::to_string(seed) + " WF " + fmt("%.3f", wf) + " vs NN " + fmt("%.3f", nn) + "; ";
  }
  const bool ok = diverged == 0 && wins >= 2 && worst_wf < 1.35 && secs < 1800.0;
  return {ok, std::to_string(diverged) + " diverged, " + detail + "WF <= NN on " + std::to_string(wins) +
                  "/3, worst WF 60-min MAE " + fmt("%.3f", worst_wf) + " K (tol 1.35), " + fmt("%.0f", secs) +
                  " s (target 1800)"};
}

Outcome convergence_speed() {
  const auto it90 = [](const DeskRun& r) {
    return r.report.iterations_to_90 ? static_cast<long>(*r.report.iterations_to_90) : 1L << 40;
  };
  int faster = 0;
  std::string detail;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const long phy = it90(desk(ModelKind::PhyNN, seed));
    const long nn = it90(desk(ModelKind::NN, seed));
    faster += phy <= nn ? 1 : 0;
    detail += "seed " + std::to_string(seed) + " PhyNN " + std::to_string(phy) + " vs NN " + std::to_string(nn) + "; ";
  }
  std::string late;
  for (const DeskRun& r : g_desk) {
    if (!r.report.iterations_to_90 || *r.report.iterations_to_90 >= 1000) {
      late += models::to_string(r.kind) + "/seed" + std::to_string(r.seed) + "(" +
              (r.report.iterations_to_90 ? std::to_string(*r.report.iterations_to_90) : std::string("never")) + ") ";
    }
  }
  const bool ok = faster >= 2 && late.empty();
  return {ok, detail + "PhyNN <= NN on " + std::to_string(faster) + "/3; beyond 1000 Adam iterations: " +
                  (late.empty() ? std::string("none") : late)};
}

Outcome linearity() {
  const whitebox::TowerParams params;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> level(params.T_b_min, params.T_b_max);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> truth(1440), est(1440);
    const double base = level(rng);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      truth[i] = base + 2.0 * std::sin(0.004 * static_cast<double>(i) + trial);
      est[i] = truth[i] + 0.5 * noise(rng);
    }
    for (std::size_t h : {60u, 1440u}) {
      double t = 0.0;
      for (std::size_t i = 0; i < h; ++i) t += std::abs(est[i] - truth[i]);
      t /= static_cast<double>(h);
      const double s = flexibility::soc_mae(est, truth, h, params);
      worst = std::max(worst, std::abs(s - params.eta_inv * t) / (params.eta_inv * t));
    }
  }
  for (const DeskRun& r : g_desk) {
    if (r.report.diverged) continue;
    worst = std::max(worst, std::abs(r.soc_mae60 - params.eta_inv * r.temp_mae60) / (params.eta_inv * r.temp_mae60));
  }
  return {worst <= 1e-12, "max relative deviation " + fmt("%.2e", worst) + " over 200 random and " +
                              std::to_string(g_desk.size()) + " model trajectories (tol 1e-12)"};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "coolflex_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::uint64_t> sim, weights, curve;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / ("run" + std::to_string(pass));
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "n_days = 3\ntrain_days = 2\ntest_days = 1\nadam_iters = 50\n"
                                      "lbfgs_max_evals = 20\nseq_len = 30\n";
    const std::string cfg = (dir / "run.cfg").string();
    if (cli({"simulate", "--config", cfg, "--seed", "7", "--out", dir.string()}) != 0) return {false, "simulate failed"};
    sim.push_back(fnv1a(slurp(dir / "dataset.csv")));
    for (const char* model : {"phynn", "phylstm_wf"}) {
      if (cli({"train", "--model", model, "--config", cfg, "--seed", "7", "--out", dir.string()}) != 0) {
        return {false, std::string("train failed for ") + model};
      }
      const fs::path run = dir / (std::string(model) + "_d2");
      weights.push_back(fnv1a(slurp(run / "weights.txt")));
      curve.push_back(fnv1a(loss_column(run / "report.csv")));
    }
  }
  fs::remove_all(root);
  const bool ok = sim[0] == sim[1] && weights[0] == weights[2] && weights[1] == weights[3] && curve[0] == curve[2] &&
                  curve[1] == curve[3];
  char buf[256];
  std::snprintf(buf, sizeof buf, "dataset %016llx/%016llx, phynn weights %016llx/%016llx, wf weights %016llx/%016llx",
                static_cast<unsigned long long>(sim[0]), static_cast<unsigned long long>(sim[1]),
                static_cast<unsigned long long>(weights[0]), static_cast<unsigned long long>(weights[2]),
                static_cast<unsigned long long>(weights[1]), static_cast<unsigned long long>(weights[3]));
  return {ok, buf};
}

Outcome walk_forward_conformance() {
  int checked = 0;
  for (int months : {1, 3, 5, 7}) {
    const int days = 30 * months + 4 * 30 + 5;
    const auto folds = training::walk_forward_folds(months, days);
    if (folds.size() != 5u) return {false, "expected five folds for months " + std::to_string(months)};
    for (int k = 0; k < 5; ++k) {
      const training::FoldPlan& f = folds[static_cast<std::size_t>(k)];
      const int train_start = 30 * k;
      const int train_end = train_start + 30 * months;
      const bool ok = f.fold_index == k && f.train_start_day == train_start && f.train_end_day() == train_end &&
                      f.test_start_day() == train_end && f.test_end_day() == train_end + 5;
      if (!ok) return {false, "months " + std::to_string(months) + " fold " + std::to_string(k) + " differs"};
      ++checked;
    }
    bool rejected = false;
    try {
      training::walk_forward_folds(months, days - 1);
    } catch (const ConfigError&) {
      rejected = true;
    }
    if (!rejected) return {false, "a dataset one day short was accepted for months " + std::to_string(months)};
  }
  return {true, std::to_string(checked) + " folds match the 30-day stride and 5-day test windows"};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  run_criterion(1, "gradient correctness", gradient_correctness);
  run_criterion(2, "time-derivative correctness", time_derivative_correctness);
  run_criterion(3, "integrator oracle", integrator_oracle);
  run_criterion(4, "residual vanishing", residual_vanishing);
  run_criterion(5, "SoC range", soc_range);
  run_criterion(6, "desk-scale end-to-end", desk_end_to_end);
  run_criterion(7, "convergence speed", convergence_speed);
  run_criterion(8, "flexibility linearity", linearity);
  run_criterion(9, "determinism", determinism);
  run_criterion(10, "walk-forward conformance", walk_forward_conformance);
  std::printf("%d criteria failed, %.0f s total\n", g_failures, seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
