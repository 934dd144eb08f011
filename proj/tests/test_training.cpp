#include <doctest.h>

#include <cmath>
#include <numeric>

#include "coolflex/datagen/dataset.hpp"
#include "coolflex/errors.hpp"
#include "coolflex/training/evaluation.hpp"
#include "coolflex/training/losses.hpp"
#include "coolflex/training/optimizers.hpp"
#include "coolflex/training/trainer.hpp"
#include "coolflex/training/walk_forward.hpp"
#include "coolflex/whitebox/tower_model.hpp"

using namespace coolflex;
using namespace coolflex::training;
using models::ModelKind;
using models::Sample;

namespace {

const std::vector<datagen::SimRecord>& day_records() {
  static const auto recs = [] {
    datagen::DatasetConfig cfg;
    cfg.n_days = 2;
    cfg.seed = 21;
    return datagen::generate_dataset(whitebox::TowerParams{}, cfg);
  }();
  return recs;
}

std::vector<Sample> slice(int start, int count, bool noisy = true) {
  const auto& r = day_records();
  return models::make_samples(std::span(r).subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(count)),
                              noisy, start > 0 ? &r[static_cast<std::size_t>(start - 1)] : nullptr);
}

models::ModelWeights weights_for(ModelKind kind, int seq_len = 8, std::uint64_t seed = 3) {
  models::ModelSpec spec;
  spec.kind = kind;
  spec.seq_len = seq_len;
  return models::ModelWeights::initialize(spec, models::Normalizer{}, seed);
}

}  // namespace

TEST_CASE("NN loss against a hand computation") {
  const auto batch = slice(400, 10);
  const auto w = weights_for(ModelKind::NN);
  double mse = 0.0;
  for (const Sample& s : batch) {
    const double y = models::nn_forward_normalized(w, s.p_f1, s.p_f2, models::Normalizer::time(s.hours));
    const double e = y - w.norm.temperature(s.target);
    mse += e * e;
  }
  mse /= 10.0;
  double ss = 0.0;
  for (double v : w.theta) ss += v * v;
  CHECK(loss_nn(w, batch, 0.0) == doctest::Approx(mse).epsilon(1e-12));
  CHECK(loss_nn(w, batch, 0.5) == doctest::Approx(mse + 0.5 / 10.0 * ss).epsilon(1e-12));
}

TEST_CASE("perfect fit with zero weights leaves only the L2 term") {
  auto w = weights_for(ModelKind::NN);
  std::fill(w.theta.begin(), w.theta.end(), 0.0);
  auto batch = slice(0, 6);
  for (Sample& s : batch) s.target = w.norm.T_b_min;
  CHECK(loss_nn(w, batch, 1.0) == 0.0);
  w.theta.back() = 0.3;
  const double data = 0.09;
  CHECK(loss_nn(w, batch, 0.0) == doctest::Approx(data).epsilon(1e-12));
  CHECK(loss_nn(w, batch, 2.0) == doctest::Approx(data + 2.0 / 6.0 * 0.09).epsilon(1e-12));
}

TEST_CASE("PhyNN loss is data plus scaled squared residuals") {
  const whitebox::TowerParams params;
  const auto batch = slice(700, 12);
  const auto w = weights_for(ModelKind::PhyNN);
  const double scale = residual_scale(w.norm);
  CHECK(scale == doctest::Approx(60.0 / 27.0));
  double data = 0.0, phys = 0.0;
  for (const Sample& s : batch) {
    const auto out = models::phynn_forward(w, s, params);
    data += std::pow(w.norm.temperature(out.T_b) - w.norm.temperature(s.target), 2);
    phys += std::pow(out.residual * scale, 2);
  }
  const models::Normalizer norm;
  const Objective obj(w.spec, norm, batch, params, 0.0);
  const LossTerms t = obj.terms(w.theta);
  CHECK(t.data == doctest::Approx(data / 12.0).epsilon(1e-10));
  CHECK(t.physics == doctest::Approx(phys / 12.0).epsilon(1e-9));
  CHECK(loss_phynn(w, batch, params, 0.0) == doctest::Approx(t.total()).epsilon(1e-12));
  CHECK(loss_nn(w, batch, 0.0) == doctest::Approx(t.data).epsilon(1e-12));
}

TEST_CASE("recurrent loss drops the partial window") {
  const whitebox::TowerParams params;
  const auto batch = slice(100, 125);
  auto w = weights_for(ModelKind::PhyLSTM_WOF, 60);
  const Objective obj(w.spec, w.norm, batch, params, 0.0);
  CHECK(obj.windows() == 2u);
  CHECK(obj.used_samples() == 120u);
  const Objective trimmed(w.spec, w.norm, std::vector<Sample>(batch.begin(), batch.begin() + 120), params, 0.0);
  CHECK(obj.terms(w.theta).total() == trimmed.terms(w.theta).total());
  CHECK_THROWS_AS(Objective(w.spec, w.norm, slice(0, 59), params, 0.0), ContractError);
}

TEST_CASE("recurrent data term matches the forward pass") {
  const whitebox::TowerParams params;
  const auto batch = slice(900, 16);
  const auto w = weights_for(ModelKind::PhyLSTM_WF, 8);
  double data = 0.0, phys = 0.0;
  for (int c = 0; c < 2; ++c) {
    const auto out = models::phylstm_forward(w, std::span(batch).subspan(static_cast<std::size_t>(8 * c), 8), params, true);
    for (std::size_t k = 0; k < 8; ++k) {
      const Sample& s = batch[static_cast<std::size_t>(8 * c) + k];
      data += std::pow(w.norm.temperature(out[k].T_b) - w.norm.temperature(s.target), 2);
      phys += std::pow(out[k].residual * residual_scale(w.norm), 2);
    }
  }
  const LossTerms t = Objective(w.spec, w.norm, batch, params, 0.0).terms(w.theta);
  CHECK(t.data == doctest::Approx(data / 16.0).epsilon(1e-10));
  CHECK(t.physics == doctest::Approx(phys / 16.0).epsilon(1e-9));
  // Chunking windows across tapes does not change the value.
  const Objective one(w.spec, w.norm, batch, params, 0.0, 1);
  CHECK(one.terms(w.theta).total() == doctest::Approx(t.total()).epsilon(1e-14));
}

TEST_CASE("Adam") {
  SUBCASE("zero gradient leaves the weights") {
    std::vector<double> theta{1.0, -2.0};
    AdamState st;
    adam_step(theta, std::vector<double>{0.0, 0.0}, st);
    CHECK(theta == std::vector<double>{1.0, -2.0});
  }
  SUBCASE("constant gradient moves by lr per step") {
    std::vector<double> theta{0.0};
    AdamState st;
    double prev = 0.0;
    for (int i = 0; i < 200; ++i) {
      adam_step(theta, std::vector<double>{3.0}, st, AdamOptions{0.01});
      CHECK(prev - theta[0] == doctest::Approx(0.01).epsilon(1e-5));
      prev = theta[0];
    }
  }
  SUBCASE("matches an independent trace") {
    std::vector<double> theta{0.5, -1.0, 2.0};
    AdamState st;
    double m[3] = {}, v[3] = {}, x[3] = {0.5, -1.0, 2.0};
    for (int t = 1; t <= 10; ++t) {
      std::vector<double> g{std::sin(t), 0.1 * t, -std::cos(0.5 * t)};
      adam_step(theta, g, st);
      for (int i = 0; i < 3; ++i) {
        m[i] = 0.9 * m[i] + 0.1 * g[static_cast<std::size_t>(i)];
        v[i] = 0.999 * v[i] + 0.001 * g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
        const double mh = m[i] / (1.0 - std::pow(0.9, t));
        const double vh = v[i] / (1.0 - std::pow(0.999, t));
        x[i] -= 1e-3 * mh / (std::sqrt(vh) + 1e-8);
      }
    }
    for (int i = 0; i < 3; ++i) CHECK(theta[static_cast<std::size_t>(i)] == doctest::Approx(x[i]).epsilon(1e-14));
    CHECK(st.step == 10);
  }
  SUBCASE("bad input") {
    std::vector<double> theta{0.0};
    AdamState st;
    CHECK_THROWS_AS(adam_step(theta, std::vector<double>{NAN}, st), DivergenceError);
    CHECK_THROWS_AS(adam_step(theta, std::vector<double>{1.0, 2.0}, st), ContractError);
  }
}

TEST_CASE("L-BFGS on a quadratic") {
  const std::vector<double> diag{1.0, 3.0, 10.0, 0.5, 7.0};
  const std::vector<double> center{1.0, -2.0, 0.5, 3.0, -1.0};
  const numcore::ValueAndGradient f = [&](std::span<const double> x, std::vector<double>& g) {
    g.assign(x.size(), 0.0);
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - center[i];
      v += 0.5 * diag[i] * d * d;
      g[i] = diag[i] * d;
    }
    return v;
  };
  std::vector<double> seen;
  const LbfgsResult r = lbfgs_minimize(f, std::vector<double>(5, 0.0), {}, [&](double v) { seen.push_back(v); });
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(r.theta[i] - center[i]) < 1e-8);
  // With a near-exact line search the quasi-Newton steps terminate like
  // conjugate gradients on a quadratic.
  LbfgsOptions short_run;
  short_run.c2 = 1e-4;
  short_run.max_iterations = 10;
  const LbfgsResult r10 = lbfgs_minimize(f, std::vector<double>(5, 0.0), short_run);
  CHECK(r10.iterations <= 10u);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(r10.theta[i] - center[i]) < 1e-8);
  CHECK(r.evaluations == seen.size());
  CHECK_FALSE(r.line_search_failed);

  // Accepted iterates never increase the loss.
  double best = seen.front();
  for (double v : seen) best = std::min(best, v);
  CHECK(r.loss == best);

  const LbfgsResult at_min = lbfgs_minimize(f, center);
  CHECK(at_min.theta == center);
  CHECK(at_min.evaluations == 1u);
}

TEST_CASE("L-BFGS on Rosenbrock and with an evaluation cap") {
  const numcore::ValueAndGradient rosen = [](std::span<const double> x, std::vector<double>& g) {
    g = {-2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]), 200.0 * (x[1] - x[0] * x[0])};
    return std::pow(1.0 - x[0], 2) + 100.0 * std::pow(x[1] - x[0] * x[0], 2);
  };
  const LbfgsResult r = lbfgs_minimize(rosen, {-1.2, 1.0});
  CHECK(r.theta[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.theta[1] == doctest::Approx(1.0).epsilon(1e-6));
  LbfgsOptions capped;
  capped.max_evals = 7;
  CHECK(lbfgs_minimize(rosen, {-1.2, 1.0}, capped).evaluations <= 7u);
  const numcore::ValueAndGradient bad = [](std::span<const double>, std::vector<double>& g) {
    g = {0.0};
    return NAN;
  };
  CHECK_THROWS_AS(lbfgs_minimize(bad, {0.0}), DivergenceError);
}

TEST_CASE("walk-forward folds") {
  const auto m3 = walk_forward_folds(3, required_days(3));
  REQUIRE(m3.size() == 5u);
  CHECK(m3[0].train_start_day == 0);
  CHECK(m3[0].train_end_day() == 90);
  CHECK(m3[0].test_end_day() == 95);
  CHECK(m3[4].train_start_day == 120);
  CHECK(m3[4].train_end_day() == 210);
  CHECK(m3[4].test_end_day() == 215);
  CHECK(required_days(7) == 335);
  try {
    walk_forward_folds(7, 300);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("335") != std::string::npos);
  }
  CHECK_THROWS_AS(walk_forward_folds(2, 1000), ConfigError);
  CHECK_THROWS_AS(fold_plan(1, 5, 1000), ConfigError);
  CHECK(fold_plan(5, 2, 1000).train_start_day == 60);
}

TEST_CASE("percentile") {
  CHECK(percentile({3.0, 1.0, 2.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(percentile({3.0, 1.0, 2.0, 4.0}, 0.25) == doctest::Approx(1.75));
  CHECK(percentile({5.0}, 0.9) == 5.0);
  CHECK_THROWS_AS(percentile({}, 0.5), ContractError);
}

TEST_CASE("evaluate") {
  auto w = weights_for(ModelKind::NN);
  std::fill(w.theta.begin(), w.theta.end(), 0.0);
  const double level = 0.6;
  w.theta.back() = level;
  const double predicted = w.norm.kelvin(level);

  auto test = slice(0, 120, false);
  for (Sample& s : test) s.target = predicted;
  const std::size_t horizons[] = {60, 120};
  const EvalReport perfect = evaluate(w, test, horizons);
  for (const HorizonSummary& h : perfect.buckets) CHECK(h.mean == doctest::Approx(0.0).epsilon(1e-12));

  for (Sample& s : test) s.target = predicted + 0.5;
  const EvalReport biased = evaluate(w, test, horizons);
  for (const HorizonSummary& h : biased.buckets) {
    CHECK(h.mean == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(h.median == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(h.max == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(h.pct_of_range == doctest::Approx(50.0 / 27.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(evaluate(w, std::span(test).first(100), horizons), ContractError);

  // Buckets recompute from the per-step errors and are prefix-consistent.
  const auto real = slice(300, 120, false);
  const auto trained = weights_for(ModelKind::NN, 8, 9);
  const EvalReport full = evaluate(trained, real, horizons);
  const EvalReport prefix = evaluate(trained, std::span(real).first(60), std::span(horizons).first(1));
  for (std::size_t i = 0; i < 60; ++i) CHECK(full.abs_error[i] == prefix.abs_error[i]);
  const double mean60 = std::accumulate(full.abs_error.begin(), full.abs_error.begin() + 60, 0.0) / 60.0;
  CHECK(full.buckets[0].mean == doctest::Approx(mean60).epsilon(1e-12));
  CHECK(full.buckets[1].p75 == doctest::Approx(percentile(full.abs_error, 0.75)).epsilon(1e-12));
  for (std::size_t i = 0; i < real.size(); ++i) {
    if (full.abs_error[i] != std::abs(full.truth[i] - full.estimate[i])) FAIL("abs_error " << i);
  }
}

TEST_CASE("training is deterministic and reports a consistent curve") {
  const whitebox::TowerParams params;
  const auto samples = slice(0, 240);
  TrainConfig cfg;
  cfg.adam_iters = 30;
  cfg.lbfgs_max_evals = 20;
  models::ModelSpec spec;
  spec.kind = ModelKind::PhyNN;
  spec.hidden_width = 8;
  const models::Normalizer norm;
  const TrainReport a = train(spec, norm, samples, params, cfg);
  const TrainReport b = train(spec, norm, samples, params, cfg);
  CHECK(a.weights.theta == b.weights.theta);
  CHECK(a.loss == b.loss);
  CHECK(a.adam_iterations == 30);
  CHECK(a.lbfgs_evaluations <= 20);
  CHECK(a.loss.size() == static_cast<std::size_t>(a.adam_iterations + a.lbfgs_evaluations));
  CHECK(a.initial_loss == a.loss.front());
  CHECK(a.final_loss <= a.loss[static_cast<std::size_t>(a.adam_iterations)]);
  CHECK_FALSE(a.diverged);
  CHECK(a.wall_ms.size() == a.loss.size());
}

TEST_CASE("a large L2 coefficient shrinks the weights") {
  const whitebox::TowerParams params;
  const auto samples = slice(0, 120);
  models::ModelSpec spec;
  spec.hidden_width = 8;
  TrainConfig cfg;
  cfg.adam_iters = 200;
  cfg.adam_lr = 1e-2;
  cfg.lbfgs_max_evals = 50;
  cfg.lambda = 0.0;
  const TrainReport free = train(spec, models::Normalizer{}, samples, params, cfg);
  cfg.lambda = 100.0;
  const TrainReport tight = train(spec, models::Normalizer{}, samples, params, cfg);
  const auto norm2 = [](const std::vector<double>& v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); };
  CHECK(norm2(tight.weights.theta) < 0.1 * norm2(free.weights.theta));
}

TEST_CASE("iterations to a loss fraction") {
  const std::vector<double> loss{10.0, 5.0, 2.0, 1.0, 0.5};
  CHECK(iterations_to_fraction(loss).value() == 3u);
  CHECK_FALSE(iterations_to_fraction(std::vector<double>{1.0, 0.5}).has_value());
}

TEST_CASE("train config validation") {
  CHECK_THROWS_AS(TrainConfig::from_config(KeyValueConfig::parse("adam_iters = -1\n")), ConfigError);
  CHECK_THROWS_AS(TrainConfig::from_config(KeyValueConfig::parse("adam_lr = 0\n")), ConfigError);
  const TrainConfig c = TrainConfig::from_config(KeyValueConfig::parse("seq_len = 30\nlambda = 0.01\n"));
  CHECK(c.seq_len == 30);
  CHECK(c.lambda == 0.01);
}
