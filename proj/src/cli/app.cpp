#include "coolflex/cli/app.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include "coolflex/cli/run_config.hpp"
#include "coolflex/datagen/dataset.hpp"
#include "coolflex/errors.hpp"
#include "coolflex/flexibility/flexibility.hpp"
#include "coolflex/models/forward.hpp"
#include "coolflex/training/evaluation.hpp"
#include "coolflex/training/gradient_suite.hpp"
#include "coolflex/training/trainer.hpp"
#include "coolflex/training/walk_forward.hpp"
#include "coolflex/whitebox/tower_model.hpp"

namespace coolflex::cli {
namespace {

namespace fs = std::filesystem;
using datagen::kMinutesPerDay;

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Values given on the command line; they override the config file.
struct Flags {
  std::string config;
  std::optional<unsigned long long> seed;
  std::optional<int> days;
  std::optional<std::string> model;
  std::optional<int> months;
  std::optional<int> fold;
  bool all_folds = false;
  std::optional<std::string> out;
  std::optional<std::string> dataset;
  std::optional<std::string> weights;
  int seeds = 10;
};

RunConfig resolve(const Flags& f) {
  RunConfig rc;
  KeyValueConfig cfg;
  if (!f.config.empty()) cfg = KeyValueConfig::load(f.config);
  if (f.seed) cfg.set("seed", std::to_string(*f.seed));
  if (f.days) cfg.set("n_days", std::to_string(*f.days));
  if (f.model) cfg.set("model", *f.model);
  if (f.months) cfg.set("months", std::to_string(*f.months));
  if (f.fold) cfg.set("fold", std::to_string(*f.fold));
  if (f.out) cfg.set("out", *f.out);
  if (f.dataset) cfg.set("dataset", *f.dataset);
  if (f.weights) cfg.set("weights", *f.weights);
  rc.apply(cfg);
  rc.all_folds = f.all_folds;
  return rc;
}

/// Train and test day ranges for one run.
struct Split {
  std::string name;
  int train_start = 0;
  int train_end = 0;
  int test_start = 0;
  int test_end = 0;
};

std::vector<Split> splits(const RunConfig& rc, int available_days) {
  const std::string kind = models::to_string(rc.model.kind);
  if (rc.train_days > 0) {
    return {{kind + "_d" + std::to_string(rc.train_days), 0, rc.train_days, rc.train_days,
             rc.train_days + rc.test_days}};
  }
  std::vector<training::FoldPlan> plans;
  if (rc.all_folds) {
    plans = training::walk_forward_folds(rc.months, available_days);
  } else {
    plans.push_back(training::fold_plan(rc.months, rc.fold, available_days));
  }
  std::vector<Split> out;
  for (const training::FoldPlan& p : plans) {
    out.push_back({kind + "_m" + std::to_string(rc.months) + "_f" + std::to_string(p.fold_index), p.train_start_day,
                   p.train_end_day(), p.test_start_day(), p.test_start_day() + rc.test_days});
  }
  return out;
}

std::vector<datagen::SimRecord> load_dataset(const RunConfig& rc) {
  const fs::path path = rc.resolved_dataset();
  if (!fs::exists(path)) throw MissingInputError("dataset " + path.string() + " not found (run simulate first)");
  auto records = datagen::read_csv(path);
  if (records.size() % kMinutesPerDay != 0) {
    throw ParseError("dataset " + path.string() + " does not hold whole days");
  }
  return records;
}

std::vector<models::Sample> slice(const std::vector<datagen::SimRecord>& records, int day0, int day1, bool noisy) {
  const auto begin = static_cast<std::size_t>(day0) * kMinutesPerDay;
  const auto end = static_cast<std::size_t>(day1) * kMinutesPerDay;
  if (end > records.size()) {
    throw MissingInputError("days [" + std::to_string(day0) + ", " + std::to_string(day1) + ") exceed the dataset (" +
                            std::to_string(records.size() / kMinutesPerDay) + " days)");
  }
  const datagen::SimRecord* before = begin > 0 ? &records[begin - 1] : nullptr;
  return models::make_samples(std::span(records).subspan(begin, end - begin), noisy, before);
}

fs::path run_dir(const RunConfig& rc, const Split& s) {
  fs::path dir = rc.out_dir / s.name;
  fs::create_directories(dir);
  return dir;
}

fs::path weights_file(const RunConfig& rc, const Split& s) {
  return rc.weights_path.empty() ? rc.out_dir / s.name / "weights.txt" : rc.weights_path;
}

models::ModelWeights load_weights(const RunConfig& rc, const Split& s) {
  const fs::path path = weights_file(rc, s);
  if (!fs::exists(path)) throw MissingInputError("weights " + path.string() + " not found (run train first)");
  models::ModelWeights w = models::ModelWeights::load(path);
  if (w.spec.kind != rc.model.kind) {
    throw ConfigError("weights " + path.string() + " hold a " + models::to_string(w.spec.kind) + " model, not " +
                      models::to_string(rc.model.kind));
  }
  return w;
}

std::vector<std::size_t> horizons_for(std::size_t steps) {
  std::vector<std::size_t> h;
  for (std::size_t v : training::kDefaultHorizons) {
    if (v <= steps) h.push_back(v);
  }
  if (h.empty()) h.push_back(steps);
  return h;
}

int cmd_simulate(const RunConfig& rc, std::ostream& out) {
  const auto records = datagen::generate_dataset(rc.tower, rc.dataset);
  const fs::path path = rc.resolved_dataset();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  datagen::write_csv(records, path);
  out << "wrote " << records.size() << " records to " << path.string() << '\n';
  return kOk;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  const auto records = load_dataset(rc);
  const models::Normalizer norm = models::Normalizer::from_params(rc.tower);
  int code = kOk;
  for (const Split& s : splits(rc, static_cast<int>(records.size() / kMinutesPerDay))) {
    const auto samples = slice(records, s.train_start, s.train_end, true);
    const training::TrainReport report = training::train(rc.model, norm, samples, rc.tower, rc.train);
    const fs::path dir = run_dir(rc, s);
    report.write_curve(dir / "report.csv");
    report.write_summary(dir / "summary.csv");
    report.weights.save(weights_file(rc, s));
    out << s.name << ": days [" << s.train_start << ", " << s.train_end << "), " << report.loss.size()
        << " loss evaluations, loss " << fmt(report.initial_loss) << " -> " << fmt(report.final_loss);
    if (report.iterations_to_90) out << ", 90% reduction at " << *report.iterations_to_90;
    out << '\n';
    if (report.diverged) {
      out << s.name << ": diverged: " << report.message << '\n';
      code = kDivergence;
    }
  }
  return code;
}

int cmd_evaluate(const RunConfig& rc, std::ostream& out) {
  const auto records = load_dataset(rc);
  for (const Split& s : splits(rc, static_cast<int>(records.size() / kMinutesPerDay))) {
    const models::ModelWeights w = load_weights(rc, s);
    const auto test = slice(records, s.test_start, s.test_end, false);
    const auto horizons = horizons_for(test.size());
    const training::EvalReport r = training::evaluate(w, test, horizons);
    const fs::path dir = run_dir(rc, s);
    r.write_errors(dir / "errors.csv");
    r.write_summary(dir / "eval_summary.csv");
    out << s.name << ": test days [" << s.test_start << ", " << s.test_end << ")\n";
    out << "  horizon    mean  median     p25     p75  %range  %degC\n";
    for (const training::HorizonSummary& b : r.buckets) {
      out << std::fixed << std::setprecision(3) << "  " << std::setw(7) << b.horizon << std::setw(8) << b.mean
          << std::setw(8) << b.median << std::setw(8) << b.p25 << std::setw(8) << b.p75 << std::setw(8)
          << b.pct_of_range << std::setw(7) << b.pct_of_celsius << '\n';
    }
    out.unsetf(std::ios::floatfield);
  }
  return kOk;
}

int cmd_flex(const RunConfig& rc, std::ostream& out) {
  const auto records = load_dataset(rc);
  const flexibility::FlexLimits limits = flexibility::FlexLimits::from_params(rc.tower, rc.roc_min, rc.roc_max);
  for (const Split& s : splits(rc, static_cast<int>(records.size() / kMinutesPerDay))) {
    const models::ModelWeights w = load_weights(rc, s);
    const auto test = slice(records, s.test_start, s.test_end, false);
    const models::Prediction pred = models::predict(w, test);

    std::vector<double> hours, truth, truth_rate;
    for (const models::Sample& q : test) {
      hours.push_back(q.hours);
      truth.push_back(q.target);
      truth_rate.push_back(whitebox::physics_rhs(q.target, q.total_power(), q.weather, rc.tower));
    }
    const auto model_pts = flexibility::flex_series(hours, pred.T_b, pred.dT_dt, rc.tower);
    const auto white_pts = flexibility::flex_series(hours, truth, truth_rate, rc.tower);
    const std::vector<flexibility::FlexRegion> regions{flexibility::flex_region(model_pts, limits, rc.region),
                                                       flexibility::flex_region(white_pts, limits, rc.region)};
    const std::vector<std::string> labels{models::to_string(w.spec.kind), "whitebox"};

    const fs::path dir = run_dir(rc, s);
    flexibility::write_series_csv(model_pts, dir / "flex_model.csv");
    flexibility::write_series_csv(white_pts, dir / "flex_whitebox.csv");
    flexibility::write_regions_csv(regions, labels, dir / "regions.csv");
    flexibility::write_svg(regions, labels, dir / "regions.svg");

    std::ofstream mae(dir / "soc_mae.csv");
    if (!mae) throw MissingInputError("cannot write " + (dir / "soc_mae.csv").string());
    mae << "horizon,temperature_mae,soc_mae\n";
    out << s.name << ": region area " << fmt(regions[0].area) << " (white-box " << fmt(regions[1].area)
        << "), inside limits " << fmt(regions[0].inside_fraction) << '\n';
    for (std::size_t h : horizons_for(test.size())) {
      double t_mae = 0.0;
      for (std::size_t i = 0; i < h; ++i) t_mae += std::abs(pred.T_b[i] - truth[i]);
      t_mae /= static_cast<double>(h);
      const double s_mae = flexibility::soc_mae(pred.T_b, truth, h, rc.tower);
      mae << h << ',' << fmt(t_mae) << ',' << fmt(s_mae) << '\n';
      out << "  SoC MAE @" << h << " min: " << fmt(s_mae) << '\n';
    }
  }
  return kOk;
}

int cmd_gradcheck(const RunConfig& rc, int seeds, std::ostream& out) {
  constexpr double kTolerance = 1e-4;
  bool ok = true;
  out << "loss gradients (max relative error over " << seeds << " seeds)\n";
  for (models::ModelKind kind : models::kAllKinds) {
    double worst = 0.0;
    for (int i = 0; i < seeds; ++i) {
      worst = std::max(worst, training::check_loss_gradient(kind, rc.dataset.seed + static_cast<unsigned>(i),
                                                            rc.tower).max_rel);
    }
    ok = ok && worst < kTolerance;
    out << "  " << std::left << std::setw(12) << models::to_string(kind) << std::right << ' ' << fmt(worst)
        << (worst < kTolerance ? "  ok" : "  FAIL") << '\n';
  }
  out << "time derivatives (max relative error)\n";
  for (models::ModelKind kind : models::kAllKinds) {
    if (!models::is_physics_informed(kind)) continue;
    double worst = 0.0;
    for (int i = 0; i < seeds; ++i) {
      worst = std::max(worst, training::check_time_derivative(kind, rc.dataset.seed + static_cast<unsigned>(i),
                                                              rc.tower).max_rel);
    }
    ok = ok && worst < kTolerance;
    out << "  " << std::left << std::setw(12) << models::to_string(kind) << std::right << ' ' << fmt(worst)
        << (worst < kTolerance ? "  ok" : "  FAIL") << '\n';
  }
  return ok ? kOk : kDivergence;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cooling-tower flexibility: simulation, model training and flexibility metrics", "coolflex"};
  app.require_subcommand(1);
  Flags f;

  const auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "key = value configuration file");
    sub->add_option("--seed", f.seed, "random seed for data and weights");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--dataset", f.dataset, "dataset CSV (default <out>/dataset.csv)");
  };
  const auto model_opts = [&f](CLI::App* sub) {
    sub->add_option("--model", f.model, "nn, lstm, phynn, phylstm_wof or phylstm_wf");
    sub->add_option("--months", f.months, "training length in months: 1, 3, 5 or 7");
    auto* fold = sub->add_option("--fold", f.fold, "walk-forward fold 0..4");
    sub->add_flag("--all-folds", f.all_folds, "run all five folds")->excludes(fold);
    sub->add_option("--weights", f.weights, "weights file (default <out>/<run>/weights.txt)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "simulate a dataset with the white-box model");
  common(simulate);
  simulate->add_option("--days", f.days, "number of days to simulate");
  CLI::App* train = app.add_subcommand("train", "train one model");
  common(train);
  model_opts(train);
  CLI::App* evaluate = app.add_subcommand("evaluate", "free-running prediction errors on the test days");
  common(evaluate);
  model_opts(evaluate);
  CLI::App* flex = app.add_subcommand("flex", "SoC/RoC series, flexibility regions and SoC MAE");
  common(flex);
  model_opts(flex);
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "check loss gradients and time derivatives");
  common(gradcheck);
  gradcheck->add_option("--seeds", f.seeds, "number of seeds")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const RunConfig rc = resolve(f);
    if (simulate->parsed()) return cmd_simulate(rc, out);
    if (train->parsed()) return cmd_train(rc, out);
    if (evaluate->parsed()) return cmd_evaluate(rc, out);
    if (flex->parsed()) return cmd_flex(rc, out);
    if (gradcheck->parsed()) return cmd_gradcheck(rc, f.seeds, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ContractError& e) {
    err << "invalid request: " << e.what() << '\n';
    return kConfigError;
  } catch (const DivergenceError& e) {
    err << "numeric divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const MissingInputError& e) {
    err << "missing input: " << e.what() << '\n';
    return kMissingInput;
  } catch (const ParseError& e) {
    err << "bad input file: " << e.what() << '\n';
    return kMissingInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace coolflex::cli
