#include "coolflex/training/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "coolflex/errors.hpp"

namespace coolflex::training {
namespace {

constexpr double kKelvinOffset = 273.15;

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractError("percentile: no values");
  if (q < 0.0 || q > 1.0) throw ContractError("percentile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EvalReport evaluate(const models::ModelWeights& w, std::span<const models::Sample> test,
                    std::span<const std::size_t> horizons) {
  if (horizons.empty()) throw ContractError("evaluate: no horizons");
  const std::size_t longest = *std::max_element(horizons.begin(), horizons.end());
  if (longest == 0) throw ContractError("evaluate: horizon must be >= 1");
  if (test.size() < longest) {
    throw ContractError("evaluate: test slice has " + std::to_string(test.size()) + " steps, horizon needs " +
                        std::to_string(longest));
  }
  const auto slice = test.first(longest);
  EvalReport r;
  r.estimate = models::predict(w, slice).T_b;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    r.truth.push_back(slice[i].target);
    r.abs_error.push_back(std::abs(slice[i].target - r.estimate[i]));
  }
  for (std::size_t h : horizons) {
    const std::vector<double> e(r.abs_error.begin(), r.abs_error.begin() + static_cast<long>(h));
    HorizonSummary s;
    s.horizon = h;
    double sum = 0.0;
    double rel = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      sum += e[i];
      rel += e[i] / std::abs(r.truth[i] - kKelvinOffset);
    }
    s.mean = sum / static_cast<double>(h);
    s.median = percentile(e, 0.5);
    s.p25 = percentile(e, 0.25);
    s.p75 = percentile(e, 0.75);
    s.max = *std::max_element(e.begin(), e.end());
    s.pct_of_range = 100.0 * s.mean / w.norm.range();
    s.pct_of_celsius = 100.0 * rel / static_cast<double>(h);
    r.buckets.push_back(s);
  }
  return r;
}

void EvalReport::write_errors(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw MissingInputError("cannot open " + path.string() + " for writing");
  out << "step,T_b,estimate,abs_error\n";
  for (std::size_t i = 0; i < abs_error.size(); ++i) {
    out << i << ',' << fmt(truth[i]) << ',' << fmt(estimate[i]) << ',' << fmt(abs_error[i]) << '\n';
  }
}

void EvalReport::write_summary(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw MissingInputError("cannot open " + path.string() + " for writing");
  out << "horizon,mean,median,p25,p75,max,pct_of_range,pct_of_celsius\n";
  for (const HorizonSummary& s : buckets) {
    out << s.horizon << ',' << fmt(s.mean) << ',' << fmt(s.median) << ',' << fmt(s.p25) << ',' << fmt(s.p75) << ','
        << fmt(s.max) << ',' << fmt(s.pct_of_range) << ',' << fmt(s.pct_of_celsius) << '\n';
  }
}

}  // namespace coolflex::training
