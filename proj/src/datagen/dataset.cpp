#include "coolflex/datagen/dataset.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "coolflex/errors.hpp"
#include "coolflex/whitebox/tower_model.hpp"

namespace coolflex::datagen {
namespace {

// splitmix64 finaliser; decorrelates the sub-streams derived from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::array<const char*, 10> kColumns = {"t_n", "day",       "P_F1",  "P_F2",  "Q_p",
                                                  "T_b", "T_b_noisy", "T_amb", "p_amb", "rh"};

void append_number(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, res.ptr);
}

}  // namespace

std::vector<SimRecord> simulate_dataset(const whitebox::TowerParams& params,
                                        const std::vector<FanPowers>& schedule,
                                        const std::vector<whitebox::WeatherSample>& weather,
                                        const SimulationOptions& options) {
  if (schedule.size() != weather.size()) {
    throw ContractError("simulate_dataset: schedule and weather lengths differ");
  }
  if (!(options.noise_sigma >= 0.0)) throw ContractError("simulate_dataset: noise_sigma must be >= 0");
  params.validate();

  std::mt19937_64 rng(options.noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  whitebox::TowerState state{0.5 * (params.T_b_min + params.T_b_max)};
  std::vector<SimRecord> out;
  out.reserve(schedule.size());
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const int minute = static_cast<int>(k % kMinutesPerDay);
    SimRecord r;
    r.day = static_cast<int>(k / kMinutesPerDay);
    r.t_n = minute / 60.0;
    r.P_F1 = schedule[k].P_F1;
    r.P_F2 = schedule[k].P_F2;
    r.Q_p = whitebox::process_heat(state.T_b, params);
    r.T_b = state.T_b;
    r.T_b_noisy = options.noise_sigma > 0.0 ? state.T_b + options.noise_sigma * noise(rng) : state.T_b;
    r.T_amb = weather[k].T_amb;
    r.p_amb = weather[k].p_amb;
    r.rh = weather[k].rh;
    out.push_back(r);

    state = whitebox::step_euler(state, {schedule[k].total(), weather[k]}, options.dt, params);
  }
  return out;
}

void DatasetConfig::validate() const {
  if (n_days < 1) throw ConfigError("n_days must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  ScheduleSpec spec;
  spec.min_hold = min_hold;
  spec.max_hold = max_hold;
  spec.validate();
}

DatasetConfig DatasetConfig::from_config(const KeyValueConfig& cfg, DatasetConfig base) {
  unsigned long long seed = base.seed;
  cfg.read("seed", seed);
  base.seed = seed;
  cfg.read("n_days", base.n_days);
  cfg.read("noise_sigma", base.noise_sigma);
  cfg.read("min_hold", base.min_hold);
  cfg.read("max_hold", base.max_hold);
  base.validate();
  return base;
}

const std::set<std::string>& DatasetConfig::keys() {
  static const std::set<std::string> k{"seed", "n_days", "noise_sigma", "min_hold", "max_hold", "qp_mode"};
  return k;
}

std::vector<SimRecord> generate_dataset(const whitebox::TowerParams& params, const DatasetConfig& cfg) {
  cfg.validate();
  const auto weather = synth_weather(derive_seed(cfg.seed, 0), cfg.n_days);
  ScheduleSpec spec;
  spec.min_hold = cfg.min_hold;
  spec.max_hold = cfg.max_hold;
  spec.seed = derive_seed(cfg.seed, 1);
  const auto schedule = fan_schedule(spec, static_cast<int>(weather.size()));
  SimulationOptions opts;
  opts.noise_sigma = cfg.noise_sigma;
  opts.noise_seed = derive_seed(cfg.seed, 2);
  return simulate_dataset(params, schedule, weather, opts);
}

void write_csv(const std::vector<SimRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n';
  std::string line;
  for (const SimRecord& r : records) {
    line.clear();
    append_number(line, r.t_n);
    line += ',';
    line += std::to_string(r.day);
    for (double v : {r.P_F1, r.P_F2, r.Q_p, r.T_b, r.T_b_noisy, r.T_amb, r.p_amb, r.rh}) {
      line += ',';
      append_number(line, v);
    }
    line += '\n';
    out << line;
  }
}

void write_csv(const std::vector<SimRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingInputError("cannot open " + path.string() + " for writing");
  write_csv(records, out);
}

std::vector<SimRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset: empty file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::map<std::string, std::size_t> position;
  {
    std::stringstream ss(line);
    std::string name;
    for (std::size_t i = 0; std::getline(ss, name, ','); ++i) position[name] = i;
  }
  std::array<std::size_t, kColumns.size()> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = position.find(kColumns[c]);
    if (it == position.end()) throw ParseError(std::string("dataset: missing column '") + kColumns[c] + "'", 1);
    index[c] = it->second;
  }

  std::vector<SimRecord> out;
  std::vector<std::string_view> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    cells.clear();
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.emplace_back(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != position.size()) throw ParseError("dataset: wrong number of fields", line_no);

    std::array<double, kColumns.size()> v{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      const std::string_view cell = cells[index[c]];
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v[c]);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw ParseError(std::string("dataset: bad value in column '") + kColumns[c] + "'", line_no);
      }
    }
    SimRecord r;
    r.t_n = v[0];
    r.day = static_cast<int>(v[1]);
    r.P_F1 = v[2];
    r.P_F2 = v[3];
    r.Q_p = v[4];
    r.T_b = v[5];
    r.T_b_noisy = v[6];
    r.T_amb = v[7];
    r.p_amb = v[8];
    r.rh = v[9];
    out.push_back(r);
  }
  return out;
}

std::vector<SimRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open dataset " + path.string());
  return read_csv(in);
}

}  // namespace coolflex::datagen
