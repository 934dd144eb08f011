#include "coolflex/models/weights.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "coolflex/errors.hpp"

namespace coolflex::models {
namespace {

constexpr const char* kMagic = "coolflex-weights";
constexpr int kFormatVersion = 1;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::NN: return "nn";
    case ModelKind::LSTM: return "lstm";
    case ModelKind::PhyNN: return "phynn";
    case ModelKind::PhyLSTM_WOF: return "phylstm_wof";
    case ModelKind::PhyLSTM_WF: return "phylstm_wf";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  for (ModelKind k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown model kind '" + name + "' (expected nn, lstm, phynn, phylstm_wof, phylstm_wf)");
}

void ModelSpec::validate() const {
  if (hidden_layers < 1) throw ConfigError("model: hidden_layers must be >= 1");
  if (hidden_width < 1) throw ConfigError("model: hidden_width must be >= 1");
  if (is_recurrent(kind) && seq_len < 1) throw ConfigError("model: seq_len must be >= 1");
}

void WeightLayout::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  WeightBlock b{std::move(name), rows, cols, size_};
  size_ += b.size();
  blocks_.push_back(std::move(b));
}

WeightLayout WeightLayout::for_spec(const ModelSpec& spec) {
  spec.validate();
  WeightLayout layout;
  const Eigen::Index h = spec.hidden_width;
  if (!is_recurrent(spec.kind)) {
    Eigen::Index in = ModelSpec::data_input_dim();
    for (int l = 0; l < spec.hidden_layers; ++l) {
      const std::string p = "hidden_" + std::to_string(l);
      layout.add(p + ".w", h, in);
      layout.add(p + ".b", h, 1);
      in = h;
    }
  } else {
    Eigen::Index in = ModelSpec::data_input_dim();
    for (int l = 0; l < spec.hidden_layers; ++l) {
      const std::string p = "lstm_" + std::to_string(l);
      layout.add(p + ".wx", 4 * h, in);
      if (l == 0 && has_feedback(spec.kind)) layout.add(p + ".wfb", 4 * h, 1);
      layout.add(p + ".wh", 4 * h, h);
      layout.add(p + ".b", 4 * h, 1);
      in = h;
    }
  }
  layout.add("head.w", 1, h);
  layout.add("head.b", 1, 1);
  return layout;
}

ModelWeights ModelWeights::initialize(const ModelSpec& spec, const Normalizer& norm, std::uint64_t seed) {
  const WeightLayout layout = WeightLayout::for_spec(spec);
  ModelWeights w{spec, norm, std::vector<double>(layout.size(), 0.0)};
  std::mt19937_64 rng(seed);
  const bool recurrent = is_recurrent(spec.kind);
  for (const WeightBlock& b : layout.blocks()) {
    if (b.cols == 1 && b.name.ends_with(".b")) continue;  // biases start at zero
    double fan_in = static_cast<double>(b.cols);
    double fan_out = static_cast<double>(b.rows);
    if (recurrent && b.name.starts_with("lstm_")) {
      fan_out /= 4.0;
      if (b.name.ends_with(".wx") || b.name.ends_with(".wfb")) {
        fan_in = b.name.starts_with("lstm_0") ? spec.input_dim() : spec.hidden_width;
      }
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < b.size(); ++i) w.theta[b.offset + i] = dist(rng);
  }
  return w;
}

std::vector<numcore::Matrix> ModelWeights::unpack() const {
  const WeightLayout l = layout();
  if (theta.size() != l.size()) throw ContractError("weights: parameter count does not match layout");
  std::vector<numcore::Matrix> out;
  out.reserve(l.blocks().size());
  for (const WeightBlock& b : l.blocks()) {
    out.emplace_back(Eigen::Map<const numcore::Matrix>(theta.data() + b.offset, b.rows, b.cols));
  }
  return out;
}

std::vector<double> ModelWeights::pack(const WeightLayout& layout, const std::vector<numcore::Matrix>& blocks) {
  if (blocks.size() != layout.blocks().size()) throw ContractError("pack: block count mismatch");
  std::vector<double> theta(layout.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const WeightBlock& b = layout.blocks()[i];
    if (blocks[i].rows() != b.rows || blocks[i].cols() != b.cols) {
      throw ContractError("pack: block '" + b.name + "' has the wrong shape");
    }
    std::copy(blocks[i].data(), blocks[i].data() + blocks[i].size(), theta.begin() + static_cast<long>(b.offset));
  }
  return theta;
}

void ModelWeights::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingInputError("cannot open " + path.string() + " for writing");
  out << kMagic << ' ' << kFormatVersion << '\n'
      << "kind " << to_string(spec.kind) << '\n'
      << "input_dim " << spec.input_dim() << '\n'
      << "hidden_layers " << spec.hidden_layers << '\n'
      << "hidden_width " << spec.hidden_width << '\n'
      << "seq_len " << spec.seq_len << '\n'
      << "T_b_min " << format_double(norm.T_b_min) << '\n'
      << "T_b_max " << format_double(norm.T_b_max) << '\n'
      << "power_scale " << format_double(norm.power_scale) << '\n'
      << "count " << theta.size() << '\n';
  for (double v : theta) out << format_double(v) << '\n';
}

ModelWeights ModelWeights::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open weights file " + path.string());

  std::size_t line_no = 0;
  std::string line;
  const auto field = [&](const std::string& key) {
    ++line_no;
    if (!std::getline(in, line)) throw ParseError("weights: truncated header", line_no);
    std::istringstream ss(line);
    std::string k, v;
    ss >> k >> v;
    if (k != key || v.empty()) throw ParseError("weights: expected '" + key + "'", line_no);
    return v;
  };
  const auto to_int = [&](const std::string& s) {
    try {
      return std::stoi(s);
    } catch (const std::exception&) {
      throw ParseError("weights: bad integer '" + s + "'", line_no);
    }
  };
  const auto to_double = [&](const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ParseError("weights: bad number '" + s + "'", line_no);
    }
    return v;
  };

  if (to_int(field(kMagic)) != kFormatVersion) throw ParseError("weights: unsupported format version", line_no);
  ModelWeights w;
  try {
    w.spec.kind = parse_model_kind(field("kind"));
  } catch (const ConfigError& e) {
    throw ParseError(std::string("weights: ") + e.what(), line_no);
  }
  const int input_dim = to_int(field("input_dim"));
  w.spec.hidden_layers = to_int(field("hidden_layers"));
  w.spec.hidden_width = to_int(field("hidden_width"));
  w.spec.seq_len = to_int(field("seq_len"));
  w.norm.T_b_min = to_double(field("T_b_min"));
  w.norm.T_b_max = to_double(field("T_b_max"));
  w.norm.power_scale = to_double(field("power_scale"));
  const int count = to_int(field("count"));
  if (input_dim != w.spec.input_dim()) throw ParseError("weights: input_dim does not match model kind", 3);

  const std::size_t expected = WeightLayout::for_spec(w.spec).size();
  if (count < 0 || static_cast<std::size_t>(count) != expected) {
    throw ParseError("weights: count does not match architecture", line_no);
  }
  w.theta.reserve(expected);
  while (w.theta.size() < expected) {
    ++line_no;
    if (!std::getline(in, line)) throw ParseError("weights: truncated parameter list", line_no);
    const double v = to_double(line);
    if (!std::isfinite(v)) throw ParseError("weights: non-finite parameter", line_no);
    w.theta.push_back(v);
  }
  return w;
}

ModelWeights ModelWeights::load(const std::filesystem::path& path, const ModelSpec& expected) {
  ModelWeights w = load(path);
  if (!(w.spec == expected)) {
    throw ParseError("weights: header describes " + to_string(w.spec.kind) + " which does not match the requested " +
                     to_string(expected.kind) + " architecture");
  }
  return w;
}

}  // namespace coolflex::models
