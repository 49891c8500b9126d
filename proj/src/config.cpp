#include "dgad/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dgad/error.hpp"

namespace dgad {

void ExperimentConfig::validate() const {
  auto fraction = [](double v, const char* name, bool allow_zero) {
    const bool ok = allow_zero ? (v >= 0.0 && v <= 1.0) : (v > 0.0 && v <= 1.0);
    if (!ok) throw ConfigError(std::string(name) + " must lie in " + (allow_zero ? "[0, 1]" : "(0, 1]"));
  };
  fraction(buffer_fraction, "buffer_fraction", false);
  fraction(ncon_fraction, "ncon_fraction", true);
  if (!(adapt_fraction > 0.0 && adapt_fraction < 1.0)) {
    throw ConfigError("adapt_fraction must lie in (0, 1)");
  }
  for (double r : anomaly_ratios) fraction(r, "anomaly_ratio", false);
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw ConfigError("momentum must lie in [0, 1]");
  for (double w : {lambda_a, lambda_bce, lambda_d, lambda_e}) {
    if (w < 0.0) throw ConfigError("loss and score weights must be non-negative");
  }
  if (layer_dims.empty()) throw ConfigError("at least one GNN layer is required");
  if (ego.cap == 0) throw ConfigError("ego_cap must be at least 1");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (intervals == 0) throw ConfigError("intervals must be at least 1");
  if (!(learning_rate > 0.0) || !(adapt_learning_rate > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (similarity_sample == 0) throw ConfigError("similarity_sample must be at least 1");
}

EncoderConfig ExperimentConfig::encoder_config(std::size_t edge_feature_dim) const {
  EncoderConfig c;
  c.input_dim = edge_feature_dim + ego.time_dim;
  c.layer_dims = layer_dims;
  c.attention_dim = attention_dim;
  c.prototype_dim = prototype_dim;
  c.activation = Activation::kRelu;
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("invalid value '" + value + "' for '" + key + "'");
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse_value<T>(key, item));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  using C = ExperimentConfig;
  using K = const std::string&;
  static const std::map<std::string, Setter> table = {
      {"sources", [](C& c, K, K v) { c.sources = split_list(v); }},
      {"targets", [](C& c, K, K v) { c.targets = split_list(v); }},
      {"k", [](C& c, K k, K v) { c.ego.hops = parse_value<std::size_t>(k, v); }},
      {"ego_cap", [](C& c, K k, K v) { c.ego.cap = parse_value<std::size_t>(k, v); }},
      {"time_dim", [](C& c, K k, K v) { c.ego.time_dim = parse_value<std::size_t>(k, v); }},
      {"layer_dims", [](C& c, K k, K v) { c.layer_dims = parse_list<std::size_t>(k, v); }},
      {"attention_dim", [](C& c, K k, K v) { c.attention_dim = parse_value<std::size_t>(k, v); }},
      {"prototype_dim", [](C& c, K k, K v) { c.prototype_dim = parse_value<std::size_t>(k, v); }},
      {"buffer_fraction", [](C& c, K k, K v) { c.buffer_fraction = parse_value<double>(k, v); }},
      {"ncon_fraction", [](C& c, K k, K v) { c.ncon_fraction = parse_value<double>(k, v); }},
      {"momentum", [](C& c, K k, K v) { c.momentum = parse_value<double>(k, v); }},
      {"lambda_a", [](C& c, K k, K v) { c.lambda_a = parse_value<double>(k, v); }},
      {"lambda_bce", [](C& c, K k, K v) { c.lambda_bce = parse_value<double>(k, v); }},
      {"lambda_d", [](C& c, K k, K v) { c.lambda_d = parse_value<double>(k, v); }},
      {"lambda_e", [](C& c, K k, K v) { c.lambda_e = parse_value<double>(k, v); }},
      {"anomaly_ratios", [](C& c, K k, K v) { c.anomaly_ratios = parse_list<double>(k, v); }},
      {"epochs", [](C& c, K k, K v) { c.epochs = parse_value<std::size_t>(k, v); }},
      {"adapt_epochs", [](C& c, K k, K v) { c.adapt_epochs = parse_value<std::size_t>(k, v); }},
      {"learning_rate", [](C& c, K k, K v) { c.learning_rate = parse_value<double>(k, v); }},
      {"adapt_learning_rate",
       [](C& c, K k, K v) { c.adapt_learning_rate = parse_value<double>(k, v); }},
      {"batch_size", [](C& c, K k, K v) { c.batch_size = parse_value<std::size_t>(k, v); }},
      {"intervals", [](C& c, K k, K v) { c.intervals = parse_value<std::size_t>(k, v); }},
      {"adapt_fraction", [](C& c, K k, K v) { c.adapt_fraction = parse_value<double>(k, v); }},
      {"similarity_sample",
       [](C& c, K k, K v) { c.similarity_sample = parse_value<std::size_t>(k, v); }},
      {"strategy", [](C& c, K, K v) { c.strategy = parse_strategy(v); }},
      {"adapt_mode", [](C& c, K, K v) { c.adapt_mode = parse_adapt_mode(v); }},
      {"aggregation",
       [](C& c, K, K v) {
         if (v == "mean") c.aggregation = AggregationMode::kMean;
         else if (v == "sum") c.aggregation = AggregationMode::kSum;
         else throw ConfigError("aggregation must be 'mean' or 'sum'");
       }},
      {"difference_mode",
       [](C& c, K, K v) {
         if (v == "per_dimension") c.difference_mode = DifferenceMode::kPerDimension;
         else if (v == "euclidean") c.difference_mode = DifferenceMode::kEuclidean;
         else throw ConfigError("difference_mode must be 'per_dimension' or 'euclidean'");
       }},
      {"alignment_reduction",
       [](C& c, K, K v) {
         if (v == "mean") c.alignment_reduction = AlignmentReduction::kMean;
         else if (v == "sum") c.alignment_reduction = AlignmentReduction::kSum;
         else throw ConfigError("alignment_reduction must be 'mean' or 'sum'");
       }},
      {"workers", [](C& c, K k, K v) { c.workers = parse_value<std::size_t>(k, v); }},
      {"seed", [](C& c, K k, K v) { c.seed = parse_value<std::uint64_t>(k, v); }},
  };
  return table;
}

}  // namespace

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown configuration key '" + key + "'");
  try {
    it->second(config, key, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "sources = " << join(c.sources) << '\n'
      << "targets = " << join(c.targets) << '\n'
      << "k = " << c.ego.hops << '\n'
      << "ego_cap = " << c.ego.cap << '\n'
      << "time_dim = " << c.ego.time_dim << '\n'
      << "layer_dims = " << join(c.layer_dims) << '\n'
      << "attention_dim = " << c.attention_dim << '\n'
      << "prototype_dim = " << c.prototype_dim << '\n'
      << "buffer_fraction = " << c.buffer_fraction << '\n'
      << "ncon_fraction = " << c.ncon_fraction << '\n'
      << "momentum = " << c.momentum << '\n'
      << "lambda_a = " << c.lambda_a << '\n'
      << "lambda_bce = " << c.lambda_bce << '\n'
      << "lambda_d = " << c.lambda_d << '\n'
      << "lambda_e = " << c.lambda_e << '\n'
      << "anomaly_ratios = " << join(c.anomaly_ratios) << '\n'
      << "epochs = " << c.epochs << '\n'
      << "adapt_epochs = " << c.adapt_epochs << '\n'
      << "learning_rate = " << c.learning_rate << '\n'
      << "adapt_learning_rate = " << c.adapt_learning_rate << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "intervals = " << c.intervals << '\n'
      << "adapt_fraction = " << c.adapt_fraction << '\n'
      << "similarity_sample = " << c.similarity_sample << '\n'
      << "strategy = " << to_string(c.strategy) << '\n'
      << "adapt_mode = " << to_string(c.adapt_mode) << '\n'
      << "aggregation = " << (c.aggregation == AggregationMode::kMean ? "mean" : "sum") << '\n'
      << "difference_mode = "
      << (c.difference_mode == DifferenceMode::kPerDimension ? "per_dimension" : "euclidean")
      << '\n'
      << "alignment_reduction = "
      << (c.alignment_reduction == AlignmentReduction::kMean ? "mean" : "sum") << '\n'
      << "workers = " << c.workers << '\n'
      << "seed = " << c.seed << '\n';
  return out.str();
}

}  // namespace dgad
