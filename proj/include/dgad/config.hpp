#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dgad/adapt.hpp"
#include "dgad/egograph.hpp"
#include "dgad/encoder.hpp"
#include "dgad/model.hpp"
#include "dgad/prototypes.hpp"
#include "dgad/scorer.hpp"

namespace dgad {

struct ExperimentConfig {
  std::vector<std::string> sources;  // ordered; pretraining follows this order
  std::vector<std::string> targets;

  EgoOptions ego{2, 32, 8};
  std::vector<std::size_t> layer_dims{64, 64};
  std::size_t attention_dim = 64;
  std::size_t prototype_dim = 32;

  double buffer_fraction = 0.10;  // M as a fraction of training edges
  double ncon_fraction = 0.10;    // N_con per class as a fraction of the adaptation stream
  double momentum = 0.9;
  double lambda_a = 0.1;
  double lambda_bce = 0.9;
  double lambda_d = 0.3;
  double lambda_e = 0.7;
  std::vector<double> anomaly_ratios{0.01, 0.05, 0.10};

  std::size_t epochs = 10;
  std::size_t adapt_epochs = 5;
  double learning_rate = 1e-3;
  double adapt_learning_rate = 1e-3;
  std::size_t batch_size = 128;
  std::size_t intervals = 10;
  double adapt_fraction = 0.5;  // temporal prefix of each target used for adaptation
  std::size_t similarity_sample = 1024;

  SelectionStrategy strategy = SelectionStrategy::kEntropy;
  AdaptMode adapt_mode = AdaptMode::kPrototypesAndEncoder;
  AggregationMode aggregation = AggregationMode::kMean;
  DifferenceMode difference_mode = DifferenceMode::kPerDimension;
  AlignmentReduction alignment_reduction = AlignmentReduction::kMean;

  std::size_t workers = 1;
  std::uint64_t seed = 0;

  // Throws ConfigError describing the first violated constraint.
  void validate() const;

  EncoderConfig encoder_config(std::size_t edge_feature_dim) const;
  LossWeights loss_weights() const { return {lambda_bce, lambda_a, alignment_reduction}; }
};

// Sets one key from its textual value; throws ConfigError for unknown keys
// or malformed values. List-valued keys take comma-separated values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

// Flat `key = value` lines; `#` starts a comment.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string format_config(const ExperimentConfig& config);

}  // namespace dgad
