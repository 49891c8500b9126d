#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dgad/adapt.hpp"
#include "dgad/checkpoint.hpp"
#include "dgad/config.hpp"
#include "dgad/dyngraph.hpp"
#include "dgad/metrics.hpp"

namespace dgad {

struct NamedGraph {
  std::string name;
  DynamicGraph graph;
};

struct EpochLog {
  std::string dataset;
  std::size_t epoch = 0;
  double loss = 0.0;  // mean over minibatches, weighted by batch size
  double bce = 0.0;
  double alignment = 0.0;
  std::size_t buffer_size = 0;
};

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

// Sequential multi-source pretraining. Every source must be fully labeled
// (ConfigError otherwise) and share one edge-feature width.
PretrainResult pretrain(std::span<const NamedGraph> sources, const ExperimentConfig& config);

// Loads each configured source path and pretrains on them in order.
PretrainResult pretrain(const ExperimentConfig& config);

// Scores edges [begin, end) of g with the given model.
std::vector<AnomalyScore> score_graph(const Model& model, const DynamicGraph& g, std::size_t begin,
                                      std::size_t end, std::size_t workers = 1);

struct TargetOutcome {
  std::string dataset;
  double anomaly_ratio = 0.0;
  double auroc = 0.0;
  double auprc = 0.0;
  std::size_t adapt_edges = 0;
  std::size_t test_edges = 0;
  std::size_t injected = 0;
  bool adapted = false;
  bool entropy_property = true;  // confident set respects the entropy order
  std::vector<double> alignment_curve;
  std::vector<double> scores;  // test suffix, in stream order
  std::vector<Label> labels;
};

// Adaptation settings for a stream of `stream_edges` edges; N_con per class
// is floor(ncon_fraction * stream_edges).
AdaptOptions adapt_options(const ExperimentConfig& config, std::size_t stream_edges,
                           const std::string& origin);

// Splits the target in time, adapts on the label-stripped prefix, injects
// anomalies into the suffix and scores it. Throws MetricError when the test
// stream lacks a usable labeling.
TargetOutcome run_target(const Checkpoint& checkpoint, const NamedGraph& target,
                         double anomaly_ratio, const ExperimentConfig& config);

// run_target for every configured target path and anomaly ratio.
MetricReport run_targets(const Checkpoint& checkpoint, const ExperimentConfig& config,
                         const std::string& method = "dgad");

}  // namespace dgad
