#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgad/dyngraph.hpp"
#include "dgad/model.hpp"
#include "dgad/prototypes.hpp"

namespace dgad {

// H(p) = -p log(p + eps) - (1 - p) log(1 - p + eps).
double detection_entropy(double p, double eps = kProbabilityClamp);

inline Label pseudo_label(double p) { return p > 0.5 ? Label::kAbnormal : Label::kNormal; }

// One scored target edge. `position` indexes the caller's edge sequence.
struct Detection {
  std::size_t position = 0;
  double probability = 0.5;
  Eigen::VectorXd embedding;
};

struct ConfidentDetection {
  std::size_t position = 0;
  double probability = 0.5;
  double entropy = 0.0;
  Label pseudo_label = Label::kNormal;
};

enum class SelectionStrategy { kEntropy, kRandom, kThreshold, kDistance, kSimilarity };

std::string to_string(SelectionStrategy s);
SelectionStrategy parse_strategy(const std::string& name);

// Up to `per_class` lowest-entropy detections from each predicted class
// (p > 0.5 abnormal, otherwise normal), ties broken by position. Normal
// picks come first in the result, each class in ascending-entropy order.
std::vector<ConfidentDetection> select_confident(std::span<const Detection> detections,
                                                 std::size_t per_class);

// True when, per predicted class, no rejected detection has lower entropy
// than the most uncertain selected one.
bool entropy_selection_holds(std::span<const Detection> detections,
                             std::span<const ConfidentDetection> selected);

struct SelectionContext {
  const DistributionStats* stats = nullptr;  // needed by kDistance
  std::uint64_t seed = 0;                    // kRandom / kThreshold
};

// Alternative selection rules used for comparison:
//   kRandom     uniform draw within each predicted class
//   kThreshold  uniform draw among p > 0.7 (abnormal) / p < 0.3 (normal)
//   kDistance   largest distance from the opposite class mean
//   kSimilarity smallest distance to the centroid of all target embeddings
std::vector<ConfidentDetection> select_by_strategy(std::span<const Detection> detections,
                                                   std::size_t per_class,
                                                   SelectionStrategy strategy,
                                                   const SelectionContext& context);

// Target stream with every label forced to unknown, so adaptation code
// cannot read ground truth even by accident.
class UnlabeledGraph {
 public:
  explicit UnlabeledGraph(const DynamicGraph& g) : graph_(strip_labels(g)) {}
  const DynamicGraph& graph() const { return graph_; }

 private:
  DynamicGraph graph_;
};

enum class AdaptMode { kPrototypesOnly, kPrototypesAndEncoder };

std::string to_string(AdaptMode m);
AdaptMode parse_adapt_mode(const std::string& name);

struct AdaptOptions {
  std::size_t per_class = 0;  // N_con; 0 disables adaptation
  std::size_t epochs = 5;
  SelectionStrategy strategy = SelectionStrategy::kEntropy;
  AdaptMode mode = AdaptMode::kPrototypesAndEncoder;
  AdamOptions optimizer;
  std::size_t batch_size = 128;
  double lambda_d = 0.3;
  double lambda_e = 0.7;
  AlignmentReduction reduction = AlignmentReduction::kMean;
  std::size_t similarity_sample = 1024;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string origin = "target";
};

struct AdaptResult {
  Model model;
  PrototypeBuffer buffer;
  std::vector<Detection> detections;
  std::vector<ConfidentDetection> confident;
  // Raw alignment loss over the confident set before each epoch, plus one
  // final value after the last epoch.
  std::vector<double> alignment_curve;
  bool adapted = false;
};

AdaptResult adapt_target(const Model& model, const PrototypeBuffer& buffer,
                         const UnlabeledGraph& target, const AdaptOptions& options);

// Uniform subsample without replacement, order preserved.
std::vector<Eigen::VectorXd> subsample_embeddings(const std::vector<EdgeEmbedding>& embeddings,
                                                  std::size_t limit, std::uint64_t seed);

}  // namespace dgad
