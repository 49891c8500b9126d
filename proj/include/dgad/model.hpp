#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dgad/egograph.hpp"
#include "dgad/encoder.hpp"
#include "dgad/prototypes.hpp"
#include "dgad/scorer.hpp"

namespace dgad {

// Everything needed to score an edge: encoder weights, the working prototype
// pair, the class statistics (which own the learnable lambda_n / lambda_a)
// and the ego-graph settings the encoder was trained with.
struct Model {
  EncoderParams encoder;
  PrototypePair prototypes;
  DistributionStats stats;
  EgoOptions ego;
};

enum class AlignmentReduction { kSum, kMean };

struct LossWeights {
  double bce = 0.9;
  double alignment = 0.1;
  // kMean divides the batch alignment sum by the batch size so both loss
  // terms are per-edge quantities.
  AlignmentReduction reduction = AlignmentReduction::kMean;
};

struct Example {
  const TemporalEgoGraph* ego = nullptr;
  Label label = Label::kUnknown;
};

struct LossBreakdown {
  double total = 0.0;
  double bce = 0.0;
  double alignment = 0.0;  // after reduction
};

struct GradientSet {
  EncoderParams encoder;
  Eigen::VectorXd normal;
  Eigen::VectorXd abnormal;
  double lambda_normal = 0.0;
  double lambda_abnormal = 0.0;
  LossBreakdown loss;

  static GradientSet zeros_like(const Model& model);
  void add(const GradientSet& other);
};

// Forward pass only. Labels must all be 0/1.
LossBreakdown evaluate_loss(std::span<const Example> batch, const Model& model,
                            const LossWeights& weights);

// Analytic gradient of lambda_bce * BCE + lambda_a * L_A with respect to the
// encoder, both prototypes and lambda_n / lambda_a. Throws NumericalError on a
// non-finite loss. Results do not depend on `workers`.
GradientSet parameter_gradients(std::span<const Example> batch, const Model& model,
                                const LossWeights& weights, std::size_t workers = 1);

// Encodes every ego-graph; output order matches input order for any worker count.
std::vector<EdgeEmbedding> embed_all(std::span<const TemporalEgoGraph> egos,
                                     const EncoderParams& encoder, std::size_t workers = 1);

std::vector<AnomalyScore> score_all(std::span<const EdgeEmbedding> embeddings,
                                    const DistributionStats& stats);

struct TrainableMask {
  bool encoder = true;
  bool prototypes = true;
  bool lambdas = true;
};

// Flat parameter vector laid out as [encoder | p_n | p_a | lambda_n | lambda_a].
Eigen::VectorXd pack_parameters(const Model& model);
void unpack_parameters(const Eigen::VectorXd& flat, Model& model);
Eigen::VectorXd pack_gradients(const GradientSet& grad);

struct ParamRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<ParamRange> trainable_ranges(const Model& model, const TrainableMask& mask);
ParamRange prototype_range(const Model& model);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with per-coordinate step counts so a slice can be reset (e.g. when the
// prototypes are re-initialised from the buffer) without biasing the rest.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, AdamOptions options);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
            std::span<const ParamRange> active);
  void reset(ParamRange range);
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  Eigen::VectorXd m_, v_, steps_;
};

}  // namespace dgad
