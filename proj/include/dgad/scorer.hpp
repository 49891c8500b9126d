#pragma once

#include <span>

#include <Eigen/Dense>

#include "dgad/dyngraph.hpp"
#include "dgad/prototypes.hpp"

namespace dgad {

// kMean averages buffered prototypes before the momentum blend, keeping the
// statistics independent of buffer size; kSum adds them up as written in
// the original update rule.
enum class AggregationMode { kMean, kSum };

struct DistributionStats {
  Eigen::VectorXd mu_normal;
  Eigen::VectorXd mu_abnormal;
  Eigen::MatrixXd sigma_normal;
  Eigen::MatrixXd sigma_abnormal;
  double lambda_normal = 0.1;
  double lambda_abnormal = 0.1;
  double momentum = 0.9;
  AggregationMode aggregation = AggregationMode::kMean;

  static DistributionStats zeros(std::size_t dim, double momentum = 0.9);
  std::size_t dim() const { return static_cast<std::size_t>(mu_normal.size()); }
};

// mu_c <- alpha * mu_c + (1 - alpha) * aggregate(p_c). An empty buffer leaves
// the statistics untouched and logs a warning.
DistributionStats update_means(DistributionStats stats, const PrototypeBuffer& buffer);

// Sigma_c <- alpha * Sigma_c + (1 - alpha) * C_c^T C_c / max(1, M - 1), with
// C_c the buffered prototypes centred on the current mean.
DistributionStats update_covariances(DistributionStats stats, const PrototypeBuffer& buffer);

// update_means followed by update_covariances.
DistributionStats update_statistics(DistributionStats stats, const PrototypeBuffer& buffer);

struct AnomalyScore {
  double score = 0.0;     // s = s_a - s_n
  double normal = 0.0;    // s_n
  double abnormal = 0.0;  // s_a
  double probability = 0.5;
  std::size_t edge_ref = 0;
};

double logistic(double x);

AnomalyScore score_edge(const Eigen::VectorXd& z, const DistributionStats& stats,
                        std::size_t edge_ref = 0);

inline constexpr double kProbabilityClamp = 1e-7;

// Mean binary cross-entropy with probabilities clamped to [eps, 1 - eps].
double bce_loss(std::span<const double> probabilities, std::span<const Label> labels);

double total_loss(double bce, double alignment, double lambda_bce, double lambda_a);

}  // namespace dgad
