#include "dgad/scorer.hpp"

#include <algorithm>
#include <cmath>

#include "dgad/error.hpp"
#include "dgad/log.hpp"

namespace dgad {

DistributionStats DistributionStats::zeros(std::size_t dim, double momentum) {
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw ArgumentError("momentum must lie in [0, 1]");
  DistributionStats s;
  const auto d = static_cast<Eigen::Index>(dim);
  s.mu_normal = Eigen::VectorXd::Zero(d);
  s.mu_abnormal = Eigen::VectorXd::Zero(d);
  s.sigma_normal = Eigen::MatrixXd::Zero(d, d);
  s.sigma_abnormal = Eigen::MatrixXd::Zero(d, d);
  s.momentum = momentum;
  return s;
}

namespace {

Eigen::MatrixXd stack(const PrototypeBuffer& buffer, bool abnormal) {
  const auto& entries = buffer.entries();
  const auto d = static_cast<Eigen::Index>(entries.front().dim());
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(entries.size()), d);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) =
        (abnormal ? entries[i].abnormal : entries[i].normal).transpose();
  }
  return rows;
}

void check_dims(const DistributionStats& stats, const PrototypeBuffer& buffer) {
  if (buffer.entries().front().dim() != stats.dim()) {
    throw ShapeError("buffered prototypes and statistics have different widths");
  }
}

}  // namespace

DistributionStats update_means(DistributionStats stats, const PrototypeBuffer& buffer) {
  if (buffer.empty()) {
    log::warn("statistics update skipped: prototype buffer is empty");
    return stats;
  }
  check_dims(stats, buffer);
  const double a = stats.momentum;
  for (bool abnormal : {false, true}) {
    const Eigen::MatrixXd rows = stack(buffer, abnormal);
    Eigen::VectorXd agg = rows.colwise().sum().transpose();
    if (stats.aggregation == AggregationMode::kMean) agg /= static_cast<double>(rows.rows());
    Eigen::VectorXd& mu = abnormal ? stats.mu_abnormal : stats.mu_normal;
    mu = a * mu + (1.0 - a) * agg;
  }
  return stats;
}

DistributionStats update_covariances(DistributionStats stats, const PrototypeBuffer& buffer) {
  if (buffer.empty()) {
    log::warn("covariance update skipped: prototype buffer is empty");
    return stats;
  }
  check_dims(stats, buffer);
  const double a = stats.momentum;
  const double denom = std::max(1.0, static_cast<double>(buffer.size()) - 1.0);
  for (bool abnormal : {false, true}) {
    const Eigen::VectorXd& mu = abnormal ? stats.mu_abnormal : stats.mu_normal;
    const Eigen::MatrixXd centered = stack(buffer, abnormal).rowwise() - mu.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    cov = 0.5 * (cov + cov.transpose());
    Eigen::MatrixXd& sigma = abnormal ? stats.sigma_abnormal : stats.sigma_normal;
    sigma = a * sigma + (1.0 - a) * cov;
  }
  return stats;
}

DistributionStats update_statistics(DistributionStats stats, const PrototypeBuffer& buffer) {
  return update_covariances(update_means(std::move(stats), buffer), buffer);
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

AnomalyScore score_edge(const Eigen::VectorXd& z, const DistributionStats& stats,
                        std::size_t edge_ref) {
  if (static_cast<std::size_t>(z.size()) != stats.dim()) {
    throw ShapeError("embedding width " + std::to_string(z.size()) +
                     " differs from statistics width " + std::to_string(stats.dim()));
  }
  AnomalyScore out;
  out.edge_ref = edge_ref;
  out.normal = z.dot(stats.mu_normal) - stats.lambda_normal * z.dot(stats.sigma_normal * z);
  out.abnormal =
      z.dot(stats.mu_abnormal) - stats.lambda_abnormal * z.dot(stats.sigma_abnormal * z);
  out.score = out.abnormal - out.normal;
  if (!std::isfinite(out.score)) {
    const char* culprit = !std::isfinite(out.normal) ? "normal-class statistics (mu_n, Sigma_n, lambda_n)"
                                                     : "abnormal-class statistics (mu_a, Sigma_a, lambda_a)";
    if (!z.allFinite()) culprit = "embedding";
    throw NumericalError(std::string("non-finite anomaly score from ") + culprit);
  }
  out.probability = logistic(out.score);
  return out;
}

double bce_loss(std::span<const double> probabilities, std::span<const Label> labels) {
  if (probabilities.empty()) throw ArgumentError("binary cross-entropy of an empty batch");
  if (probabilities.size() != labels.size()) {
    throw ArgumentError("binary cross-entropy needs one label per probability");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = std::clamp(probabilities[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    switch (labels[i]) {
      case Label::kAbnormal:
        total -= std::log(p);
        break;
      case Label::kNormal:
        total -= std::log(1.0 - p);
        break;
      case Label::kUnknown:
        throw ArgumentError("binary cross-entropy requires resolved labels");
    }
  }
  return total / static_cast<double>(probabilities.size());
}

double total_loss(double bce, double alignment, double lambda_bce, double lambda_a) {
  return lambda_bce * bce + lambda_a * alignment;
}

}  // namespace dgad
