#include "dgad/prototypes.hpp"

#include <algorithm>
#include <cmath>

#include "dgad/error.hpp"

namespace dgad {

double alignment_loss(std::span<const Eigen::VectorXd> embeddings, std::span<const Label> labels,
                      const PrototypePair& pair) {
  if (embeddings.size() != labels.size()) {
    throw ArgumentError("alignment loss needs one label per embedding");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].size() != pair.normal.size()) {
      throw ShapeError("embedding width differs from prototype width");
    }
    switch (labels[i]) {
      case Label::kNormal:
        loss += (embeddings[i] - pair.normal).squaredNorm();
        break;
      case Label::kAbnormal:
        loss += (embeddings[i] - pair.abnormal).squaredNorm();
        break;
      case Label::kUnknown:
        throw ArgumentError("alignment loss requires resolved labels");
    }
  }
  return loss;
}

double difference_score(const PrototypePair& pair, DifferenceMode mode) {
  if (pair.normal.size() != pair.abnormal.size() || pair.normal.size() == 0) {
    throw ShapeError("prototype pair has mismatched or empty vectors");
  }
  const double d = static_cast<double>(pair.normal.size());
  if (mode == DifferenceMode::kEuclidean) return (pair.abnormal - pair.normal).norm() / d;
  return (pair.abnormal - pair.normal).cwiseAbs().sum() / d;
}

double similarity_score(const PrototypePair& pair, std::span<const Eigen::VectorXd> embeddings) {
  if (embeddings.empty()) throw ArgumentError("similarity score needs at least one embedding");
  double total = 0.0;
  for (const auto& z : embeddings) {
    total += (z - pair.normal).norm() + (z - pair.abnormal).norm();
  }
  return total / static_cast<double>(embeddings.size());
}

double retention_score(double difference, double similarity, double lambda_d, double lambda_e) {
  return lambda_d * difference - lambda_e * similarity;
}

double ranking_score(const PrototypePair& pair, ScoreKind kind) {
  if (kind == ScoreKind::kDifference) return pair.difference;
  if (!pair.retention) throw ArgumentError("prototype pair has no retention score yet");
  return *pair.retention;
}

PrototypeBuffer::PrototypeBuffer(std::size_t capacity, DifferenceMode mode)
    : capacity_(capacity), mode_(mode) {
  if (capacity == 0) throw ArgumentError("prototype buffer capacity must be positive");
  entries_.reserve(std::min<std::size_t>(capacity, 4096));
}

std::optional<std::size_t> PrototypeBuffer::worst_index(ScoreKind kind) const {
  if (entries_.empty()) return std::nullopt;
  std::size_t worst = 0;
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (ranking_score(entries_[i], kind) < ranking_score(entries_[worst], kind)) worst = i;
  }
  return worst;
}

std::optional<std::size_t> PrototypeBuffer::best_index(ScoreKind kind) const {
  if (entries_.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (ranking_score(entries_[i], kind) > ranking_score(entries_[best], kind)) best = i;
  }
  return best;
}

InsertOutcome PrototypeBuffer::insert(PrototypePair pair, ScoreKind kind) {
  const double score = ranking_score(pair, kind);
  if (!full()) {
    entries_.push_back(std::move(pair));
    return InsertOutcome::kAppended;
  }
  const std::size_t victim = *worst_index(kind);
  if (!(score > ranking_score(entries_[victim], kind))) return InsertOutcome::kRejected;
  entries_.erase(entries_.begin() + static_cast<long>(victim));
  entries_.push_back(std::move(pair));
  return InsertOutcome::kReplaced;
}

std::optional<PrototypePair> PrototypeBuffer::best(ScoreKind kind) const {
  auto idx = best_index(kind);
  if (!idx) return std::nullopt;
  return entries_[*idx];
}

void PrototypeBuffer::rescore(std::span<const Eigen::VectorXd> embeddings, double lambda_d,
                              double lambda_e) {
  if (embeddings.empty()) throw ArgumentError("rescoring needs new-domain embeddings");
  for (PrototypePair& e : entries_) {
    e.difference = difference_score(e, mode_);
    e.similarity = similarity_score(e, embeddings);
    e.retention = retention_score(e.difference, *e.similarity, lambda_d, lambda_e);
  }
}

void PrototypeBuffer::restore(std::vector<PrototypePair> entries) {
  if (entries.size() > capacity_) throw FormatError("buffer entries exceed capacity");
  entries_ = std::move(entries);
}

std::size_t buffer_capacity(std::size_t training_edges, double fraction, std::size_t floor,
                            std::size_t ceiling) {
  const auto raw = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(training_edges)));
  return std::clamp(raw, floor, ceiling);
}

}  // namespace dgad
