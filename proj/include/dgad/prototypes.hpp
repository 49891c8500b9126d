#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgad/dyngraph.hpp"

namespace dgad {

struct PrototypePair {
  Eigen::VectorXd normal;    // p_n
  Eigen::VectorXd abnormal;  // p_a
  double difference = 0.0;   // s_d
  std::optional<double> similarity;  // s_e against the most recent new domain
  std::optional<double> retention;   // s_r
  std::string origin;

  std::size_t dim() const { return static_cast<std::size_t>(normal.size()); }
};

enum class ScoreKind { kDifference, kRetention };

// kPerDimension averages |p_a^m - p_n^m| over dimensions; kEuclidean uses
// ||p_a - p_n||_2 / d_p instead.
enum class DifferenceMode { kPerDimension, kEuclidean };

// Sum over i of ||z_i - p_{y_i}||^2. Labels must be resolved to 0/1.
double alignment_loss(std::span<const Eigen::VectorXd> embeddings, std::span<const Label> labels,
                      const PrototypePair& pair);

double difference_score(const PrototypePair& pair,
                        DifferenceMode mode = DifferenceMode::kPerDimension);

// Mean over embeddings of ||z - p_n|| + ||z - p_a||.
double similarity_score(const PrototypePair& pair, std::span<const Eigen::VectorXd> embeddings);

double retention_score(double difference, double similarity, double lambda_d, double lambda_e);

double ranking_score(const PrototypePair& pair, ScoreKind kind);

enum class InsertOutcome { kAppended, kReplaced, kRejected };

// Bounded store of prototype pairs. Entries stay in insertion order, which
// is also the tie-break order for best().
class PrototypeBuffer {
 public:
  PrototypeBuffer() = default;
  explicit PrototypeBuffer(std::size_t capacity,
                           DifferenceMode mode = DifferenceMode::kPerDimension);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool full() const { return entries_.size() >= capacity_; }
  DifferenceMode difference_mode() const { return mode_; }

  const std::vector<PrototypePair>& entries() const { return entries_; }

  // Appends when there is room; otherwise replaces the lowest-ranked entry if
  // the candidate ranks strictly higher. The pair must already carry the
  // score named by `kind`.
  InsertOutcome insert(PrototypePair pair, ScoreKind kind);

  // Highest-ranked entry, earliest inserted on ties; nullopt if empty.
  std::optional<PrototypePair> best(ScoreKind kind) const;
  std::optional<std::size_t> best_index(ScoreKind kind) const;
  std::optional<std::size_t> worst_index(ScoreKind kind) const;

  // Recomputes s_d, s_e and s_r of every entry against new-domain embeddings.
  void rescore(std::span<const Eigen::VectorXd> embeddings, double lambda_d, double lambda_e);

  // Restores entries verbatim (checkpoint loading).
  void restore(std::vector<PrototypePair> entries);

 private:
  std::size_t capacity_ = 0;
  DifferenceMode mode_ = DifferenceMode::kPerDimension;
  std::vector<PrototypePair> entries_;
};

// Capacity rule: fraction of the training edge count, clamped to [floor, ceiling].
std::size_t buffer_capacity(std::size_t training_edges, double fraction, std::size_t floor = 4,
                            std::size_t ceiling = 4096);

}  // namespace dgad
