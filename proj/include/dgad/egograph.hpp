#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "dgad/dyngraph.hpp"

namespace dgad {

struct EgoOptions {
  std::size_t hops = 2;
  std::size_t cap = 32;
  std::size_t time_dim = 8;
};

// Line-graph neighbourhood of one center edge, restricted to edges that
// occurred at or before it. Row 0 is always the center.
struct TemporalEgoGraph {
  std::size_t center_index = 0;
  std::vector<std::size_t> edge_ids;  // indices into the parent graph
  std::vector<Edge> edges;
  Eigen::MatrixXd adjacency;  // 0/1, symmetric, zero diagonal
  Eigen::MatrixXd h0;         // initial features, filled by build_initial_features

  std::size_t size() const { return edges.size(); }
  double center_time() const { return edges.at(center_index).time; }
};

Eigen::MatrixXd edge_adjacency(const std::vector<Edge>& edges);

// Fixed sinusoidal encoding of a non-negative time lag.
Eigen::RowVectorXd encode_time_lag(double lag, std::size_t dim);

Eigen::MatrixXd build_initial_features(const TemporalEgoGraph& ego, double center_time,
                                       std::size_t time_dim);

// Holds per-node incidence lists so repeated extraction over one graph does
// not rescan the edge list. Safe for concurrent use once constructed.
class EgoExtractor {
 public:
  explicit EgoExtractor(const DynamicGraph& graph);

  const DynamicGraph& graph() const { return *graph_; }

  // Breadth-first search over shared endpoints, at most `hops` steps, keeping
  // the `cap` most recent edges (center always kept). Fills adjacency only.
  TemporalEgoGraph extract(std::size_t center, std::size_t hops, std::size_t cap) const;

  // extract() followed by build_initial_features().
  TemporalEgoGraph sample(std::size_t center, const EgoOptions& options) const;

 private:
  const DynamicGraph* graph_;
  std::vector<NodeId> node_ids_;
  std::vector<std::vector<std::size_t>> incident_;  // time-ordered edge indices

  const std::vector<std::size_t>& incident(NodeId node) const;
};

TemporalEgoGraph extract_ego(const DynamicGraph& g, std::size_t center, std::size_t hops,
                             std::size_t cap);
// Looks the center up by value; throws LookupError if it is not in g.
TemporalEgoGraph extract_ego(const DynamicGraph& g, const Edge& center, std::size_t hops,
                             std::size_t cap);

// Samples ego-graphs for every edge index in [begin, end).
std::vector<TemporalEgoGraph> sample_egos(const DynamicGraph& g, std::size_t begin,
                                          std::size_t end, const EgoOptions& options);

}  // namespace dgad
