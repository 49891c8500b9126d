#include "dgad/egograph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dgad/error.hpp"

namespace dgad {

Eigen::MatrixXd edge_adjacency(const std::vector<Edge>& edges) {
  const auto n = static_cast<Eigen::Index>(edges.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (edges[i].shares_endpoint(edges[j])) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
  }
  return a;
}

Eigen::RowVectorXd encode_time_lag(double lag, std::size_t dim) {
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(dim));
  const double d = static_cast<double>(dim);
  for (std::size_t m = 0; m < dim; ++m) {
    const double pair = static_cast<double>(m / 2);
    const double rate = std::pow(10000.0, -2.0 * pair / d);
    out(static_cast<Eigen::Index>(m)) = m % 2 == 0 ? std::sin(lag * rate) : std::cos(lag * rate);
  }
  return out;
}

Eigen::MatrixXd build_initial_features(const TemporalEgoGraph& ego, double center_time,
                                       std::size_t time_dim) {
  if (ego.edges.empty()) throw ArgumentError("ego-graph has no edges");
  const std::size_t feature_dim = ego.edges.front().features.size();
  const auto rows = static_cast<Eigen::Index>(ego.edges.size());
  const auto cols = static_cast<Eigen::Index>(feature_dim + time_dim);
  Eigen::MatrixXd h0(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Edge& e = ego.edges[static_cast<std::size_t>(i)];
    const double lag = center_time - e.time;
    if (lag < 0.0) {
      throw ConsistencyError("ego-graph edge occurs after its center (lag " +
                             std::to_string(lag) + ")");
    }
    for (std::size_t f = 0; f < feature_dim; ++f) {
      h0(i, static_cast<Eigen::Index>(f)) = e.features[f];
    }
    if (time_dim > 0) {
      h0.block(i, static_cast<Eigen::Index>(feature_dim), 1,
               static_cast<Eigen::Index>(time_dim)) = encode_time_lag(lag, time_dim);
    }
  }
  return h0;
}

EgoExtractor::EgoExtractor(const DynamicGraph& graph)
    : graph_(&graph), node_ids_(graph.nodes()), incident_(graph.nodes().size()) {
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const Edge& e = graph.edge(i);
    const auto add = [&](NodeId node) {
      auto pos = std::lower_bound(node_ids_.begin(), node_ids_.end(), node) - node_ids_.begin();
      auto& list = incident_[static_cast<std::size_t>(pos)];
      if (list.empty() || list.back() != i) list.push_back(i);
    };
    add(e.src);
    add(e.dst);
  }
}

const std::vector<std::size_t>& EgoExtractor::incident(NodeId node) const {
  auto it = std::lower_bound(node_ids_.begin(), node_ids_.end(), node);
  return incident_[static_cast<std::size_t>(it - node_ids_.begin())];
}

TemporalEgoGraph EgoExtractor::extract(std::size_t center, std::size_t hops,
                                       std::size_t cap) const {
  if (center >= graph_->size()) {
    throw LookupError("center edge index " + std::to_string(center) + " is out of range");
  }
  if (cap == 0) throw ArgumentError("ego cap must be at least 1");
  const auto& edges = graph_->edges();
  const double t_center = edges[center].time;

  std::unordered_set<std::size_t> visited{center};
  std::vector<std::size_t> frontier{center};
  std::vector<std::size_t> found;
  for (std::size_t hop = 0; hop < hops && !frontier.empty(); ++hop) {
    std::vector<std::size_t> next;
    for (std::size_t idx : frontier) {
      for (NodeId node : {edges[idx].src, edges[idx].dst}) {
        for (std::size_t j : incident(node)) {
          if (edges[j].time > t_center) break;  // incidence lists are time ordered
          if (visited.insert(j).second) next.push_back(j);
        }
      }
    }
    found.insert(found.end(), next.begin(), next.end());
    frontier = std::move(next);
  }

  std::sort(found.begin(), found.end(), [&](std::size_t a, std::size_t b) {
    if (edges[a].time != edges[b].time) return edges[a].time > edges[b].time;
    return a < b;
  });
  if (found.size() > cap - 1) found.resize(cap - 1);

  TemporalEgoGraph ego;
  ego.center_index = 0;
  ego.edge_ids.reserve(found.size() + 1);
  ego.edge_ids.push_back(center);
  ego.edge_ids.insert(ego.edge_ids.end(), found.begin(), found.end());
  ego.edges.reserve(ego.edge_ids.size());
  for (std::size_t idx : ego.edge_ids) ego.edges.push_back(edges[idx]);
  ego.adjacency = edge_adjacency(ego.edges);
  return ego;
}

TemporalEgoGraph EgoExtractor::sample(std::size_t center, const EgoOptions& options) const {
  TemporalEgoGraph ego = extract(center, options.hops, options.cap);
  ego.h0 = build_initial_features(ego, ego.center_time(), options.time_dim);
  return ego;
}

TemporalEgoGraph extract_ego(const DynamicGraph& g, std::size_t center, std::size_t hops,
                             std::size_t cap) {
  return EgoExtractor(g).extract(center, hops, cap);
}

TemporalEgoGraph extract_ego(const DynamicGraph& g, const Edge& center, std::size_t hops,
                             std::size_t cap) {
  auto idx = g.find(center);
  if (!idx) throw LookupError("center edge is not part of the graph");
  return extract_ego(g, *idx, hops, cap);
}

std::vector<TemporalEgoGraph> sample_egos(const DynamicGraph& g, std::size_t begin,
                                          std::size_t end, const EgoOptions& options) {
  EgoExtractor extractor(g);
  std::vector<TemporalEgoGraph> out;
  out.reserve(end > begin ? end - begin : 0);
  for (std::size_t i = begin; i < end; ++i) out.push_back(extractor.sample(i, options));
  return out;
}

}  // namespace dgad
