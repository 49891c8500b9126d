#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dgad {

using NodeId = std::int64_t;

enum class Label : std::int8_t { kNormal = 0, kAbnormal = 1, kUnknown = -1 };

inline bool is_known(Label label) { return label != Label::kUnknown; }

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  double time = 0.0;
  std::vector<double> features;
  Label label = Label::kUnknown;

  bool touches(NodeId node) const { return src == node || dst == node; }
  bool shares_endpoint(const Edge& other) const {
    return touches(other.src) || touches(other.dst);
  }
};

// Half-open index range [begin, end) into DynamicGraph::edges() together with
// the time window that produced it.
struct IntervalView {
  std::size_t begin = 0;
  std::size_t end = 0;
  double t_start = 0.0;
  double t_end = 0.0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
};

// Immutable, time-sorted edge stream. Edges with equal timestamps keep their
// relative input order.
class DynamicGraph {
 public:
  DynamicGraph() = default;

  // Sorts the edges stably by time and validates the invariants (time >= 0,
  // uniform feature width). Throws SchemaError on violation.
  explicit DynamicGraph(std::vector<Edge> edges);
  // Same, but pins the feature width so an empty graph still reports it.
  DynamicGraph(std::vector<Edge> edges, std::size_t feature_dim);

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t i) const { return edges_.at(i); }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }

  // Sorted, unique node ids appearing in any edge.
  const std::vector<NodeId>& nodes() const { return nodes_; }
  std::size_t feature_dim() const { return feature_dim_; }

  // True when every edge carries a 0/1 label.
  bool fully_labeled() const;
  bool any_labeled() const;

  const std::optional<Eigen::MatrixXd>& node_features() const { return node_features_; }
  void set_node_features(Eigen::MatrixXd features);

  std::optional<std::size_t> find(const Edge& e) const;

 private:
  std::vector<Edge> edges_;
  std::vector<NodeId> nodes_;
  std::size_t feature_dim_ = 0;
  std::optional<Eigen::MatrixXd> node_features_;
};

DynamicGraph strip_labels(const DynamicGraph& g);

// Column mapping for delimiter-separated edge lists. Feature columns default
// to every header named f<digits>, ordered by the numeric suffix.
struct EdgeListSchema {
  std::string src = "src";
  std::string dst = "dst";
  std::string time = "time";
  std::string label = "label";
  std::vector<std::string> features;
  char delimiter = ',';
};

DynamicGraph load_edge_list(const std::filesystem::path& path,
                            const EdgeListSchema& schema = {});
DynamicGraph parse_edge_list(const std::string& text,
                             const EdgeListSchema& schema = {});
void save_edge_list(const DynamicGraph& g, const std::filesystem::path& path);
std::string format_edge_list(const DynamicGraph& g);

// Adds floor(ratio * m) anomalous edges between node pairs that have no edge
// (in either direction) anywhere in g, with timestamps drawn uniformly from
// the distinct existing timestamps. m and the timestamp pool cover the edges
// from index `first_edge` onward, so a suffix can be targeted while the
// first `first_edge` edges of the result stay exactly the original prefix.
DynamicGraph inject_anomalies(const DynamicGraph& g, double ratio, std::uint64_t seed,
                              std::size_t first_edge = 0);

std::size_t injection_count(double ratio, std::size_t m);

// Equal-width time windows; the final window is closed on the right.
std::vector<IntervalView> split_intervals(const DynamicGraph& g, std::size_t count);

struct SplitSpec {
  double train_fraction = 0.5;
};

struct TemporalSplit {
  DynamicGraph train;
  DynamicGraph test;
};

TemporalSplit temporal_split(const DynamicGraph& g, const SplitSpec& spec);

}  // namespace dgad
