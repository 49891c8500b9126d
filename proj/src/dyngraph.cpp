#include "dgad/dyngraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dgad/error.hpp"

namespace dgad {

namespace {
std::size_t first_width(const std::vector<Edge>& edges) {
  return edges.empty() ? 0 : edges.front().features.size();
}
}  // namespace

DynamicGraph::DynamicGraph(std::vector<Edge> edges) : feature_dim_(first_width(edges)) {
  *this = DynamicGraph(std::move(edges), feature_dim_);
}

DynamicGraph::DynamicGraph(std::vector<Edge> edges, std::size_t feature_dim)
    : edges_(std::move(edges)), feature_dim_(feature_dim) {
  std::stable_sort(edges_.begin(), edges_.end(),
                   [](const Edge& a, const Edge& b) { return a.time < b.time; });
  std::vector<NodeId> nodes;
  nodes.reserve(edges_.size() * 2);
  for (const Edge& e : edges_) {
    if (!(e.time >= 0.0) || !std::isfinite(e.time)) {
      throw SchemaError("edge timestamp must be finite and non-negative");
    }
    if (e.features.size() != feature_dim_) {
      throw SchemaError("edge feature width " + std::to_string(e.features.size()) +
                        " differs from graph width " + std::to_string(feature_dim_));
    }
    nodes.push_back(e.src);
    nodes.push_back(e.dst);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  nodes_ = std::move(nodes);
}

bool DynamicGraph::fully_labeled() const {
  return std::all_of(edges_.begin(), edges_.end(),
                     [](const Edge& e) { return is_known(e.label); });
}

bool DynamicGraph::any_labeled() const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [](const Edge& e) { return is_known(e.label); });
}

void DynamicGraph::set_node_features(Eigen::MatrixXd features) {
  if (static_cast<std::size_t>(features.rows()) != nodes_.size()) {
    throw ShapeError("node feature rows must equal node count");
  }
  node_features_ = std::move(features);
}

std::optional<std::size_t> DynamicGraph::find(const Edge& e) const {
  auto lo = std::lower_bound(edges_.begin(), edges_.end(), e.time,
                             [](const Edge& a, double t) { return a.time < t; });
  for (auto it = lo; it != edges_.end() && it->time == e.time; ++it) {
    if (it->src == e.src && it->dst == e.dst && it->features == e.features) {
      return static_cast<std::size_t>(it - edges_.begin());
    }
  }
  return std::nullopt;
}

DynamicGraph strip_labels(const DynamicGraph& g) {
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) e.label = Label::kUnknown;
  return DynamicGraph(std::move(edges), g.feature_dim());
}

// ---------------------------------------------------------------------------
// Edge-list text format

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_unknown_token(std::string_view s) {
  return s.empty() || s == "?" || s == "unknown" || s == "nan" || s == "NA";
}

struct ColumnIndex {
  std::size_t src = 0, dst = 0, time = 0;
  std::optional<std::size_t> label;
  std::vector<std::size_t> features;
  std::size_t width = 0;
};

ColumnIndex resolve_columns(const std::vector<std::string_view>& header,
                            const EdgeListSchema& schema) {
  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  ColumnIndex idx;
  idx.width = header.size();
  auto require = [&](const std::string& name) {
    auto c = find_column(name);
    if (!c) throw SchemaError("edge list header lacks required column '" + name + "'");
    return *c;
  };
  idx.src = require(schema.src);
  idx.dst = require(schema.dst);
  idx.time = require(schema.time);
  if (!schema.label.empty()) idx.label = find_column(schema.label);

  if (!schema.features.empty()) {
    for (const auto& name : schema.features) idx.features.push_back(require(name));
  } else {
    std::map<long, std::size_t> numbered;
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string_view h = header[i];
      if (h.size() < 2 || h.front() != 'f') continue;
      long n = 0;
      if (parse_number(h.substr(1), n) && n >= 0) numbered.emplace(n, i);
    }
    for (const auto& [n, col] : numbered) idx.features.push_back(col);
  }
  return idx;
}

}  // namespace

DynamicGraph parse_edge_list(const std::string& text, const EdgeListSchema& schema) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::optional<ColumnIndex> columns;
  std::vector<Edge> edges;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    auto fields = split_fields(view, schema.delimiter);
    if (!columns) {
      columns = resolve_columns(fields, schema);
      continue;
    }
    if (fields.size() != columns->width) {
      throw ParseError("expected " + std::to_string(columns->width) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    Edge e;
    if (!parse_number(fields[columns->src], e.src)) {
      throw ParseError("source node id is not an integer", line_no);
    }
    if (!parse_number(fields[columns->dst], e.dst)) {
      throw ParseError("destination node id is not an integer", line_no);
    }
    if (!parse_number(fields[columns->time], e.time)) {
      throw SchemaError("line " + std::to_string(line_no) + ": time value '" +
                        std::string(fields[columns->time]) + "' is not numeric");
    }
    if (!(e.time >= 0.0)) throw ParseError("negative timestamp", line_no);
    if (columns->label) {
      std::string_view v = fields[*columns->label];
      if (is_unknown_token(v)) {
        e.label = Label::kUnknown;
      } else if (v == "0") {
        e.label = Label::kNormal;
      } else if (v == "1") {
        e.label = Label::kAbnormal;
      } else {
        throw ParseError("label must be 0, 1 or empty", line_no);
      }
    }
    e.features.reserve(columns->features.size());
    for (std::size_t col : columns->features) {
      double value = 0.0;
      if (!parse_number(fields[col], value)) {
        throw ParseError("feature value is not numeric", line_no);
      }
      e.features.push_back(value);
    }
    edges.push_back(std::move(e));
  }
  return DynamicGraph(std::move(edges));
}

DynamicGraph load_edge_list(const std::filesystem::path& path, const EdgeListSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open edge list '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_edge_list(buffer.str(), schema);
}

namespace {

void write_number(std::ostream& out, double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    out << static_cast<long long>(v);
  } else {
    out << std::setprecision(17) << v;
  }
}

}  // namespace

std::string format_edge_list(const DynamicGraph& g) {
  std::ostringstream out;
  out << "src,dst,time,label";
  for (std::size_t f = 0; f < g.feature_dim(); ++f) out << ",f" << f;
  out << '\n';
  for (const Edge& e : g.edges()) {
    out << e.src << ',' << e.dst << ',';
    write_number(out, e.time);
    out << ',';
    if (is_known(e.label)) out << static_cast<int>(e.label);
    for (double v : e.features) {
      out << ',';
      write_number(out, v);
    }
    out << '\n';
  }
  return out.str();
}

void save_edge_list(const DynamicGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write edge list '" + path.string() + "'");
  out << format_edge_list(g);
}

// ---------------------------------------------------------------------------
// Anomaly injection

std::size_t injection_count(double ratio, std::size_t m) {
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(m) + 1e-9));
}

namespace {

using PairKey = std::pair<NodeId, NodeId>;

PairKey unordered(NodeId a, NodeId b) { return a < b ? PairKey{a, b} : PairKey{b, a}; }

struct PairHash {
  std::size_t operator()(const PairKey& p) const {
    const auto a = static_cast<std::uint64_t>(p.first);
    const auto b = static_cast<std::uint64_t>(p.second);
    return std::hash<std::uint64_t>()(a * 0x9E3779B97F4A7C15ULL ^ (b + 0x7F4A7C15ULL));
  }
};

}  // namespace

DynamicGraph inject_anomalies(const DynamicGraph& g, double ratio, std::uint64_t seed,
                              std::size_t first_edge) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ArgumentError("anomaly ratio must lie in (0, 1]");
  }
  if (g.empty()) throw ArgumentError("cannot inject anomalies into an empty graph");

  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) {
    if (e.label == Label::kUnknown) e.label = Label::kNormal;
  }

  if (first_edge >= g.size()) throw ArgumentError("injection scope is empty");
  std::vector<double> timestamps;
  const std::size_t m = g.size() - first_edge;
  for (std::size_t i = first_edge; i < g.size(); ++i) timestamps.push_back(g.edge(i).time);
  timestamps.erase(std::unique(timestamps.begin(), timestamps.end()), timestamps.end());

  const std::size_t count = injection_count(ratio, m);
  if (count == 0) return DynamicGraph(std::move(edges), g.feature_dim());

  std::unordered_set<PairKey, PairHash> taken;
  taken.reserve(g.size() * 2 + count * 2);
  for (const Edge& e : g.edges()) taken.insert(unordered(e.src, e.dst));
  std::size_t self_loops = 0;
  for (const auto& p : taken) self_loops += p.first == p.second ? 1 : 0;

  const auto& nodes = g.nodes();
  const std::size_t n = nodes.size();
  const std::size_t total_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  const std::size_t available = total_pairs - (taken.size() - self_loops);
  if (available < count) {
    throw CapacityError("only " + std::to_string(available) +
                        " disconnected node pairs available, " + std::to_string(count) +
                        " anomalies requested");
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_node(0, n - 1);
  std::uniform_int_distribution<std::size_t> pick_time(0, timestamps.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_edge(0, g.size() - 1);

  std::vector<PairKey> chosen;
  chosen.reserve(count);
  // Rejection sampling is uniform over the free pairs; fall back to explicit
  // enumeration when the free set is too sparse for it to finish quickly.
  const bool sparse_free = available < 4 * count || available * 8 < total_pairs;
  if (!sparse_free) {
    while (chosen.size() < count) {
      const std::size_t a = pick_node(rng);
      const std::size_t b = pick_node(rng);
      if (a == b) continue;
      PairKey key = unordered(nodes[a], nodes[b]);
      if (!taken.insert(key).second) continue;
      chosen.push_back(rng() & 1 ? PairKey{nodes[a], nodes[b]} : PairKey{nodes[b], nodes[a]});
    }
  } else {
    std::vector<PairKey> free_pairs;
    free_pairs.reserve(available);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!taken.count({nodes[a], nodes[b]})) free_pairs.emplace_back(nodes[a], nodes[b]);
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, free_pairs.size() - 1);
      std::swap(free_pairs[i], free_pairs[pick(rng)]);
      const PairKey& p = free_pairs[i];
      chosen.push_back(rng() & 1 ? p : PairKey{p.second, p.first});
    }
  }

  for (const PairKey& p : chosen) {
    Edge e;
    e.src = p.first;
    e.dst = p.second;
    e.time = timestamps[pick_time(rng)];
    e.features = g.edge(pick_edge(rng)).features;
    e.label = Label::kAbnormal;
    edges.push_back(std::move(e));
  }
  // Stable sort keeps injected edges after originals sharing a timestamp.
  return DynamicGraph(std::move(edges), g.feature_dim());
}

// ---------------------------------------------------------------------------
// Interval partitioning and splitting

std::vector<IntervalView> split_intervals(const DynamicGraph& g, std::size_t count) {
  if (count == 0) throw ArgumentError("interval count must be at least 1");
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i == 0 || g.edge(i).time != g.edge(i - 1).time) ++distinct;
  }
  if (count > std::max<std::size_t>(distinct, 1) || (g.empty() && count > 1)) {
    throw ArgumentError("cannot split " + std::to_string(distinct) +
                        " distinct timestamps into " + std::to_string(count) + " intervals");
  }
  std::vector<IntervalView> views;
  if (g.empty()) {
    views.push_back({});
    return views;
  }
  const double t0 = g.edges().front().time;
  const double t1 = g.edges().back().time;
  const double width = (t1 - t0) / static_cast<double>(count);
  std::size_t cursor = 0;
  for (std::size_t w = 0; w < count; ++w) {
    IntervalView view;
    view.begin = cursor;
    view.t_start = t0 + width * static_cast<double>(w);
    view.t_end = w + 1 == count ? t1 : t0 + width * static_cast<double>(w + 1);
    if (w + 1 == count) {
      cursor = g.size();
    } else {
      while (cursor < g.size() && g.edge(cursor).time < view.t_end) ++cursor;
    }
    view.end = cursor;
    views.push_back(view);
  }
  return views;
}

TemporalSplit temporal_split(const DynamicGraph& g, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ArgumentError("train fraction must lie strictly between 0 and 1");
  }
  const auto cut = static_cast<std::size_t>(
      std::floor(spec.train_fraction * static_cast<double>(g.size()) + 1e-9));
  std::vector<Edge> train(g.edges().begin(), g.edges().begin() + static_cast<long>(cut));
  std::vector<Edge> test(g.edges().begin() + static_cast<long>(cut), g.edges().end());
  return {DynamicGraph(std::move(train), g.feature_dim()),
          DynamicGraph(std::move(test), g.feature_dim())};
}

}  // namespace dgad
