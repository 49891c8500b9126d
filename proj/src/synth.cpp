#include "dgad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "dgad/error.hpp"
#include "dgad/random.hpp"

namespace dgad {

namespace {

using Pair = std::pair<NodeId, NodeId>;

Pair ordered(NodeId a, NodeId b) { return a < b ? Pair{a, b} : Pair{b, a}; }

// Inverse CDF of the density proportional to 1 + trend * (2u - 1) on [0, 1].
double tilted_uniform(double u, double trend) {
  if (std::abs(trend) < 1e-12) return u;
  const double a = trend;
  const double b = 1.0 - trend;
  // a u^2 + b u - target = 0 with target in [0, 1].
  const double disc = std::sqrt(b * b + 4.0 * a * u);
  return std::clamp((-b + disc) / (2.0 * a), 0.0, 1.0);
}

}  // namespace

SyntheticGraph generate_synthetic(const SynthSpec& spec) {
  const long c_signed = static_cast<long>(spec.communities) + spec.shift.community_delta;
  if (c_signed < 1) throw ArgumentError("at least one community is required");
  const auto communities = static_cast<std::size_t>(c_signed);
  if (spec.nodes < 2 * communities) {
    throw CapacityError("every community needs at least two nodes");
  }
  if (spec.feature_dim == 0) throw ArgumentError("feature_dim must be at least 1");
  if (!(spec.time_span > 0.0)) throw ArgumentError("time_span must be positive");
  if (!(spec.inter_fraction >= 0.0 && spec.inter_fraction <= 1.0)) {
    throw ArgumentError("inter_fraction must lie in [0, 1]");
  }
  if (std::abs(spec.shift.rate_trend) > 1.0) throw ArgumentError("rate_trend must lie in [-1, 1]");

  SyntheticGraph out;
  out.communities = communities;
  out.community.resize(spec.nodes);
  std::vector<std::vector<NodeId>> members(communities);
  for (std::size_t v = 0; v < spec.nodes; ++v) {
    out.community[v] = v % communities;
    members[v % communities].push_back(static_cast<NodeId>(v));
  }

  std::size_t intra_capacity = 0;
  for (const auto& m : members) intra_capacity += m.size() * (m.size() - 1) / 2;
  const std::size_t all_pairs = spec.nodes * (spec.nodes - 1) / 2;
  const std::size_t inter_capacity = all_pairs - intra_capacity;
  const auto inter_edges =
      static_cast<std::size_t>(std::llround(spec.inter_fraction * static_cast<double>(spec.edges)));
  const std::size_t intra_edges = spec.edges - inter_edges;
  if (intra_edges > intra_capacity || inter_edges > inter_capacity) {
    throw CapacityError("cannot place " + std::to_string(spec.edges) +
                        " distinct edges in this community layout");
  }

  std::mt19937_64 rng(derive_seed(spec.seed, "synth.structure"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double scale = 1.0 + spec.shift.scale_delta;
  const std::uint64_t structure = spec.structure_seed.value_or(spec.seed);
  std::mt19937_64 jitter_rng(derive_seed(spec.seed, "synth.jitter"));
  std::vector<std::vector<double>> centroid(communities, std::vector<double>(spec.feature_dim));
  for (std::size_t c = 0; c < communities; ++c) {
    std::mt19937_64 crng(derive_seed(structure, "synth.centroid", c));
    for (double& x : centroid[c]) {
      x = scale * (gauss(crng) + spec.shift.centroid_jitter * gauss(jitter_rng));
    }
  }

  std::set<Pair> used;
  std::vector<std::pair<Pair, std::size_t>> placed;  // pair with its feature community
  placed.reserve(spec.edges);

  // Intra-community pairs: a community is drawn with probability
  // proportional to its pair count, then a free pair inside it.
  std::vector<double> weights;
  for (const auto& m : members) weights.push_back(static_cast<double>(m.size() * (m.size() - 1)));
  std::discrete_distribution<std::size_t> pick_comm(weights.begin(), weights.end());
  const bool dense_intra = 2 * intra_edges > intra_capacity;
  if (dense_intra) {
    std::vector<std::pair<Pair, std::size_t>> pool;
    for (std::size_t c = 0; c < communities; ++c) {
      for (std::size_t i = 0; i < members[c].size(); ++i) {
        for (std::size_t j = i + 1; j < members[c].size(); ++j) {
          pool.push_back({ordered(members[c][i], members[c][j]), c});
        }
      }
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(intra_edges);
    for (const auto& p : pool) used.insert(p.first);
    placed = std::move(pool);
  } else {
    while (placed.size() < intra_edges) {
      const std::size_t c = pick_comm(rng);
      std::uniform_int_distribution<std::size_t> pick(0, members[c].size() - 1);
      const NodeId a = members[c][pick(rng)];
      const NodeId b = members[c][pick(rng)];
      if (a == b) continue;
      const Pair p = ordered(a, b);
      if (!used.insert(p).second) continue;
      placed.push_back({p, c});
    }
  }

  std::uniform_int_distribution<NodeId> any_node(0, static_cast<NodeId>(spec.nodes) - 1);
  std::size_t inter_placed = 0;
  while (inter_placed < inter_edges) {
    const NodeId a = any_node(rng);
    const NodeId b = any_node(rng);
    if (out.community[static_cast<std::size_t>(a)] == out.community[static_cast<std::size_t>(b)]) {
      continue;
    }
    const Pair p = ordered(a, b);
    if (!used.insert(p).second) continue;
    placed.push_back({p, out.community[static_cast<std::size_t>(unit(rng) < 0.5 ? a : b)]});
    ++inter_placed;
  }

  std::mt19937_64 sample_rng(derive_seed(spec.seed, "synth.samples"));
  std::vector<Edge> edges;
  edges.reserve(placed.size());
  for (const auto& [pair, c] : placed) {
    Edge e;
    const bool flip = unit(sample_rng) < 0.5;
    e.src = flip ? pair.second : pair.first;
    e.dst = flip ? pair.first : pair.second;
    const double t = tilted_uniform(unit(sample_rng), spec.shift.rate_trend) * spec.time_span;
    e.time = std::round(t * 1000.0) / 1000.0;
    e.features.resize(spec.feature_dim);
    for (std::size_t k = 0; k < spec.feature_dim; ++k) {
      e.features[k] = centroid[c][k] + spec.shift.feature_offset + spec.noise * gauss(sample_rng);
    }
    e.label = Label::kUnknown;
    edges.push_back(std::move(e));
  }
  out.graph = DynamicGraph(std::move(edges), spec.feature_dim);
  return out;
}

}  // namespace dgad
