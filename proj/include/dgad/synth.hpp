#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dgad/dyngraph.hpp"

namespace dgad {

// Knobs that move a generated domain away from the base generator. All zero
// means the base generator itself.
struct DomainShift {
  double feature_offset = 0.0;  // added to every feature coordinate
  double scale_delta = 0.0;     // community centroids scaled by (1 + scale_delta)
  double rate_trend = 0.0;      // edge-time density tilt in [-1, 1]; 0 is uniform
  int community_delta = 0;      // extra (or fewer) communities
  double centroid_jitter = 0.0; // std-dev of a per-domain perturbation of each centroid
};

struct SynthSpec {
  std::size_t communities = 4;
  std::size_t nodes = 120;
  std::size_t edges = 800;
  double time_span = 100.0;
  std::size_t feature_dim = 8;
  double noise = 0.3;            // per-coordinate feature noise std-dev
  double inter_fraction = 0.0;   // share of edges that cross communities
  DomainShift shift;
  // Community centroid c is drawn from (structure_seed, c), so domains that
  // share a structure seed share their first communities. Defaults to seed.
  std::optional<std::uint64_t> structure_seed;
  std::uint64_t seed = 0;
};

struct SyntheticGraph {
  DynamicGraph graph;
  std::vector<std::size_t> community;  // community of node id i
  std::size_t communities = 0;
};

// Community-structured simple temporal graph: nodes 0..nodes-1 are split
// evenly across communities, distinct undirected pairs are drawn within
// communities (or across them for the inter fraction), and each edge's
// features are its (shifted) community centroid plus Gaussian noise.
// Unlabeled.
// Throws CapacityError when the requested edges cannot be placed.
SyntheticGraph generate_synthetic(const SynthSpec& spec);

}  // namespace dgad
