#pragma once

// Small seeded generators for property tests.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dgad/dyngraph.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline Eigen::VectorXd vector(Rng& rng, std::size_t d, double scale = 1.0) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = uniform(rng, -scale, scale);
  return v;
}

inline Eigen::MatrixXd matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -scale, scale);
  return m;
}

// Random edges over `nodes` nodes with integer times in [0, max_time].
inline std::vector<dgad::Edge> edges(Rng& rng, std::size_t count, std::size_t nodes,
                                     int max_time, std::size_t feature_dim, bool labeled) {
  std::vector<dgad::Edge> out;
  for (std::size_t i = 0; i < count; ++i) {
    dgad::Edge e;
    e.src = static_cast<dgad::NodeId>(index(rng, nodes));
    do {
      e.dst = static_cast<dgad::NodeId>(index(rng, nodes));
    } while (e.dst == e.src && nodes > 1);
    e.time = static_cast<double>(std::uniform_int_distribution<int>(0, max_time)(rng));
    for (std::size_t f = 0; f < feature_dim; ++f) e.features.push_back(uniform(rng, -1.0, 1.0));
    e.label = labeled ? (uniform(rng, 0.0, 1.0) < 0.2 ? dgad::Label::kAbnormal : dgad::Label::kNormal)
                      : dgad::Label::kUnknown;
    out.push_back(std::move(e));
  }
  return out;
}

inline dgad::DynamicGraph graph(Rng& rng, std::size_t count, std::size_t nodes, int max_time,
                                std::size_t feature_dim, bool labeled = false) {
  return dgad::DynamicGraph(edges(rng, count, nodes, max_time, feature_dim, labeled), feature_dim);
}

}  // namespace gen
