#pragma once

// Shared builders for small models and ego-graphs.

#include <vector>

#include "dgad/egograph.hpp"
#include "dgad/encoder.hpp"
#include "dgad/model.hpp"
#include "generators.hpp"

namespace fixture {

inline dgad::EncoderConfig small_config(std::size_t input_dim = 6) {
  dgad::EncoderConfig c;
  c.input_dim = input_dim;
  c.layer_dims = {5, 4};
  c.attention_dim = 3;
  c.prototype_dim = 3;
  return c;
}

// Random ego with `rows` edges, center first, features in [-1, 1] and a
// random symmetric 0/1 adjacency.
inline dgad::TemporalEgoGraph random_ego(gen::Rng& rng, std::size_t rows, std::size_t width) {
  dgad::TemporalEgoGraph ego;
  ego.center_index = 0;
  for (std::size_t i = 0; i < rows; ++i) ego.edge_ids.push_back(i);
  ego.h0 = gen::matrix(rng, rows, width);
  ego.adjacency = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                        static_cast<Eigen::Index>(rows));
  for (Eigen::Index i = 0; i < ego.adjacency.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < ego.adjacency.cols(); ++j) {
      if (gen::uniform(rng, 0.0, 1.0) < 0.5) ego.adjacency(i, j) = ego.adjacency(j, i) = 1.0;
    }
  }
  return ego;
}

// Model with random encoder, prototypes and non-trivial statistics.
inline dgad::Model random_model(gen::Rng& rng, const dgad::EncoderConfig& config) {
  dgad::Model m;
  m.encoder = dgad::EncoderParams::initialize(config, rng());
  const std::size_t d = config.prototype_dim;
  m.prototypes.normal = gen::vector(rng, d);
  m.prototypes.abnormal = gen::vector(rng, d);
  m.stats = dgad::DistributionStats::zeros(d);
  m.stats.mu_normal = gen::vector(rng, d);
  m.stats.mu_abnormal = gen::vector(rng, d);
  const Eigen::MatrixXd a = gen::matrix(rng, d, d, 0.5);
  const Eigen::MatrixXd b = gen::matrix(rng, d, d, 0.5);
  m.stats.sigma_normal = a * a.transpose();
  m.stats.sigma_abnormal = b * b.transpose();
  m.stats.lambda_normal = 0.3;
  m.stats.lambda_abnormal = 0.2;
  return m;
}

}  // namespace fixture
