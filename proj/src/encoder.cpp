#include "dgad/encoder.hpp"

#include <cmath>
#include <random>

#include "dgad/error.hpp"

namespace dgad {

void EncoderConfig::validate() const {
  if (input_dim == 0) throw ShapeError("encoder input dimension must be positive");
  if (layer_dims.empty()) throw ShapeError("encoder needs at least one GNN layer");
  for (std::size_t d : layer_dims) {
    if (d == 0) throw ShapeError("GNN layer width must be positive");
  }
  if (attention_dim == 0 || prototype_dim == 0) {
    throw ShapeError("attention and prototype widths must be positive");
  }
}

EncoderParams::EncoderParams(EncoderConfig config) : config_(std::move(config)) {
  config_.validate();
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    blocks_.push_back({std::move(name), offset, rows, cols});
    offset += rows * cols;
  };
  for (std::size_t l = 0; l < config_.layers(); ++l) {
    add("gnn" + std::to_string(l) + ".w1", config_.layer_input(l), config_.layer_dims[l]);
    add("gnn" + std::to_string(l) + ".w2", config_.layer_input(l), config_.layer_dims[l]);
  }
  const std::size_t d = config_.embed_dim();
  add("attn.wq", d, config_.attention_dim);
  add("attn.wk", d, config_.attention_dim);
  add("attn.wv", d, config_.attention_dim);
  add("proj.wp", config_.attention_dim, config_.prototype_dim);
  values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

EncoderParams EncoderParams::initialize(EncoderConfig config, std::uint64_t seed) {
  EncoderParams params(std::move(config));
  std::mt19937_64 rng(seed);
  for (const Block& b : params.blocks_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(b.rows));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < b.size(); ++i) {
      params.values_(static_cast<Eigen::Index>(b.offset + i)) = dist(rng);
    }
  }
  return params;
}

EncoderParams::ConstMatrixMap EncoderParams::view(std::size_t b) const {
  const Block& blk = blocks_.at(b);
  return ConstMatrixMap(values_.data() + blk.offset, static_cast<Eigen::Index>(blk.rows),
                        static_cast<Eigen::Index>(blk.cols));
}

EncoderParams::MatrixMap EncoderParams::view(std::size_t b) {
  const Block& blk = blocks_.at(b);
  return MatrixMap(values_.data() + blk.offset, static_cast<Eigen::Index>(blk.rows),
                   static_cast<Eigen::Index>(blk.cols));
}

namespace {

void activate(Eigen::MatrixXd& m, Activation act) {
  if (act == Activation::kRelu) m = m.cwiseMax(0.0);
}

void check_layer_input(const Eigen::MatrixXd& h, const Eigen::MatrixXd& a, std::size_t layer,
                       const EncoderParams& params) {
  if (layer >= params.config().layers()) {
    throw ShapeError("GNN layer index " + std::to_string(layer) + " out of range");
  }
  if (a.rows() != h.rows() || a.cols() != h.rows()) {
    throw ShapeError("adjacency is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " but features have " +
                     std::to_string(h.rows()) + " rows");
  }
  if (static_cast<std::size_t>(h.cols()) != params.config().layer_input(layer)) {
    throw ShapeError("layer " + std::to_string(layer) + " expects width " +
                     std::to_string(params.config().layer_input(layer)) + ", got " +
                     std::to_string(h.cols()));
  }
}

}  // namespace

Eigen::MatrixXd gnn_forward(const Eigen::MatrixXd& h_prev, const Eigen::MatrixXd& adjacency,
                            std::size_t layer, const EncoderParams& params) {
  check_layer_input(h_prev, adjacency, layer, params);
  Eigen::MatrixXd out = (adjacency * h_prev) * params.w1(layer) + h_prev * params.w2(layer);
  activate(out, params.config().activation);
  return out;
}

Eigen::MatrixXd residual_center(const Eigen::MatrixXd& h) {
  if (h.rows() == 0) throw ShapeError("cannot center an empty matrix");
  return h.rowwise() - h.colwise().mean();
}

namespace {

// Returns the softmax weights and fills query/keys/values.
Eigen::VectorXd attention_weights(const Eigen::MatrixXd& h, std::size_t center,
                                  const EncoderParams& params, Eigen::RowVectorXd& query,
                                  Eigen::MatrixXd& keys) {
  if (static_cast<std::size_t>(h.cols()) != params.config().embed_dim()) {
    throw ShapeError("attention input width does not match encoder width");
  }
  if (center >= static_cast<std::size_t>(h.rows())) {
    throw ShapeError("attention center row out of range");
  }
  query = h.row(static_cast<Eigen::Index>(center)) * params.wq();
  keys = h * params.wk();
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.config().attention_dim));
  Eigen::VectorXd logits = (keys * query.transpose()) * scale;
  logits.array() -= logits.maxCoeff();
  Eigen::VectorXd w = logits.array().exp();
  return w / w.sum();
}

}  // namespace

Eigen::RowVectorXd attention_pool(const Eigen::MatrixXd& h, std::size_t center,
                                  const EncoderParams& params) {
  Eigen::RowVectorXd query;
  Eigen::MatrixXd keys;
  const Eigen::VectorXd w = attention_weights(h, center, params, query, keys);
  return w.transpose() * (h * params.wv());
}

EdgeEmbedding encode(const TemporalEgoGraph& ego, const EncoderParams& params,
                     EncoderTape* tape) {
  const auto& cfg = params.config();
  if (ego.h0.rows() == 0) throw ShapeError("ego-graph has no initial features");
  if (static_cast<std::size_t>(ego.h0.cols()) != cfg.input_dim) {
    throw ShapeError("ego feature width " + std::to_string(ego.h0.cols()) +
                     " does not match encoder input width " + std::to_string(cfg.input_dim));
  }
  EncoderTape local;
  EncoderTape& t = tape ? *tape : local;
  t.inputs.clear();
  t.aggregated.clear();
  t.preact.clear();

  Eigen::MatrixXd h = ego.h0;
  for (std::size_t l = 0; l < cfg.layers(); ++l) {
    check_layer_input(h, ego.adjacency, l, params);
    Eigen::MatrixXd agg = ego.adjacency * h;
    Eigen::MatrixXd pre = agg * params.w1(l) + h * params.w2(l);
    Eigen::MatrixXd out = pre;
    activate(out, cfg.activation);
    if (tape) {
      t.inputs.push_back(std::move(h));
      t.aggregated.push_back(std::move(agg));
      t.preact.push_back(std::move(pre));
    }
    h = std::move(out);
  }
  t.centered = residual_center(h);
  t.weights = attention_weights(t.centered, ego.center_index, params, t.query, t.keys);
  t.values = t.centered * params.wv();
  t.pooled = t.weights.transpose() * t.values;

  EdgeEmbedding z;
  z.values = (t.pooled * params.wp()).transpose();
  z.edge_ref = ego.edge_ids.empty() ? 0 : ego.edge_ids[ego.center_index];
  return z;
}

void backpropagate(const TemporalEgoGraph& ego, const EncoderParams& params,
                   const EncoderTape& tape, const Eigen::VectorXd& grad_z, EncoderParams& grad) {
  const auto& cfg = params.config();
  const auto center = static_cast<Eigen::Index>(ego.center_index);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.attention_dim));
  const Eigen::RowVectorXd gz = grad_z.transpose();

  // Projection.
  grad.wp().noalias() += tape.pooled.transpose() * gz;
  const Eigen::RowVectorXd g_pooled = gz * params.wp().transpose();

  // Attention: pooled = w^T V with w = softmax(K q^T * scale).
  Eigen::MatrixXd g_values = tape.weights * g_pooled;
  const Eigen::VectorXd g_w = tape.values * g_pooled.transpose();
  const double mean_gw = tape.weights.dot(g_w);
  const Eigen::VectorXd g_logits = tape.weights.array() * (g_w.array() - mean_gw);
  const Eigen::RowVectorXd g_query = (g_logits.transpose() * tape.keys) * scale;
  const Eigen::MatrixXd g_keys = (g_logits * tape.query) * scale;

  grad.wq().noalias() += tape.centered.row(center).transpose() * g_query;
  grad.wk().noalias() += tape.centered.transpose() * g_keys;
  grad.wv().noalias() += tape.centered.transpose() * g_values;

  Eigen::MatrixXd g_centered = g_keys * params.wk().transpose();
  g_centered.noalias() += g_values * params.wv().transpose();
  g_centered.row(center) += g_query * params.wq().transpose();

  // Centering is a symmetric projection.
  Eigen::MatrixXd g_h = g_centered.rowwise() - g_centered.colwise().mean();

  for (std::size_t li = cfg.layers(); li-- > 0;) {
    Eigen::MatrixXd g_pre = g_h;
    if (cfg.activation == Activation::kRelu) {
      g_pre = (tape.preact[li].array() > 0.0).select(g_h, 0.0);
    }
    grad.w1(li).noalias() += tape.aggregated[li].transpose() * g_pre;
    grad.w2(li).noalias() += tape.inputs[li].transpose() * g_pre;
    if (li > 0) {
      g_h = ego.adjacency.transpose() * (g_pre * params.w1(li).transpose());
      g_h.noalias() += g_pre * params.w2(li).transpose();
    }
  }
}

}  // namespace dgad
