#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgad/egograph.hpp"

namespace dgad {

enum class Activation { kRelu, kIdentity };

struct EncoderConfig {
  std::size_t input_dim = 0;                    // D_0 = edge features + time encoding
  std::vector<std::size_t> layer_dims{64, 64};  // D_1 .. D_L; the last one is d
  std::size_t attention_dim = 64;               // d_out
  std::size_t prototype_dim = 32;               // d_p
  Activation activation = Activation::kRelu;

  std::size_t layers() const { return layer_dims.size(); }
  std::size_t embed_dim() const { return layer_dims.empty() ? input_dim : layer_dims.back(); }
  std::size_t layer_input(std::size_t l) const { return l == 0 ? input_dim : layer_dims[l - 1]; }
  void validate() const;
};

// All encoder weights live in one contiguous vector; the accessors expose
// column-major views of each block. Rows of every matrix index the input side
// (activations are row vectors), so a layer computes H * W.
class EncoderParams {
 public:
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;

  struct Block {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t size() const { return rows * cols; }
  };

  EncoderParams() = default;
  // All-zero parameters with the given shape.
  explicit EncoderParams(EncoderConfig config);
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation.
  static EncoderParams initialize(EncoderConfig config, std::uint64_t seed);

  const EncoderConfig& config() const { return config_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  ConstMatrixMap w1(std::size_t layer) const { return view(layer * 2); }
  ConstMatrixMap w2(std::size_t layer) const { return view(layer * 2 + 1); }
  ConstMatrixMap wq() const { return view(blocks_.size() - 4); }
  ConstMatrixMap wk() const { return view(blocks_.size() - 3); }
  ConstMatrixMap wv() const { return view(blocks_.size() - 2); }
  ConstMatrixMap wp() const { return view(blocks_.size() - 1); }

  MatrixMap w1(std::size_t layer) { return view(layer * 2); }
  MatrixMap w2(std::size_t layer) { return view(layer * 2 + 1); }
  MatrixMap wq() { return view(blocks_.size() - 4); }
  MatrixMap wk() { return view(blocks_.size() - 3); }
  MatrixMap wv() { return view(blocks_.size() - 2); }
  MatrixMap wp() { return view(blocks_.size() - 1); }

  bool all_finite() const { return values_.allFinite(); }
  // Zero-valued parameters of the same shape, used as a gradient accumulator.
  EncoderParams zeros_like() const { return EncoderParams(config_); }

 private:
  EncoderConfig config_;
  std::vector<Block> blocks_;
  Eigen::VectorXd values_;

  ConstMatrixMap view(std::size_t b) const;
  MatrixMap view(std::size_t b);
};

struct EdgeEmbedding {
  Eigen::VectorXd values;
  std::size_t edge_ref = 0;
};

// sigma(A * H_prev * W1_l + H_prev * W2_l) for zero-based layer index l.
Eigen::MatrixXd gnn_forward(const Eigen::MatrixXd& h_prev, const Eigen::MatrixXd& adjacency,
                            std::size_t layer, const EncoderParams& params);

// Subtracts the mean row from every row.
Eigen::MatrixXd residual_center(const Eigen::MatrixXd& h);

// Single-head scaled dot-product attention with the center row as the query;
// returns a row of width d_out.
Eigen::RowVectorXd attention_pool(const Eigen::MatrixXd& h, std::size_t center,
                                  const EncoderParams& params);

// Intermediate values kept for the backward pass.
struct EncoderTape {
  std::vector<Eigen::MatrixXd> inputs;       // H_{l-1} per layer
  std::vector<Eigen::MatrixXd> aggregated;   // A * H_{l-1}
  std::vector<Eigen::MatrixXd> preact;       // pre-activation P_l
  Eigen::MatrixXd centered;                  // C
  Eigen::MatrixXd keys, values;              // C * W_K, C * W_V
  Eigen::RowVectorXd query;                  // C_center * W_Q
  Eigen::VectorXd weights;                   // softmax over rows
  Eigen::RowVectorXd pooled;                 // attention output, width d_out
};

EdgeEmbedding encode(const TemporalEgoGraph& ego, const EncoderParams& params,
                     EncoderTape* tape = nullptr);

// Accumulates dLoss/dParams into `grad` given dLoss/dz for one ego-graph.
void backpropagate(const TemporalEgoGraph& ego, const EncoderParams& params,
                   const EncoderTape& tape, const Eigen::VectorXd& grad_z, EncoderParams& grad);

}  // namespace dgad
