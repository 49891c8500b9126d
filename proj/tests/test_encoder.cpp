#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "dgad/encoder.hpp"
#include "dgad/error.hpp"
#include "dgad/model.hpp"
#include "fixtures.hpp"

using namespace dgad;

namespace {

EncoderParams square_params(std::size_t d, Activation act) {
  EncoderConfig c;
  c.input_dim = d;
  c.layer_dims = {d};
  c.attention_dim = d;
  c.prototype_dim = d;
  c.activation = act;
  return EncoderParams(c);
}

}  // namespace

TEST_CASE("parameter layout") {
  const EncoderParams p(fixture::small_config());
  REQUIRE(p.blocks().size() == 8);
  CHECK(p.blocks()[0].name == "gnn0.w1");
  CHECK(p.blocks().back().name == "proj.wp");
  std::size_t total = 0;
  for (const auto& b : p.blocks()) {
    CHECK(b.offset == total);
    total += b.size();
  }
  CHECK(total == p.size());
  CHECK(p.w1(1).rows() == 5);
  CHECK(p.w1(1).cols() == 4);
  CHECK(p.wp().rows() == 3);
}

TEST_CASE("identity layer configuration returns its input") {
  EncoderParams p = square_params(3, Activation::kIdentity);
  p.w2(0) = Eigen::MatrixXd::Identity(3, 3);
  gen::Rng rng(1);
  const Eigen::MatrixXd h = gen::matrix(rng, 4, 3);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
  CHECK(gnn_forward(h, a, 0, p).isApprox(h));
}

TEST_CASE("single-edge ego drops the neighbour term") {
  EncoderParams p = square_params(2, Activation::kRelu);
  gen::Rng rng(2);
  p.values() = gen::vector(rng, p.size());
  const Eigen::MatrixXd h = gen::matrix(rng, 1, 2);
  const Eigen::MatrixXd expected = (h * p.w2(0)).cwiseMax(0.0);
  CHECK(gnn_forward(h, Eigen::MatrixXd::Zero(1, 1), 0, p).isApprox(expected));
}

TEST_CASE("two-edge hand-weighted layer") {
  EncoderParams p = square_params(2, Activation::kRelu);
  p.w1(0) << 1.0, 0.0, 0.5, -1.0;
  p.w2(0) << 0.0, 1.0, 2.0, 0.0;
  Eigen::MatrixXd h(2, 2), a(2, 2), expected(2, 2);
  h << 1, 2, 3, -1;
  a << 0, 1, 1, 0;
  expected << 6.5, 2.0, 0.0, 1.0;
  CHECK(gnn_forward(h, a, 0, p).isApprox(expected));
  CHECK_THROWS_AS(gnn_forward(h, Eigen::MatrixXd::Zero(3, 3), 0, p), ShapeError);
}

TEST_CASE("residual centering") {
  CHECK(residual_center(Eigen::MatrixXd::Constant(3, 2, 4.0)).isZero());
  Eigen::MatrixXd h(2, 2), expected(2, 2);
  h << 1, 0, 3, 0;
  expected << -1, 0, 1, 0;
  CHECK(residual_center(h).isApprox(expected));
  gen::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd c = residual_center(gen::matrix(rng, 5, 4, 10.0));
    CHECK(c.colwise().sum().cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("attention pooling") {
  EncoderParams p = square_params(2, Activation::kRelu);
  gen::Rng rng(4);
  p.values() = gen::vector(rng, p.size());

  SUBCASE("single row takes the full weight") {
    const Eigen::MatrixXd h = gen::matrix(rng, 1, 2);
    CHECK(attention_pool(h, 0, p).isApprox(h * p.wv()));
  }
  SUBCASE("equal key scores average the values") {
    p.wk().setZero();
    const Eigen::MatrixXd h = gen::matrix(rng, 2, 2);
    const Eigen::MatrixXd v = h * p.wv();
    CHECK(attention_pool(h, 0, p).isApprox(v.colwise().mean()));
  }
  SUBCASE("three-row hand case") {
    p.wq() << 1.0, 0.5, 0.0, 1.0;
    p.wk() << 0.5, 0.0, 1.0, -1.0;
    p.wv() << 2.0, 0.0, 0.0, 1.0;
    Eigen::MatrixXd h(3, 2);
    h << 1, 0, 0, 2, -1, 1;
    // Softmax weights (0.31987, 0.45553, 0.22461) from an independent script.
    Eigen::RowVectorXd expected(2);
    expected << 0.1905196444631999, 1.1356613246323985;
    CHECK((attention_pool(h, 0, p) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("zero parameters give a zero embedding") {
  gen::Rng rng(5);
  const auto ego = fixture::random_ego(rng, 4, 6);
  const EncoderParams p(fixture::small_config());
  CHECK(encode(ego, p).values.isZero());
}

TEST_CASE("embedding ignores the order of non-center rows") {
  gen::Rng rng(6);
  const EncoderParams p = EncoderParams::initialize(fixture::small_config(), 9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + gen::index(rng, 6);
    const auto ego = fixture::random_ego(rng, n, 6);
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin() + 1, perm.end(), rng);
    TemporalEgoGraph shuffled = ego;
    for (std::size_t i = 0; i < n; ++i) {
      shuffled.h0.row(static_cast<Eigen::Index>(i)) = ego.h0.row(perm[i]);
      for (std::size_t j = 0; j < n; ++j) {
        shuffled.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            ego.adjacency(perm[i], perm[j]);
      }
    }
    CHECK((encode(ego, p).values - encode(shuffled, p).values).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("isomorphic egos embed identically") {
  Edge a{1, 2, 1.0, {0.5, -0.5}, Label::kUnknown};
  Edge b{2, 3, 2.0, {1.0, 0.0}, Label::kUnknown};
  Edge c{10, 20, 1.0, {0.5, -0.5}, Label::kUnknown};
  Edge d{20, 30, 2.0, {1.0, 0.0}, Label::kUnknown};
  const EgoOptions opt{1, 8, 4};
  const auto e1 = EgoExtractor(DynamicGraph({a, b})).sample(1, opt);
  const auto e2 = EgoExtractor(DynamicGraph({c, d})).sample(1, opt);
  const EncoderParams p = EncoderParams::initialize(fixture::small_config(6), 3);
  CHECK(encode(e1, p).values == encode(e2, p).values);
}

TEST_CASE("encode rejects mismatched widths") {
  gen::Rng rng(7);
  const auto ego = fixture::random_ego(rng, 3, 5);
  const EncoderParams p = EncoderParams::initialize(fixture::small_config(6), 1);
  CHECK_THROWS_AS(encode(ego, p), ShapeError);
}

TEST_CASE("initialisation bounds follow fan-in") {
  const EncoderParams p = EncoderParams::initialize(fixture::small_config(), 42);
  for (const auto& b : p.blocks()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(b.rows));
    const auto seg = p.values().segment(static_cast<Eigen::Index>(b.offset),
                                        static_cast<Eigen::Index>(b.size()));
    CHECK(seg.cwiseAbs().maxCoeff() <= bound);
  }
  CHECK(EncoderParams::initialize(fixture::small_config(), 42).values() == p.values());
}
