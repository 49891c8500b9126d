#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "dgad/error.hpp"
#include "dgad/model.hpp"
#include "fixtures.hpp"

using namespace dgad;

namespace {

struct Batch {
  std::vector<TemporalEgoGraph> egos;
  std::vector<Example> examples;
};

Batch random_batch(gen::Rng& rng, std::size_t n, std::size_t width) {
  Batch b;
  for (std::size_t i = 0; i < n; ++i) b.egos.push_back(fixture::random_ego(rng, 2 + gen::index(rng, 5), width));
  for (std::size_t i = 0; i < n; ++i) {
    b.examples.push_back({&b.egos[i], i % 3 == 0 ? Label::kAbnormal : Label::kNormal});
  }
  return b;
}

double loss_at(const Eigen::VectorXd& flat, Model m, const Batch& b, const LossWeights& w) {
  unpack_parameters(flat, m);
  return evaluate_loss(b.examples, m, w).total;
}

}  // namespace

TEST_CASE("analytic gradient matches central differences") {
  gen::Rng rng(31);
  const EncoderConfig cfg = fixture::small_config();
  for (const auto reduction : {AlignmentReduction::kMean, AlignmentReduction::kSum}) {
    const Model model = fixture::random_model(rng, cfg);
    const Batch batch = random_batch(rng, 6, cfg.input_dim);
    const LossWeights weights{0.9, 0.1, reduction};
    const Eigen::VectorXd grad = pack_gradients(parameter_gradients(batch.examples, model, weights));
    const Eigen::VectorXd flat = pack_parameters(model);
    const double h = 1e-5;
    std::size_t checked = 0;
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      Eigen::VectorXd up = flat, down = flat;
      up(i) += h;
      down(i) -= h;
      const double numeric = (loss_at(up, model, batch, weights) - loss_at(down, model, batch, weights)) / (2 * h);
      const double scale = std::max(std::abs(numeric), std::abs(grad(i)));
      if (scale < 1e-6) continue;
      CHECK(std::abs(numeric - grad(i)) / scale < 1e-4);
      ++checked;
    }
    CHECK(checked >= 20);
  }
}

TEST_CASE("gradients vanish for a constant loss") {
  gen::Rng rng(32);
  const EncoderConfig cfg = fixture::small_config();
  const Model model = fixture::random_model(rng, cfg);
  const Batch batch = random_batch(rng, 4, cfg.input_dim);
  const GradientSet g = parameter_gradients(batch.examples, model, {0.0, 0.0, AlignmentReduction::kMean});
  CHECK(pack_gradients(g).isZero());
}

TEST_CASE("alignment gradient vanishes at the prototype") {
  gen::Rng rng(33);
  const EncoderConfig cfg = fixture::small_config();
  Model model = fixture::random_model(rng, cfg);
  const auto ego = fixture::random_ego(rng, 4, cfg.input_dim);
  model.prototypes.normal = encode(ego, model.encoder).values;
  const std::vector<Example> batch{{&ego, Label::kNormal}};
  const GradientSet g = parameter_gradients(batch, model, {0.0, 1.0, AlignmentReduction::kSum});
  CHECK(g.normal.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(g.loss.alignment < 1e-20);
}

TEST_CASE("gradients do not depend on the worker count") {
  gen::Rng rng(34);
  const EncoderConfig cfg = fixture::small_config();
  const Model model = fixture::random_model(rng, cfg);
  const Batch batch = random_batch(rng, 37, cfg.input_dim);
  const LossWeights w;
  const Eigen::VectorXd one = pack_gradients(parameter_gradients(batch.examples, model, w, 1));
  const Eigen::VectorXd four = pack_gradients(parameter_gradients(batch.examples, model, w, 4));
  CHECK(one == four);
  const auto e1 = embed_all(batch.egos, model.encoder, 1);
  const auto e3 = embed_all(batch.egos, model.encoder, 3);
  for (std::size_t i = 0; i < e1.size(); ++i) CHECK(e1[i].values == e3[i].values);
}

TEST_CASE("loss requires resolved labels") {
  gen::Rng rng(35);
  const EncoderConfig cfg = fixture::small_config();
  const Model model = fixture::random_model(rng, cfg);
  const auto ego = fixture::random_ego(rng, 3, cfg.input_dim);
  const std::vector<Example> batch{{&ego, Label::kUnknown}};
  CHECK_THROWS_AS(evaluate_loss(batch, model, {}), ArgumentError);
  CHECK_THROWS_AS(evaluate_loss({}, model, {}), ArgumentError);
}

TEST_CASE("pack and unpack are inverse") {
  gen::Rng rng(36);
  Model model = fixture::random_model(rng, fixture::small_config());
  const Eigen::VectorXd flat = pack_parameters(model);
  Eigen::VectorXd changed = flat;
  changed.array() += 1.0;
  unpack_parameters(changed, model);
  CHECK(pack_parameters(model) == changed);
  const auto ranges = trainable_ranges(model, {false, true, false});
  REQUIRE(ranges.size() == 1);
  CHECK(ranges[0].end - ranges[0].begin == 6);
}

TEST_CASE("adam leaves inactive coordinates alone and can reset a slice") {
  Adam adam(4, AdamOptions{0.1});
  Eigen::VectorXd p = Eigen::VectorXd::Zero(4);
  const Eigen::VectorXd g = Eigen::VectorXd::Ones(4);
  const std::vector<ParamRange> active{{0, 2}};
  adam.step(p, g, active);
  CHECK(p(0) == oracle::approx(-0.1));
  CHECK(p(2) == 0.0);
  adam.reset({0, 1});
  adam.step(p, -g, active);
  // A reset coordinate restarts bias correction: the first step has size lr.
  CHECK(p(0) == oracle::approx(0.0));
}
