#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "dgad/adapt.hpp"
#include "dgad/error.hpp"
#include "fixtures.hpp"

using namespace dgad;

namespace {

std::vector<Detection> detections_from(const std::vector<double>& probs) {
  std::vector<Detection> out;
  for (std::size_t i = 0; i < probs.size(); ++i) out.push_back({i, probs[i], Eigen::VectorXd::Zero(2)});
  return out;
}

}  // namespace

TEST_CASE("detection entropy") {
  CHECK(detection_entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(detection_entropy(1.0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(detection_entropy(0.9) == doctest::Approx(0.3251).epsilon(1e-4));
  CHECK_THROWS_AS(detection_entropy(1.5), ArgumentError);
}

TEST_CASE("identical detections pick the first per class") {
  const auto d = detections_from(std::vector<double>(6, 0.2));
  const auto chosen = select_confident(d, 2);
  REQUIRE(chosen.size() == 2);
  CHECK(chosen[0].position == 0);
  CHECK(chosen[1].position == 1);
}

TEST_CASE("lowest entropies win within a class") {
  // p chosen so that entropies are about 0.1, 0.2 and 0.6.
  const auto d = detections_from({0.0207, 0.0497, 0.3234});
  const auto chosen = select_confident(d, 2);
  REQUIRE(chosen.size() == 2);
  CHECK(chosen[0].position == 0);
  CHECK(chosen[1].position == 1);
  CHECK(chosen[0].entropy < chosen[1].entropy);
}

TEST_CASE("selection equals a full sort per class") {
  gen::Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> probs(40);
    for (double& p : probs) p = gen::uniform(rng, 0.0, 1.0);
    const auto d = detections_from(probs);
    const std::size_t k = 1 + gen::index(rng, 10);
    const auto chosen = select_confident(d, k);
    for (Label cls : {Label::kNormal, Label::kAbnormal}) {
      std::vector<std::pair<double, std::size_t>> ranked;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (pseudo_label(probs[i]) == cls) ranked.emplace_back(detection_entropy(probs[i]), i);
      }
      std::sort(ranked.begin(), ranked.end());
      ranked.resize(std::min(k, ranked.size()));
      std::vector<std::size_t> expected, got;
      for (const auto& r : ranked) expected.push_back(r.second);
      for (const auto& c : chosen) {
        if (c.pseudo_label == cls) got.push_back(c.position);
      }
      CHECK(got == expected);
    }
    CHECK(entropy_selection_holds(d, chosen));
  }
}

TEST_CASE("alternative strategies respect their rules") {
  gen::Rng rng(62);
  std::vector<double> probs(50);
  for (double& p : probs) p = gen::uniform(rng, 0.0, 1.0);
  auto d = detections_from(probs);
  for (auto& det : d) det.embedding = gen::vector(rng, 2);
  DistributionStats stats = DistributionStats::zeros(2);
  const SelectionContext ctx{&stats, 5};

  const auto thr = select_by_strategy(d, 5, SelectionStrategy::kThreshold, ctx);
  for (const auto& c : thr) CHECK((c.probability > 0.7 || c.probability < 0.3));

  const auto rnd = select_by_strategy(d, 5, SelectionStrategy::kRandom, ctx);
  CHECK(rnd.size() == 10);
  CHECK(select_by_strategy(d, 5, SelectionStrategy::kRandom, ctx).front().position == rnd.front().position);

  CHECK(select_by_strategy(d, 5, SelectionStrategy::kDistance, ctx).size() == 10);
  CHECK(select_by_strategy(d, 5, SelectionStrategy::kSimilarity, ctx).size() == 10);
  CHECK_THROWS_AS(select_by_strategy(d, 5, SelectionStrategy::kDistance, {}), ArgumentError);
  CHECK(parse_strategy("entropy") == SelectionStrategy::kEntropy);
  CHECK_THROWS_AS(parse_strategy("psychic"), ArgumentError);
}

TEST_CASE("disabled adaptation returns the model unchanged") {
  gen::Rng rng(63);
  const Model model = fixture::random_model(rng, fixture::small_config(8 + 4));
  Edge e{1, 2, 0.0, std::vector<double>(8, 0.5), Label::kNormal};
  const UnlabeledGraph target(DynamicGraph({e}));
  AdaptOptions opts;
  opts.per_class = 0;
  const AdaptResult r = adapt_target(model, PrototypeBuffer(4), target, opts);
  CHECK_FALSE(r.adapted);
  CHECK(pack_parameters(r.model) == pack_parameters(model));
  CHECK_FALSE(target.graph().any_labeled());
}
