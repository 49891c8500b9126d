#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "dgad/error.hpp"
#include "dgad/prototypes.hpp"
#include "generators.hpp"

using namespace dgad;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

PrototypePair pair_with(double difference, std::string origin = "") {
  PrototypePair p;
  p.normal = vec({0.0});
  p.abnormal = vec({difference});
  p.difference = difference;
  p.origin = std::move(origin);
  return p;
}

}  // namespace

TEST_CASE("alignment loss") {
  PrototypePair p;
  p.normal = vec({0, 0});
  p.abnormal = vec({1, 1});
  const std::vector<Eigen::VectorXd> at{vec({0, 0}), vec({1, 1})};
  const std::vector<Label> labels{Label::kNormal, Label::kAbnormal};
  CHECK(alignment_loss(at, labels, p) == 0.0);

  const std::vector<Eigen::VectorXd> far{vec({2, 0})};
  const std::vector<Label> normal{Label::kNormal};
  CHECK(alignment_loss(far, normal, p) == oracle::approx(4.0));

  const std::vector<Label> unknown{Label::kUnknown};
  CHECK_THROWS_AS(alignment_loss(far, unknown, p), ArgumentError);
}

TEST_CASE("alignment loss matches a naive loop") {
  gen::Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    PrototypePair p;
    p.normal = gen::vector(rng, 4);
    p.abnormal = gen::vector(rng, 4);
    std::vector<Eigen::VectorXd> z;
    std::vector<Label> y;
    double expected = 0.0;
    for (int i = 0; i < 5; ++i) {
      z.push_back(gen::vector(rng, 4));
      y.push_back(i % 2 ? Label::kAbnormal : Label::kNormal);
      const Eigen::VectorXd& target = i % 2 ? p.abnormal : p.normal;
      for (int k = 0; k < 4; ++k) expected += (z.back()(k) - target(k)) * (z.back()(k) - target(k));
    }
    CHECK(alignment_loss(z, y, p) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("difference score") {
  PrototypePair p;
  p.normal = vec({0, 0});
  p.abnormal = vec({0, 0});
  CHECK(difference_score(p) == 0.0);
  p.abnormal = vec({3, 4});
  CHECK(difference_score(p) == oracle::approx(3.5));
  CHECK(difference_score(p, DifferenceMode::kEuclidean) == oracle::approx(2.5));
  gen::Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    p.normal = gen::vector(rng, 5);
    p.abnormal = gen::vector(rng, 5);
    const double c = gen::uniform(rng, 0.0, 4.0);
    PrototypePair scaled = p;
    scaled.normal *= c;
    scaled.abnormal *= c;
    CHECK(difference_score(scaled) == oracle::approx(c * difference_score(p)));
  }
}

TEST_CASE("similarity and retention scores") {
  PrototypePair p;
  p.normal = vec({1, 1});
  p.abnormal = vec({1, 1});
  const std::vector<Eigen::VectorXd> same{vec({1, 1}), vec({1, 1})};
  CHECK(similarity_score(p, same) == 0.0);

  p.normal = vec({3, 4});
  p.abnormal = vec({0, 0});
  const std::vector<Eigen::VectorXd> origin{vec({0, 0})};
  CHECK(similarity_score(p, origin) == oracle::approx(5.0));
  const std::vector<Eigen::VectorXd> duplicated{vec({0, 0}), vec({0, 0})};
  CHECK(similarity_score(p, duplicated) == oracle::approx(5.0));
  CHECK_THROWS_AS(similarity_score(p, std::vector<Eigen::VectorXd>{}), ArgumentError);

  CHECK(retention_score(3.5, 5.0, 0.3, 0.7) == oracle::approx(-2.45));
  CHECK(retention_score(3.5, 0.0, 0.3, 0.7) == oracle::approx(0.3 * 3.5));
  CHECK(retention_score(1.0, 2.0, 0.3, 0.7) < retention_score(1.0, 1.0, 0.3, 0.7));
}

TEST_CASE("buffer insertion and eviction") {
  PrototypeBuffer empty(3);
  CHECK(empty.insert(pair_with(1.0), ScoreKind::kDifference) == InsertOutcome::kAppended);
  CHECK(empty.size() == 1);

  PrototypeBuffer b(3);
  b.insert(pair_with(1.0, "a"), ScoreKind::kDifference);
  b.insert(pair_with(2.0, "b"), ScoreKind::kDifference);
  b.insert(pair_with(3.0, "c"), ScoreKind::kDifference);
  CHECK(b.insert(pair_with(0.5, "x"), ScoreKind::kDifference) == InsertOutcome::kRejected);
  CHECK(b.size() == 3);
  CHECK(b.entries()[0].origin == "a");
  CHECK(b.insert(pair_with(2.5, "d"), ScoreKind::kDifference) == InsertOutcome::kReplaced);
  std::vector<double> scores;
  for (const auto& e : b.entries()) scores.push_back(e.difference);
  CHECK(scores == std::vector<double>{2.0, 3.0, 2.5});
  CHECK_THROWS_AS(PrototypeBuffer(0), ArgumentError);
}

TEST_CASE("buffer best") {
  PrototypeBuffer b(4);
  CHECK_FALSE(b.best(ScoreKind::kDifference).has_value());
  b.insert(pair_with(1.0, "only"), ScoreKind::kDifference);
  CHECK(b.best(ScoreKind::kDifference)->origin == "only");
  b.insert(pair_with(7.5, "max"), ScoreKind::kDifference);
  b.insert(pair_with(3.2), ScoreKind::kDifference);
  CHECK(b.best(ScoreKind::kDifference)->origin == "max");

  PrototypeBuffer tie(2);
  tie.insert(pair_with(2.0, "first"), ScoreKind::kDifference);
  tie.insert(pair_with(2.0, "second"), ScoreKind::kDifference);
  CHECK(tie.best(ScoreKind::kDifference)->origin == "first");
  CHECK_THROWS_AS(tie.best(ScoreKind::kRetention), ArgumentError);
}

TEST_CASE("rescoring") {
  PrototypeBuffer b(4);
  PrototypePair match;
  match.normal = vec({1, 1});
  match.abnormal = vec({1, 1});
  match.origin = "match";
  PrototypePair other;
  other.normal = vec({2, 2});
  other.abnormal = vec({2, 2});
  b.insert(match, ScoreKind::kDifference);
  b.insert(other, ScoreKind::kDifference);
  const std::vector<Eigen::VectorXd> z{vec({1, 1})};
  b.rescore(z, 0.3, 0.7);
  CHECK(*b.entries()[0].similarity == 0.0);
  CHECK(b.best(ScoreKind::kRetention)->origin == "match");
  const auto before = b.entries();
  b.rescore(z, 0.3, 0.7);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(*b.entries()[i].retention == *before[i].retention);
  }
}

TEST_CASE("rescored ranks match a full recomputation") {
  gen::Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    PrototypeBuffer b(6);
    for (int i = 0; i < 6; ++i) {
      PrototypePair p;
      p.normal = gen::vector(rng, 3);
      p.abnormal = gen::vector(rng, 3);
      p.difference = difference_score(p);
      b.insert(p, ScoreKind::kDifference);
    }
    std::vector<Eigen::VectorXd> z;
    for (int i = 0; i < 7; ++i) z.push_back(gen::vector(rng, 3));
    b.rescore(z, 0.3, 0.7);
    std::size_t expected_best = 0;
    double best_score = -1e300;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto& e = b.entries()[i];
      double sd = 0.0;
      for (int k = 0; k < 3; ++k) sd += std::abs(e.abnormal(k) - e.normal(k));
      sd /= 3.0;
      double se = 0.0;
      for (const auto& v : z) se += (v - e.normal).norm() + (v - e.abnormal).norm();
      se /= static_cast<double>(z.size());
      const double sr = 0.3 * sd - 0.7 * se;
      CHECK(*e.retention == doctest::Approx(sr).epsilon(1e-9));
      if (sr > best_score) {
        best_score = sr;
        expected_best = i;
      }
    }
    CHECK(*b.best_index(ScoreKind::kRetention) == expected_best);
  }
}

TEST_CASE("randomised buffer invariants") {
  gen::Rng rng(44);
  PrototypeBuffer b(5);
  for (int op = 0; op < 2000; ++op) {
    PrototypePair p = pair_with(gen::uniform(rng, 0.0, 10.0));
    const std::size_t before = b.size();
    const double min_before = b.empty() ? 0.0 : b.entries()[*b.worst_index(ScoreKind::kDifference)].difference;
    const auto outcome = b.insert(p, ScoreKind::kDifference);
    CHECK(b.size() <= b.capacity());
    if (before < b.capacity()) {
      CHECK(outcome == InsertOutcome::kAppended);
    } else if (p.difference > min_before) {
      CHECK(outcome == InsertOutcome::kReplaced);
    } else {
      CHECK(outcome == InsertOutcome::kRejected);
    }
    const double best = b.best(ScoreKind::kDifference)->difference;
    for (const auto& e : b.entries()) CHECK(e.difference <= best);
  }
}

TEST_CASE("capacity rule") {
  CHECK(buffer_capacity(1000, 0.10) == 100);
  CHECK(buffer_capacity(10, 0.10) == 4);
  CHECK(buffer_capacity(10'000'000, 0.10) == 4096);
}
