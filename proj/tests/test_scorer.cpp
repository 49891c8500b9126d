#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "dgad/error.hpp"
#include "dgad/scorer.hpp"
#include "generators.hpp"

using namespace dgad;

namespace {

PrototypeBuffer buffer_of(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs) {
  PrototypeBuffer b(pairs.size() + 1);
  for (const auto& [n, a] : pairs) {
    PrototypePair p;
    p.normal = n;
    p.abnormal = a;
    p.difference = difference_score(p);
    b.insert(p, ScoreKind::kDifference);
  }
  return b;
}

Eigen::VectorXd scalar(double x) { return Eigen::VectorXd::Constant(1, x); }

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("mean update") {
  const PrototypeBuffer b = buffer_of({{scalar(1.0), scalar(2.0)}});
  DistributionStats s = DistributionStats::zeros(1, 1.0);
  CHECK(update_means(s, b).mu_normal(0) == 0.0);
  s = DistributionStats::zeros(1, 0.9);
  CHECK(update_means(s, b).mu_normal(0) == oracle::approx(0.1));
  CHECK(update_means(s, b).mu_abnormal(0) == oracle::approx(0.2));
}

TEST_CASE("repeated mean updates converge geometrically to the buffer mean") {
  const PrototypeBuffer b = buffer_of({{scalar(1.0), scalar(0.0)}, {scalar(3.0), scalar(4.0)}});
  DistributionStats s = DistributionStats::zeros(1, 0.7);
  for (int k = 1; k <= 40; ++k) {
    s = update_means(s, b);
    CHECK(s.mu_normal(0) == oracle::approx(2.0 * (1.0 - std::pow(0.7, k))));
  }
  CHECK(s.mu_abnormal(0) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("sum aggregation adds the buffered prototypes") {
  const PrototypeBuffer b = buffer_of({{scalar(1.0), scalar(0.0)}, {scalar(3.0), scalar(4.0)}});
  DistributionStats s = DistributionStats::zeros(1, 0.0);
  s.aggregation = AggregationMode::kSum;
  CHECK(update_means(s, b).mu_normal(0) == oracle::approx(4.0));
}

TEST_CASE("covariance update") {
  SUBCASE("single pair uses divisor one") {
    const PrototypeBuffer b = buffer_of({{vec2(1, 2), vec2(0, 0)}});
    DistributionStats s = DistributionStats::zeros(2, 0.0);
    const auto out = update_covariances(s, b);
    const Eigen::Vector2d c(1, 2);
    CHECK(out.sigma_normal.isApprox(c * c.transpose()));
  }
  SUBCASE("prototypes at the mean add nothing") {
    const PrototypeBuffer b = buffer_of({{vec2(1, 1), vec2(2, 2)}, {vec2(1, 1), vec2(2, 2)}});
    DistributionStats s = DistributionStats::zeros(2, 0.5);
    s.mu_normal = vec2(1, 1);
    s.mu_abnormal = vec2(2, 2);
    const auto out = update_covariances(s, b);
    CHECK(out.sigma_normal.isZero());
    CHECK(out.sigma_abnormal.isZero());
  }
  SUBCASE("three pairs match the textbook sample covariance") {
    const PrototypeBuffer b =
        buffer_of({{vec2(1, 2), vec2(0, 0)}, {vec2(3, -1), vec2(0, 0)}, {vec2(0.5, 0.5), vec2(0, 0)}});
    DistributionStats s = DistributionStats::zeros(2, 0.0);
    const auto out = update_statistics(s, b);
    Eigen::Matrix2d expected;
    expected << 1.75, -1.5, -1.5, 2.25;
    CHECK((out.sigma_normal - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("empty buffer leaves statistics unchanged") {
  DistributionStats s = DistributionStats::zeros(2);
  s.mu_normal = vec2(1, 2);
  const auto out = update_statistics(s, PrototypeBuffer(3));
  CHECK(out.mu_normal == s.mu_normal);
}

TEST_CASE("anomaly score") {
  DistributionStats s = DistributionStats::zeros(2);
  s.mu_normal = vec2(1, 1);
  s.mu_abnormal = vec2(1, 1);
  s.sigma_normal = Eigen::Matrix2d::Identity();
  s.sigma_abnormal = Eigen::Matrix2d::Identity();
  auto out = score_edge(vec2(0.3, -2), s);
  CHECK(out.score == oracle::approx(0.0));
  CHECK(out.probability == oracle::approx(0.5));

  s = DistributionStats::zeros(2);
  s.mu_abnormal = vec2(1, 2);
  s.mu_normal = -s.mu_abnormal;
  out = score_edge(s.mu_abnormal, s);
  CHECK(out.score == oracle::approx(2.0 * 5.0));
  CHECK(out.probability > 0.5);
}

TEST_CASE("anomaly score matches a naive quadratic form") {
  gen::Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + gen::index(rng, 5);
    DistributionStats s = DistributionStats::zeros(d);
    s.mu_normal = gen::vector(rng, d);
    s.mu_abnormal = gen::vector(rng, d);
    s.sigma_normal = gen::matrix(rng, d, d);
    s.sigma_abnormal = gen::matrix(rng, d, d);
    s.lambda_normal = gen::uniform(rng, 0.0, 1.0);
    s.lambda_abnormal = gen::uniform(rng, 0.0, 1.0);
    const Eigen::VectorXd z = gen::vector(rng, d);
    double sn = 0.0, sa = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      sn += z(ii) * s.mu_normal(ii);
      sa += z(ii) * s.mu_abnormal(ii);
      for (std::size_t j = 0; j < d; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        sn -= s.lambda_normal * z(ii) * s.sigma_normal(ii, jj) * z(jj);
        sa -= s.lambda_abnormal * z(ii) * s.sigma_abnormal(ii, jj) * z(jj);
      }
    }
    const auto out = score_edge(z, s);
    CHECK(out.score == doctest::Approx(sa - sn).epsilon(1e-9));
    CHECK(out.probability == doctest::Approx(1.0 / (1.0 + std::exp(-(sa - sn)))).epsilon(1e-9));
  }
}

TEST_CASE("non-finite statistics are reported") {
  DistributionStats s = DistributionStats::zeros(1);
  s.mu_abnormal(0) = std::nan("");
  CHECK_THROWS_AS(score_edge(scalar(1.0), s), NumericalError);
  CHECK_THROWS_AS(score_edge(vec2(1, 1), DistributionStats::zeros(1)), ShapeError);
}

TEST_CASE("binary cross-entropy") {
  const std::vector<double> exact{1.0, 0.0};
  const std::vector<Label> exact_labels{Label::kAbnormal, Label::kNormal};
  CHECK(bce_loss(exact, exact_labels) < 2e-7);

  const std::vector<double> coin(4, 0.5);
  const std::vector<Label> mixed{Label::kAbnormal, Label::kNormal, Label::kNormal, Label::kAbnormal};
  CHECK(bce_loss(coin, mixed) == oracle::approx(std::log(2.0)));

  const std::vector<double> p{0.9, 0.2, 0.6, 0.05};
  const std::vector<Label> y{Label::kAbnormal, Label::kNormal, Label::kNormal, Label::kAbnormal};
  CHECK(bce_loss(p, y) == doctest::Approx(1.0601317681000455).epsilon(1e-12));

  const std::vector<Label> unknown{Label::kUnknown};
  CHECK_THROWS_AS(bce_loss(std::vector<double>{0.5}, unknown), ArgumentError);
}

TEST_CASE("combined objective") {
  CHECK(total_loss(1.0, 2.0, 0.9, 0.1) == oracle::approx(1.1));
  CHECK(total_loss(0.7, 5.0, 0.9, 0.0) == oracle::approx(0.63));
  CHECK(total_loss(0.0, 0.0, 0.9, 0.1) == 0.0);
}
