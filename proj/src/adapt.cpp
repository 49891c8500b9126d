#include "dgad/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dgad/error.hpp"
#include "dgad/log.hpp"
#include "dgad/random.hpp"

namespace dgad {

double detection_entropy(double p, double eps) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("probability must lie in [0, 1]");
  if (!(eps > 0.0)) throw ArgumentError("entropy stabiliser must be positive");
  return -p * std::log(p + eps) - (1.0 - p) * std::log(1.0 - p + eps);
}

std::string to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::kEntropy: return "entropy";
    case SelectionStrategy::kRandom: return "random";
    case SelectionStrategy::kThreshold: return "threshold";
    case SelectionStrategy::kDistance: return "distance";
    case SelectionStrategy::kSimilarity: return "similarity";
  }
  return "entropy";
}

SelectionStrategy parse_strategy(const std::string& name) {
  for (auto s : {SelectionStrategy::kEntropy, SelectionStrategy::kRandom,
                 SelectionStrategy::kThreshold, SelectionStrategy::kDistance,
                 SelectionStrategy::kSimilarity}) {
    if (to_string(s) == name) return s;
  }
  throw ArgumentError("unknown selection strategy '" + name + "'");
}

std::string to_string(AdaptMode m) {
  return m == AdaptMode::kPrototypesOnly ? "prototypes" : "full";
}

AdaptMode parse_adapt_mode(const std::string& name) {
  if (name == "prototypes") return AdaptMode::kPrototypesOnly;
  if (name == "full") return AdaptMode::kPrototypesAndEncoder;
  throw ArgumentError("unknown adaptation mode '" + name + "'");
}

namespace {

ConfidentDetection make_confident(const Detection& d) {
  return {d.position, d.probability, detection_entropy(d.probability), pseudo_label(d.probability)};
}

// Per predicted class, keep the `per_class` detections with the smallest key
// (ties by input order). `eligible` filters candidates before ranking.
template <typename Key, typename Eligible>
std::vector<ConfidentDetection> select_lowest(std::span<const Detection> detections,
                                              std::size_t per_class, Key key,
                                              Eligible eligible) {
  if (detections.empty()) throw ArgumentError("no detections to select from");
  std::vector<ConfidentDetection> out;
  for (Label cls : {Label::kNormal, Label::kAbnormal}) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < detections.size(); ++i) {
      if (pseudo_label(detections[i].probability) != cls) continue;
      if (!eligible(detections[i])) continue;
      ranked.emplace_back(key(detections[i], i), i);
    }
    if (ranked.size() < per_class) {
      log::warn(std::string("only ") + std::to_string(ranked.size()) + " candidate " +
                (cls == Label::kNormal ? "normal" : "abnormal") + " detections for " +
                std::to_string(per_class) + " pseudo-label slots");
    }
    const std::size_t take = std::min(per_class, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<long>(take), ranked.end());
    for (std::size_t k = 0; k < take; ++k) out.push_back(make_confident(detections[ranked[k].second]));
  }
  return out;
}

}  // namespace

std::vector<ConfidentDetection> select_confident(std::span<const Detection> detections,
                                                 std::size_t per_class) {
  return select_lowest(
      detections, per_class,
      [](const Detection& d, std::size_t) { return detection_entropy(d.probability); },
      [](const Detection&) { return true; });
}

bool entropy_selection_holds(std::span<const Detection> detections,
                             std::span<const ConfidentDetection> selected) {
  std::vector<bool> chosen(detections.size(), false);
  for (const auto& c : selected) chosen.at(c.position) = true;
  for (Label cls : {Label::kNormal, Label::kAbnormal}) {
    double max_selected = -1.0;
    double min_rejected = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < detections.size(); ++i) {
      if (pseudo_label(detections[i].probability) != cls) continue;
      const double h = detection_entropy(detections[i].probability);
      if (chosen[i]) max_selected = std::max(max_selected, h);
      else min_rejected = std::min(min_rejected, h);
    }
    if (max_selected > min_rejected) return false;
  }
  return true;
}

std::vector<ConfidentDetection> select_by_strategy(std::span<const Detection> detections,
                                                   std::size_t per_class,
                                                   SelectionStrategy strategy,
                                                   const SelectionContext& context) {
  const auto any = [](const Detection&) { return true; };
  switch (strategy) {
    case SelectionStrategy::kEntropy:
      return select_confident(detections, per_class);
    case SelectionStrategy::kRandom:
    case SelectionStrategy::kThreshold: {
      std::mt19937_64 rng(context.seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> keys(detections.size());
      for (double& k : keys) k = u(rng);
      const auto key = [&](const Detection&, std::size_t i) { return keys[i]; };
      if (strategy == SelectionStrategy::kRandom) return select_lowest(detections, per_class, key, any);
      return select_lowest(detections, per_class, key, [](const Detection& d) {
        return d.probability > 0.7 || d.probability < 0.3;
      });
    }
    case SelectionStrategy::kDistance: {
      if (context.stats == nullptr) throw ArgumentError("distance selection needs class statistics");
      const DistributionStats& st = *context.stats;
      return select_lowest(
          detections, per_class,
          [&](const Detection& d, std::size_t) {
            const auto& other = pseudo_label(d.probability) == Label::kAbnormal ? st.mu_normal
                                                                                : st.mu_abnormal;
            return -(d.embedding - other).norm();
          },
          any);
    }
    case SelectionStrategy::kSimilarity: {
      if (detections.empty()) throw ArgumentError("no detections to select from");
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(detections.front().embedding.size());
      for (const auto& d : detections) centroid += d.embedding;
      centroid /= static_cast<double>(detections.size());
      return select_lowest(
          detections, per_class,
          [&](const Detection& d, std::size_t) { return (d.embedding - centroid).norm(); }, any);
    }
  }
  return {};
}

std::vector<Eigen::VectorXd> subsample_embeddings(const std::vector<EdgeEmbedding>& embeddings,
                                                  std::size_t limit, std::uint64_t seed) {
  std::vector<std::size_t> idx(embeddings.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (idx.size() > limit) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < limit; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(limit);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(embeddings[i].values);
  return out;
}

namespace {

double confident_alignment(const std::vector<Example>& examples, const Model& model) {
  std::vector<Label> labels;
  std::vector<Eigen::VectorXd> z;
  z.reserve(examples.size());
  for (const auto& ex : examples) {
    z.push_back(encode(*ex.ego, model.encoder).values);
    labels.push_back(ex.label);
  }
  return alignment_loss(z, labels, model.prototypes);
}

}  // namespace

AdaptResult adapt_target(const Model& model, const PrototypeBuffer& buffer,
                         const UnlabeledGraph& target, const AdaptOptions& options) {
  AdaptResult result{model, buffer, {}, {}, {}, false};
  if (options.per_class == 0) return result;
  const DynamicGraph& g = target.graph();
  if (g.empty()) {
    log::warn("adaptation skipped: target stream is empty");
    return result;
  }

  const std::vector<TemporalEgoGraph> egos = sample_egos(g, 0, g.size(), model.ego);
  const std::vector<EdgeEmbedding> embeddings = embed_all(egos, model.encoder, options.workers);
  const std::vector<AnomalyScore> scores = score_all(embeddings, model.stats);
  result.detections.reserve(egos.size());
  for (std::size_t i = 0; i < egos.size(); ++i) {
    result.detections.push_back({i, scores[i].probability, embeddings[i].values});
  }

  const SelectionContext context{&model.stats, derive_seed(options.seed, "adapt.select")};
  result.confident =
      select_by_strategy(result.detections, options.per_class, options.strategy, context);
  if (result.confident.empty()) {
    log::warn("adaptation skipped: no confident detections");
    return result;
  }
  const bool has_normal = std::any_of(result.confident.begin(), result.confident.end(),
                                      [](const auto& c) { return c.pseudo_label == Label::kNormal; });
  const bool has_abnormal = std::any_of(result.confident.begin(), result.confident.end(),
                                        [](const auto& c) { return c.pseudo_label == Label::kAbnormal; });
  if (!has_normal || !has_abnormal) {
    log::warn("confident set covers a single class; aligning that class only");
  }

  std::vector<Example> examples;
  examples.reserve(result.confident.size());
  for (const auto& c : result.confident) examples.push_back({&egos[c.position], c.pseudo_label});

  Model& m = result.model;
  PrototypeBuffer& buf = result.buffer;
  const auto conf_embeddings = [&](const Model& current) {
    std::vector<EdgeEmbedding> z;
    z.reserve(examples.size());
    for (const auto& ex : examples) z.push_back(encode(*ex.ego, current.encoder));
    return subsample_embeddings(z, options.similarity_sample,
                                derive_seed(options.seed, "adapt.similarity"));
  };

  if (!buf.empty()) {
    buf.rescore(conf_embeddings(m), options.lambda_d, options.lambda_e);
    const PrototypePair best = *buf.best(ScoreKind::kRetention);
    m.prototypes.normal = best.normal;
    m.prototypes.abnormal = best.abnormal;
  }

  const LossWeights weights{0.0, 1.0, options.reduction};
  TrainableMask mask;
  mask.encoder = options.mode == AdaptMode::kPrototypesAndEncoder;
  mask.lambdas = false;
  const auto ranges = trainable_ranges(m, mask);
  Eigen::VectorXd flat = pack_parameters(m);
  Adam adam(static_cast<std::size_t>(flat.size()), options.optimizer);
  std::mt19937_64 shuffle_rng(derive_seed(options.seed, "adapt.shuffle"));
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    result.alignment_curve.push_back(confident_alignment(examples, m));
    std::vector<Example> order = examples;
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      std::span<const Example> slice(order.data() + start, stop - start);
      const GradientSet grad = parameter_gradients(slice, m, weights, options.workers);
      adam.step(flat, pack_gradients(grad), ranges);
      unpack_parameters(flat, m);
    }

    const auto sample = conf_embeddings(m);
    if (!buf.empty()) buf.rescore(sample, options.lambda_d, options.lambda_e);
    PrototypePair pair = m.prototypes;
    pair.origin = options.origin;
    pair.difference = difference_score(pair, buf.difference_mode());
    pair.similarity = similarity_score(pair, sample);
    pair.retention =
        retention_score(pair.difference, *pair.similarity, options.lambda_d, options.lambda_e);
    buf.insert(pair, ScoreKind::kRetention);
    m.stats = update_statistics(m.stats, buf);
    m.prototypes.difference = pair.difference;
    m.prototypes.similarity = pair.similarity;
    m.prototypes.retention = pair.retention;
  }
  result.alignment_curve.push_back(confident_alignment(examples, m));
  result.adapted = options.epochs > 0;
  return result;
}

}  // namespace dgad
