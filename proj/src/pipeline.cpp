#include "dgad/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dgad/error.hpp"
#include "dgad/log.hpp"
#include "dgad/random.hpp"

namespace dgad {

namespace {

void warn_sign_change(const char* name, double before, double after, const std::string& dataset,
                      std::size_t epoch) {
  if (std::signbit(before) == std::signbit(after)) return;
  std::ostringstream msg;
  msg << name << " changed sign during " << dataset << " epoch " << epoch << " (" << before
      << " -> " << after << ")";
  log::warn(msg.str());
}

PrototypePair random_prototypes(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 0.1);
  PrototypePair p;
  p.normal.resize(static_cast<Eigen::Index>(dim));
  p.abnormal.resize(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < p.normal.size(); ++i) p.normal(i) = gauss(rng);
  for (Eigen::Index i = 0; i < p.abnormal.size(); ++i) p.abnormal(i) = gauss(rng);
  return p;
}

std::size_t distinct_times(const DynamicGraph& g) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i == 0 || g.edge(i).time != g.edge(i - 1).time) ++n;
  }
  return n;
}

std::vector<Eigen::VectorXd> embedding_sample(const std::vector<TemporalEgoGraph>& egos,
                                              const EncoderParams& encoder,
                                              const ExperimentConfig& config, std::uint64_t seed) {
  std::vector<std::size_t> idx(egos.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (idx.size() > config.similarity_sample) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(config.similarity_sample);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<TemporalEgoGraph> chosen;
  chosen.reserve(idx.size());
  for (std::size_t i : idx) chosen.push_back(egos[i]);
  std::vector<Eigen::VectorXd> out;
  for (auto& z : embed_all(chosen, encoder, config.workers)) out.push_back(std::move(z.values));
  return out;
}

}  // namespace

PretrainResult pretrain(std::span<const NamedGraph> sources, const ExperimentConfig& config) {
  config.validate();
  if (sources.empty()) throw ConfigError("pretraining needs at least one source dataset");
  for (const auto& s : sources) {
    if (s.graph.empty()) throw ConfigError("source '" + s.name + "' is empty");
    if (!s.graph.fully_labeled()) {
      throw ConfigError("source '" + s.name + "' is not fully labeled");
    }
    if (s.graph.feature_dim() != sources.front().graph.feature_dim()) {
      throw ConfigError("source '" + s.name + "' has a different edge-feature width");
    }
  }

  const EncoderConfig ec = config.encoder_config(sources.front().graph.feature_dim());
  ec.validate();
  std::size_t total_edges = 0;
  for (const auto& s : sources) total_edges += s.graph.size();

  PretrainResult result;
  Checkpoint& ck = result.checkpoint;
  Model& m = ck.model;
  m.ego = config.ego;
  m.encoder = EncoderParams::initialize(ec, derive_seed(config.seed, "encoder.init"));
  m.stats = DistributionStats::zeros(ec.prototype_dim, config.momentum);
  m.stats.aggregation = config.aggregation;
  std::mt19937_64 proto_rng(derive_seed(config.seed, "prototypes.init"));
  m.prototypes = random_prototypes(ec.prototype_dim, proto_rng);
  ck.buffer = PrototypeBuffer(buffer_capacity(total_edges, config.buffer_fraction),
                              config.difference_mode);

  const LossWeights weights = config.loss_weights();
  Eigen::VectorXd flat = pack_parameters(m);
  Adam adam(static_cast<std::size_t>(flat.size()), AdamOptions{config.learning_rate});
  const auto ranges = trainable_ranges(m, TrainableMask{});
  const ParamRange proto_slots = prototype_range(m);
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, "pretrain.shuffle"));

  for (std::size_t si = 0; si < sources.size(); ++si) {
    const NamedGraph& source = sources[si];
    const DynamicGraph& g = source.graph;
    const bool first = si == 0;
    const ScoreKind kind = first ? ScoreKind::kDifference : ScoreKind::kRetention;
    const std::vector<TemporalEgoGraph> egos = sample_egos(g, 0, g.size(), m.ego);
    const auto intervals = split_intervals(g, std::min(config.intervals, distinct_times(g)));
    const auto sample_seed = derive_seed(config.seed, "pretrain.similarity", si);

    if (!first && !ck.buffer.empty()) {
      ck.buffer.rescore(embedding_sample(egos, m.encoder, config, sample_seed), config.lambda_d,
                        config.lambda_e);
    }

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      if (auto best = ck.buffer.best(kind)) {
        m.prototypes.normal = best->normal;
        m.prototypes.abnormal = best->abnormal;
      } else {
        const PrototypePair fresh = random_prototypes(ec.prototype_dim, proto_rng);
        m.prototypes.normal = fresh.normal;
        m.prototypes.abnormal = fresh.abnormal;
      }
      flat = pack_parameters(m);
      adam.reset(proto_slots);

      EpochLog entry{source.name, epoch, 0.0, 0.0, 0.0, 0};
      const double lambda_n_before = m.stats.lambda_normal;
      const double lambda_a_before = m.stats.lambda_abnormal;
      std::size_t seen = 0;
      for (const IntervalView& iv : intervals) {
        std::vector<Example> batch_pool;
        batch_pool.reserve(iv.size());
        for (std::size_t i = iv.begin; i < iv.end; ++i) batch_pool.push_back({&egos[i], g.edge(i).label});
        std::shuffle(batch_pool.begin(), batch_pool.end(), shuffle_rng);
        for (std::size_t start = 0; start < batch_pool.size(); start += config.batch_size) {
          const std::size_t stop = std::min(batch_pool.size(), start + config.batch_size);
          std::span<const Example> slice(batch_pool.data() + start, stop - start);
          const GradientSet grad = parameter_gradients(slice, m, weights, config.workers);
          const double n = static_cast<double>(slice.size());
          entry.loss += grad.loss.total * n;
          entry.bce += grad.loss.bce * n;
          entry.alignment += grad.loss.alignment * n;
          seen += slice.size();
          adam.step(flat, pack_gradients(grad), ranges);
          unpack_parameters(flat, m);
        }
      }
      warn_sign_change("lambda_n", lambda_n_before, m.stats.lambda_normal, source.name, epoch);
      warn_sign_change("lambda_a", lambda_a_before, m.stats.lambda_abnormal, source.name, epoch);
      if (seen > 0) {
        entry.loss /= static_cast<double>(seen);
        entry.bce /= static_cast<double>(seen);
        entry.alignment /= static_cast<double>(seen);
      }

      PrototypePair pair = m.prototypes;
      pair.origin = source.name;
      pair.difference = difference_score(pair, ck.buffer.difference_mode());
      pair.similarity.reset();
      pair.retention.reset();
      if (!first) {
        const auto sample = embedding_sample(egos, m.encoder, config, sample_seed);
        ck.buffer.rescore(sample, config.lambda_d, config.lambda_e);
        pair.similarity = similarity_score(pair, sample);
        pair.retention =
            retention_score(pair.difference, *pair.similarity, config.lambda_d, config.lambda_e);
      }
      ck.buffer.insert(pair, kind);
      m.prototypes = pair;
      m.stats = update_statistics(m.stats, ck.buffer);
      flat = pack_parameters(m);

      entry.buffer_size = ck.buffer.size();
      std::ostringstream msg;
      msg << "pretrain " << source.name << " epoch " << epoch << " loss " << entry.loss << " bce "
          << entry.bce << " align " << entry.alignment << " buffer " << entry.buffer_size;
      log::info(msg.str());
      result.log.push_back(entry);
    }
  }

  ck.metadata["config"] = format_config(config);
  std::string names;
  for (const auto& s : sources) names += (names.empty() ? "" : ",") + s.name;
  ck.metadata["sources"] = names;
  return result;
}

PretrainResult pretrain(const ExperimentConfig& config) {
  std::vector<NamedGraph> sources;
  for (const auto& path : config.sources) sources.push_back({path, load_edge_list(path)});
  return pretrain(sources, config);
}

std::vector<AnomalyScore> score_graph(const Model& model, const DynamicGraph& g, std::size_t begin,
                                      std::size_t end, std::size_t workers) {
  const auto egos = sample_egos(g, begin, end, model.ego);
  return score_all(embed_all(egos, model.encoder, workers), model.stats);
}

AdaptOptions adapt_options(const ExperimentConfig& config, std::size_t stream_edges,
                           const std::string& origin) {
  AdaptOptions opts;
  opts.per_class = static_cast<std::size_t>(
      std::floor(config.ncon_fraction * static_cast<double>(stream_edges) + 1e-9));
  opts.epochs = config.adapt_epochs;
  opts.strategy = config.strategy;
  opts.mode = config.adapt_mode;
  opts.optimizer = AdamOptions{config.adapt_learning_rate};
  opts.batch_size = config.batch_size;
  opts.lambda_d = config.lambda_d;
  opts.lambda_e = config.lambda_e;
  opts.reduction = config.alignment_reduction;
  opts.similarity_sample = config.similarity_sample;
  opts.seed = derive_seed(config.seed, "adapt:" + origin);
  opts.workers = config.workers;
  opts.origin = origin;
  return opts;
}

TargetOutcome run_target(const Checkpoint& checkpoint, const NamedGraph& target,
                         double anomaly_ratio, const ExperimentConfig& config) {
  config.validate();
  const EncoderConfig& ec = checkpoint.model.encoder.config();
  if (target.graph.feature_dim() + checkpoint.model.ego.time_dim != ec.input_dim) {
    throw ConfigError("target '" + target.name + "' edge features do not match the checkpoint");
  }
  TargetOutcome out;
  out.dataset = target.name;
  out.anomaly_ratio = anomaly_ratio;

  const TemporalSplit split = temporal_split(target.graph, SplitSpec{config.adapt_fraction});
  const std::size_t cut = split.train.size();
  out.adapt_edges = cut;
  out.test_edges = split.test.size();
  if (split.test.empty()) throw MetricError("target '" + target.name + "' has no test edges");

  const AdaptOptions opts = adapt_options(config, cut, target.name);

  Model model = checkpoint.model;
  if (opts.per_class > 0 && cut > 0) {
    const UnlabeledGraph stream(split.train);
    const AdaptResult adapted = adapt_target(checkpoint.model, checkpoint.buffer, stream, opts);
    out.adapted = adapted.adapted;
    out.alignment_curve = adapted.alignment_curve;
    if (config.strategy == SelectionStrategy::kEntropy && !adapted.confident.empty()) {
      out.entropy_property = entropy_selection_holds(adapted.detections, adapted.confident);
    }
    model = adapted.model;
  }

  const DynamicGraph injected = inject_anomalies(
      target.graph, anomaly_ratio, derive_seed(config.seed, "inject:" + target.name), cut);
  out.injected = injected.size() - target.graph.size();
  const auto scores = score_graph(model, injected, cut, injected.size(), config.workers);
  out.scores.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.scores.push_back(scores[i].score);
    out.labels.push_back(injected.edge(cut + i).label);
  }
  out.auroc = auroc(out.scores, out.labels);
  out.auprc = auprc(out.scores, out.labels);
  return out;
}

MetricReport run_targets(const Checkpoint& checkpoint, const ExperimentConfig& config,
                         const std::string& method) {
  MetricReport report;
  for (const auto& path : config.targets) {
    const NamedGraph target{path, load_edge_list(path)};
    for (double ratio : config.anomaly_ratios) {
      const TargetOutcome r = run_target(checkpoint, target, ratio, config);
      report.add({method, path, ratio, static_cast<std::size_t>(config.seed), r.auroc, r.auprc});
    }
  }
  return report;
}

}  // namespace dgad
