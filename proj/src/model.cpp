#include "dgad/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dgad/error.hpp"
#include "dgad/parallel.hpp"

namespace dgad {

GradientSet GradientSet::zeros_like(const Model& model) {
  GradientSet g;
  g.encoder = model.encoder.zeros_like();
  g.normal = Eigen::VectorXd::Zero(model.prototypes.normal.size());
  g.abnormal = Eigen::VectorXd::Zero(model.prototypes.abnormal.size());
  return g;
}

void GradientSet::add(const GradientSet& other) {
  encoder.values() += other.encoder.values();
  normal += other.normal;
  abnormal += other.abnormal;
  lambda_normal += other.lambda_normal;
  lambda_abnormal += other.lambda_abnormal;
  loss.total += other.loss.total;
  loss.bce += other.loss.bce;
  loss.alignment += other.loss.alignment;
}

namespace {

void validate_batch(std::span<const Example> batch, const Model& model,
                    const LossWeights& weights) {
  if (batch.empty()) throw ArgumentError("loss of an empty batch");
  if (model.prototypes.dim() != model.encoder.config().prototype_dim ||
      model.stats.dim() != model.encoder.config().prototype_dim) {
    throw ShapeError("prototype/statistics width differs from encoder output width");
  }
  for (const Example& ex : batch) {
    if (ex.ego == nullptr) throw ArgumentError("batch entry without ego-graph");
    if (!is_known(ex.label)) throw ArgumentError("loss requires resolved labels");
  }
  if (weights.bce < 0.0 || weights.alignment < 0.0) {
    throw ArgumentError("loss weights must be non-negative");
  }
}

double alignment_scale(const LossWeights& w, std::size_t batch) {
  return w.reduction == AlignmentReduction::kMean ? 1.0 / static_cast<double>(batch) : 1.0;
}

// Per-example contribution; `grad` may be null for a forward-only pass.
void accumulate_example(const Example& ex, const Model& model, const LossWeights& weights,
                        double inv_batch, double align_scale, GradientSet* grad,
                        LossBreakdown& loss) {
  EncoderTape tape;
  const EdgeEmbedding z = encode(*ex.ego, model.encoder, grad ? &tape : nullptr);
  const bool abnormal = ex.label == Label::kAbnormal;
  const Eigen::VectorXd& target = abnormal ? model.prototypes.abnormal : model.prototypes.normal;
  const Eigen::VectorXd diff = z.values - target;
  const double align = diff.squaredNorm();
  loss.alignment += align_scale * align;

  Eigen::VectorXd grad_z = Eigen::VectorXd::Zero(z.values.size());
  if (weights.bce > 0.0) {
    const AnomalyScore s = score_edge(z.values, model.stats);
    const double p = s.probability;
    const double pc = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    loss.bce += -(abnormal ? std::log(pc) : std::log(1.0 - pc)) * inv_batch;
    if (grad && p == pc) {
      const double y = abnormal ? 1.0 : 0.0;
      const double g_s = weights.bce * (p - y) * inv_batch;
      const auto& st = model.stats;
      const Eigen::VectorXd n_quad = (st.sigma_normal + st.sigma_normal.transpose()) * z.values;
      const Eigen::VectorXd a_quad =
          (st.sigma_abnormal + st.sigma_abnormal.transpose()) * z.values;
      grad_z += g_s * (st.mu_abnormal - st.mu_normal - st.lambda_abnormal * a_quad +
                       st.lambda_normal * n_quad);
      grad->lambda_normal += g_s * z.values.dot(st.sigma_normal * z.values);
      grad->lambda_abnormal -= g_s * z.values.dot(st.sigma_abnormal * z.values);
    }
  }
  if (grad) {
    const Eigen::VectorXd g_align = (2.0 * weights.alignment * align_scale) * diff;
    grad_z += g_align;
    (abnormal ? grad->abnormal : grad->normal) -= g_align;
    backpropagate(*ex.ego, model.encoder, tape, grad_z, grad->encoder);
  }
}

void finish(LossBreakdown& loss, const LossWeights& weights) {
  loss.total = total_loss(loss.bce, loss.alignment, weights.bce > 0.0 ? weights.bce : 0.0,
                          weights.alignment);
  if (!std::isfinite(loss.total)) {
    std::ostringstream msg;
    msg << "non-finite loss (bce=" << loss.bce << ", alignment=" << loss.alignment << ")";
    throw NumericalError(msg.str());
  }
}

}  // namespace

LossBreakdown evaluate_loss(std::span<const Example> batch, const Model& model,
                            const LossWeights& weights) {
  validate_batch(batch, model, weights);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const double align_scale = alignment_scale(weights, batch.size());
  LossBreakdown loss;
  for (const Example& ex : batch) {
    accumulate_example(ex, model, weights, inv_batch, align_scale, nullptr, loss);
  }
  finish(loss, weights);
  return loss;
}

GradientSet parameter_gradients(std::span<const Example> batch, const Model& model,
                                const LossWeights& weights, std::size_t workers) {
  validate_batch(batch, model, weights);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const double align_scale = alignment_scale(weights, batch.size());

  const ChunkPlan plan{batch.size(), 8};
  std::vector<GradientSet> partial(plan.chunks(), GradientSet::zeros_like(model));
  for_each_chunk(plan, workers, [&](std::size_t c) {
    GradientSet& g = partial[c];
    for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
      accumulate_example(batch[i], model, weights, inv_batch, align_scale, &g, g.loss);
    }
  });
  GradientSet total = GradientSet::zeros_like(model);
  for (const GradientSet& g : partial) total.add(g);
  finish(total.loss, weights);
  if (!total.encoder.all_finite() || !total.normal.allFinite() || !total.abnormal.allFinite()) {
    throw NumericalError("non-finite gradient");
  }
  return total;
}

std::vector<EdgeEmbedding> embed_all(std::span<const TemporalEgoGraph> egos,
                                     const EncoderParams& encoder, std::size_t workers) {
  std::vector<EdgeEmbedding> out(egos.size());
  const ChunkPlan plan{egos.size(), 16};
  for_each_chunk(plan, workers, [&](std::size_t c) {
    for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) out[i] = encode(egos[i], encoder);
  });
  return out;
}

std::vector<AnomalyScore> score_all(std::span<const EdgeEmbedding> embeddings,
                                    const DistributionStats& stats) {
  std::vector<AnomalyScore> out;
  out.reserve(embeddings.size());
  for (const auto& z : embeddings) out.push_back(score_edge(z.values, stats, z.edge_ref));
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd pack_parameters(const Model& model) {
  const auto n_enc = static_cast<Eigen::Index>(model.encoder.size());
  const auto d = static_cast<Eigen::Index>(model.prototypes.dim());
  Eigen::VectorXd flat(n_enc + 2 * d + 2);
  flat.head(n_enc) = model.encoder.values();
  flat.segment(n_enc, d) = model.prototypes.normal;
  flat.segment(n_enc + d, d) = model.prototypes.abnormal;
  flat(n_enc + 2 * d) = model.stats.lambda_normal;
  flat(n_enc + 2 * d + 1) = model.stats.lambda_abnormal;
  return flat;
}

void unpack_parameters(const Eigen::VectorXd& flat, Model& model) {
  const auto n_enc = static_cast<Eigen::Index>(model.encoder.size());
  const auto d = static_cast<Eigen::Index>(model.prototypes.dim());
  if (flat.size() != n_enc + 2 * d + 2) throw ShapeError("flat parameter vector has wrong size");
  model.encoder.values() = flat.head(n_enc);
  model.prototypes.normal = flat.segment(n_enc, d);
  model.prototypes.abnormal = flat.segment(n_enc + d, d);
  model.stats.lambda_normal = flat(n_enc + 2 * d);
  model.stats.lambda_abnormal = flat(n_enc + 2 * d + 1);
}

Eigen::VectorXd pack_gradients(const GradientSet& grad) {
  const auto n_enc = static_cast<Eigen::Index>(grad.encoder.size());
  const auto d = grad.normal.size();
  Eigen::VectorXd flat(n_enc + 2 * d + 2);
  flat.head(n_enc) = grad.encoder.values();
  flat.segment(n_enc, d) = grad.normal;
  flat.segment(n_enc + d, d) = grad.abnormal;
  flat(n_enc + 2 * d) = grad.lambda_normal;
  flat(n_enc + 2 * d + 1) = grad.lambda_abnormal;
  return flat;
}

ParamRange prototype_range(const Model& model) {
  const std::size_t n_enc = model.encoder.size();
  return {n_enc, n_enc + 2 * model.prototypes.dim()};
}

std::vector<ParamRange> trainable_ranges(const Model& model, const TrainableMask& mask) {
  std::vector<ParamRange> ranges;
  const std::size_t n_enc = model.encoder.size();
  const ParamRange protos = prototype_range(model);
  if (mask.encoder) ranges.push_back({0, n_enc});
  if (mask.prototypes) ranges.push_back(protos);
  if (mask.lambdas) ranges.push_back({protos.end, protos.end + 2});
  return ranges;
}

Adam::Adam(std::size_t size, AdamOptions options)
    : options_(options),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      steps_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                std::span<const ParamRange> active) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ShapeError("optimizer state size differs from parameter vector");
  }
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  for (const ParamRange& r : active) {
    for (std::size_t k = r.begin; k < r.end; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      steps_(i) += 1.0;
      m_(i) = b1 * m_(i) + (1.0 - b1) * grad(i);
      v_(i) = b2 * v_(i) + (1.0 - b2) * grad(i) * grad(i);
      const double m_hat = m_(i) / (1.0 - std::pow(b1, steps_(i)));
      const double v_hat = v_(i) / (1.0 - std::pow(b2, steps_(i)));
      params(i) -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

void Adam::reset(ParamRange range) {
  for (std::size_t k = range.begin; k < range.end; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    m_(i) = 0.0;
    v_(i) = 0.0;
    steps_(i) = 0.0;
  }
}

}  // namespace dgad
