#include "dgad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "dgad/error.hpp"

namespace dgad {

namespace {

struct Counts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

Counts check(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw MetricError("scores and labels differ in length");
  Counts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!is_known(labels[i])) throw MetricError("metric labels must be 0/1");
    if (!std::isfinite(scores[i])) throw MetricError("non-finite score");
    (labels[i] == Label::kAbnormal ? c.positives : c.negatives) += 1;
  }
  if (c.positives == 0 || c.negatives == 0) {
    throw MetricError("metric undefined: only one class present");
  }
  return c;
}

std::vector<std::size_t> order_descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const Label> labels) {
  const Counts c = check(scores, labels);
  // Mann-Whitney U with average ranks.
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[idx[k]] == Label::kAbnormal) rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(c.positives);
  const double n = static_cast<double>(c.negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double auprc(std::span<const double> scores, std::span<const Label> labels) {
  const Counts c = check(scores, labels);
  const auto idx = order_descending(scores);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t seen = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]] == Label::kAbnormal) ++tp;
      ++seen;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(c.positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

std::string MetricReport::table() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-18s %7s %5s %8s %8s\n", "method", "dataset", "ratio",
                "seed", "AUROC", "AUPRC");
  out << line;
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, "%-18s %-18s %7.3f %5zu %8.4f %8.4f\n", e.method.c_str(),
                  e.dataset.c_str(), e.anomaly_ratio, e.seed, e.auroc, e.auprc);
    out << line;
  }
  return out.str();
}

std::string MetricReport::records() const {
  std::ostringstream out;
  out.precision(6);
  for (const auto& e : entries) {
    out << "method=" << e.method << " dataset=" << e.dataset << " ratio=" << e.anomaly_ratio
        << " seed=" << e.seed << " auroc=" << e.auroc << " auprc=" << e.auprc << '\n';
  }
  return out.str();
}

}  // namespace dgad
