#pragma once

#include <span>
#include <string>
#include <vector>

#include "dgad/dyngraph.hpp"

namespace dgad {

// Area under the ROC curve; tied scores contribute half credit. Throws
// MetricError unless both classes are present and all labels are known.
double auroc(std::span<const double> scores, std::span<const Label> labels);

// Average precision with tied scores admitted as one block.
double auprc(std::span<const double> scores, std::span<const Label> labels);

struct MetricEntry {
  std::string method;
  std::string dataset;
  double anomaly_ratio = 0.0;
  std::size_t seed = 0;
  double auroc = 0.0;
  double auprc = 0.0;
};

struct MetricReport {
  std::vector<MetricEntry> entries;

  void add(MetricEntry entry) { entries.push_back(std::move(entry)); }
  // Aligned human-readable table, one row per entry.
  std::string table() const;
  // One `key=value` record per entry.
  std::string records() const;
};

}  // namespace dgad
