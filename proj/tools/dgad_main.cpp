// Command-line front end: data preparation, pretraining, target adaptation,
// scoring and evaluation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dgad/benchmark.hpp"
#include "dgad/checkpoint.hpp"
#include "dgad/config.hpp"
#include "dgad/error.hpp"
#include "dgad/log.hpp"
#include "dgad/metrics.hpp"
#include "dgad/pipeline.hpp"
#include "dgad/synth.hpp"

namespace {

using namespace dgad;

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> anomaly_ratio;
  std::optional<std::string> strategy;
  std::vector<std::string> settings;  // key=value overrides
  bool verbose = false;
};

ExperimentConfig resolve_config(const GlobalFlags& flags, ExperimentConfig base = {}) {
  ExperimentConfig config = flags.config_path.empty() ? std::move(base)
                                                      : load_config(flags.config_path);
  for (const auto& kv : flags.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.anomaly_ratio) config.anomaly_ratios = {*flags.anomaly_ratio};
  if (flags.strategy) config.strategy = parse_strategy(*flags.strategy);
  config.validate();
  return config;
}

void print_report(const MetricReport& report) {
  std::cout << report.table() << '\n' << report.records();
}

struct ScoredRow {
  double score = 0.0;
  Label label = Label::kUnknown;
};

// Reads `score[,label]` rows (header optional; extra columns ignored when a
// header names `score` and `label`).
std::vector<ScoredRow> read_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  std::vector<ScoredRow> rows;
  std::string line;
  long score_col = 0;
  long label_col = 1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (line_no == 1 && std::find(fields.begin(), fields.end(), "score") != fields.end()) {
      score_col = std::find(fields.begin(), fields.end(), "score") - fields.begin();
      const auto it = std::find(fields.begin(), fields.end(), "label");
      label_col = it == fields.end() ? -1 : it - fields.begin();
      continue;
    }
    ScoredRow row;
    try {
      row.score = std::stod(fields.at(static_cast<std::size_t>(score_col)));
      if (label_col >= 0 && static_cast<std::size_t>(label_col) < fields.size()) {
        const std::string& l = fields[static_cast<std::size_t>(label_col)];
        if (l == "1") row.label = Label::kAbnormal;
        else if (l == "0") row.label = Label::kNormal;
      }
    } catch (const std::exception&) {
      throw ParseError("malformed score row", line_no);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string histogram(const std::vector<AnomalyScore>& scores, std::size_t bins) {
  if (scores.empty() || bins == 0) return {};
  double lo = scores.front().score;
  double hi = lo;
  for (const auto& s : scores) {
    lo = std::min(lo, s.score);
    hi = std::max(hi, s.score);
  }
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  std::vector<std::size_t> counts(bins, 0);
  for (const auto& s : scores) {
    auto b = static_cast<std::size_t>((s.score - lo) / width);
    counts[std::min(b, bins - 1)] += 1;
  }
  const std::size_t peak = *std::max_element(counts.begin(), counts.end());
  std::ostringstream out;
  char buf[64];
  for (std::size_t b = 0; b < bins; ++b) {
    std::snprintf(buf, sizeof buf, "[%10.4f, %10.4f) %6zu ", lo + width * static_cast<double>(b),
                  lo + width * static_cast<double>(b + 1), counts[b]);
    out << buf << std::string(peak ? counts[b] * 50 / peak : 0, '#') << '\n';
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic-graph anomaly detection with prototype transfer"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Experiment config file (key = value)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "Override the experiment seed");
  app.add_option("--anomaly-ratio", flags.anomaly_ratio, "Override the anomaly ratio")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--strategy", flags.strategy,
                 "Confident-selection strategy: entropy|random|threshold|distance|similarity");
  app.add_option("--set", flags.settings, "Config override key=value (repeatable)");
  app.add_flag("-v,--verbose", flags.verbose, "Print progress messages");
  app.fallthrough();

  // inject
  auto* inject = app.add_subcommand("inject", "Inject labeled anomalous edges into an edge list");
  double inject_ratio = 0.1;
  std::uint64_t inject_seed = 0;
  std::size_t inject_first = 0;
  std::string inject_in, inject_out;
  inject->add_option("--ratio", inject_ratio, "Share of edges to inject")->check(CLI::Range(0.0, 1.0));
  inject->add_option("--first-edge", inject_first, "Only the suffix from this edge index is targeted");
  inject->add_option("input", inject_in, "Input edge list")->required()->check(CLI::ExistingFile);
  inject->add_option("output", inject_out, "Output edge list")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic community-structured stream");
  SynthSpec spec;
  double synth_inject = 0.0;
  std::string synth_out;
  synth->add_option("--communities", spec.communities);
  synth->add_option("--nodes", spec.nodes);
  synth->add_option("--edges", spec.edges);
  synth->add_option("--time-span", spec.time_span);
  synth->add_option("--feature-dim", spec.feature_dim);
  synth->add_option("--noise", spec.noise);
  synth->add_option("--inter-fraction", spec.inter_fraction);
  synth->add_option("--feature-offset", spec.shift.feature_offset);
  synth->add_option("--scale-delta", spec.shift.scale_delta);
  synth->add_option("--rate-trend", spec.shift.rate_trend);
  synth->add_option("--community-delta", spec.shift.community_delta);
  synth->add_option("--inject", synth_inject, "Also inject anomalies at this ratio (labels the stream)");
  synth->add_option("output", synth_out, "Output edge list")->required();

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Pretrain on labeled source streams, in order");
  std::vector<std::string> pre_sources;
  std::string pre_out, pre_log;
  pre->add_option("--source", pre_sources, "Source edge list (repeatable; replaces config sources)");
  pre->add_option("-o,--output", pre_out, "Checkpoint path")->required();
  pre->add_option("--log", pre_log, "Write the per-epoch loss log here");

  // adapt
  auto* adapt = app.add_subcommand("adapt", "Adapt a checkpoint to an unlabeled target stream");
  std::string adapt_ckpt, adapt_out;
  std::vector<std::string> adapt_targets;
  bool adapt_evaluate = false;
  adapt->add_option("--checkpoint", adapt_ckpt, "Pretrained checkpoint")->required()->check(CLI::ExistingFile);
  adapt->add_option("--target", adapt_targets, "Target edge list (repeatable; replaces config targets)");
  adapt->add_option("-o,--output", adapt_out, "Write the adapted checkpoint here (single target)");
  adapt->add_flag("--evaluate", adapt_evaluate,
                  "Split each target in time, adapt on the prefix and evaluate on the injected suffix");

  // score
  auto* score = app.add_subcommand("score", "Score every edge of a stream with a checkpoint");
  std::string score_ckpt, score_in, score_out;
  std::size_t score_bins = 0;
  score->add_option("--checkpoint", score_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  score->add_option("input", score_in, "Edge list")->required()->check(CLI::ExistingFile);
  score->add_option("-o,--output", score_out, "Scores CSV (default stdout)");
  score->add_option("--histogram", score_bins, "Print a text histogram with this many bins");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "AUROC / AUPRC of a score,label file");
  std::string eval_in, eval_name = "scores";
  eval->add_option("input", eval_in, "CSV with score and label columns")->required()->check(CLI::ExistingFile);
  eval->add_option("--name", eval_name, "Dataset name for the report");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Synthetic two-source benchmark");
  std::string bench_variant = "full";
  std::size_t bench_seeds = 1;
  bench->add_option("--variant", bench_variant, "full|no_adaptation|no_retention|single_source");
  bench->add_option("--seeds", bench_seeds, "Number of seeds starting at --seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (flags.verbose) {
    log::set_sink([](log::Level level, const std::string& msg) {
      if (level != log::Level::kDebug) std::cerr << msg << '\n';
    });
  }

  try {
    if (*inject) {
      const DynamicGraph g = load_edge_list(inject_in);
      const std::uint64_t seed = flags.seed.value_or(inject_seed);
      const double ratio = flags.anomaly_ratio.value_or(inject_ratio);
      const DynamicGraph out = inject_anomalies(g, ratio, seed, inject_first);
      save_edge_list(out, inject_out);
      std::cout << "injected=" << out.size() - g.size() << " edges=" << out.size() << '\n';
    } else if (*synth) {
      spec.seed = flags.seed.value_or(0);
      DynamicGraph g = generate_synthetic(spec).graph;
      if (synth_inject > 0.0) g = inject_anomalies(g, synth_inject, spec.seed + 1);
      save_edge_list(g, synth_out);
      std::cout << "edges=" << g.size() << " nodes=" << g.nodes().size() << '\n';
    } else if (*pre) {
      ExperimentConfig config = resolve_config(flags);
      if (!pre_sources.empty()) config.sources = pre_sources;
      if (config.sources.empty()) throw ConfigError("no source datasets given");
      const PretrainResult result = pretrain(config);
      save_checkpoint(result.checkpoint, pre_out);
      std::ostringstream log_text;
      for (const auto& e : result.log) {
        log_text << "dataset=" << e.dataset << " epoch=" << e.epoch << " loss=" << e.loss
                 << " bce=" << e.bce << " alignment=" << e.alignment
                 << " buffer=" << e.buffer_size << '\n';
      }
      if (pre_log.empty()) {
        std::cout << log_text.str();
      } else {
        std::ofstream(pre_log) << log_text.str();
      }
    } else if (*adapt) {
      ExperimentConfig config = resolve_config(flags);
      if (!adapt_targets.empty()) config.targets = adapt_targets;
      if (config.targets.empty()) throw ConfigError("no target datasets given");
      const Checkpoint ck = load_checkpoint(adapt_ckpt);
      if (adapt_evaluate) {
        print_report(run_targets(ck, config));
      } else {
        if (config.targets.size() != 1 && !adapt_out.empty()) {
          throw ArgumentError("--output needs exactly one target");
        }
        for (const auto& path : config.targets) {
          const UnlabeledGraph stream(load_edge_list(path));
          const AdaptOptions opts = adapt_options(config, stream.graph().size(), path);
          const AdaptResult r = adapt_target(ck.model, ck.buffer, stream, opts);
          std::cout << "target=" << path << " confident=" << r.confident.size()
                    << " adapted=" << (r.adapted ? 1 : 0);
          if (!r.alignment_curve.empty()) {
            std::cout << " alignment_start=" << r.alignment_curve.front()
                      << " alignment_end=" << r.alignment_curve.back();
          }
          std::cout << '\n';
          if (!adapt_out.empty()) {
            Checkpoint out{r.model, r.buffer, ck.metadata};
            out.metadata["adapted_on"] = path;
            save_checkpoint(out, adapt_out);
          }
        }
      }
    } else if (*score) {
      const Checkpoint ck = load_checkpoint(score_ckpt);
      const DynamicGraph g = load_edge_list(score_in);
      const std::size_t workers = flags.config_path.empty() ? 1 : resolve_config(flags).workers;
      const auto scores = score_graph(ck.model, g, 0, g.size(), workers);
      std::ostringstream out;
      out.precision(10);
      out << "index,score,probability,label\n";
      for (std::size_t i = 0; i < scores.size(); ++i) {
        const Label l = g.edge(i).label;
        out << i << ',' << scores[i].score << ',' << scores[i].probability << ','
            << (is_known(l) ? std::to_string(static_cast<int>(l)) : "") << '\n';
      }
      if (score_out.empty()) {
        std::cout << out.str();
      } else {
        std::ofstream(score_out) << out.str();
      }
      if (score_bins > 0) std::cerr << histogram(scores, score_bins);
    } else if (*eval) {
      const auto rows = read_scores(eval_in);
      std::vector<double> s;
      std::vector<Label> l;
      for (const auto& r : rows) {
        s.push_back(r.score);
        l.push_back(r.label);
      }
      MetricReport report;
      report.add({"scores", eval_name, flags.anomaly_ratio.value_or(0.0),
                  static_cast<std::size_t>(flags.seed.value_or(0)), auroc(s, l), auprc(s, l)});
      print_report(report);
    } else if (*bench) {
      BenchmarkSetup setup = desk_benchmark();
      setup.config = resolve_config(flags, setup.config);
      if (flags.anomaly_ratio) setup.target_ratio = *flags.anomaly_ratio;
      const Variant variant = parse_variant(bench_variant);
      MetricReport report;
      const std::uint64_t first = flags.seed.value_or(0);
      for (std::uint64_t s = first; s < first + bench_seeds; ++s) {
        const BenchmarkRun run = run_benchmark(setup, variant, s);
        report.add({to_string(variant) + "/" + to_string(setup.config.strategy), "synthetic",
                    setup.target_ratio, static_cast<std::size_t>(s), run.outcome.auroc,
                    run.outcome.auprc});
      }
      print_report(report);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
