#include "dgad/benchmark.hpp"

#include "dgad/error.hpp"
#include "dgad/random.hpp"

namespace dgad {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kWithoutAdaptation: return "no_adaptation";
    case Variant::kWithoutRetention: return "no_retention";
    case Variant::kSingleSource: return "single_source";
  }
  return "full";
}

Variant parse_variant(const std::string& name) {
  for (auto v : {Variant::kFull, Variant::kWithoutAdaptation, Variant::kWithoutRetention,
                 Variant::kSingleSource}) {
    if (to_string(v) == name) return v;
  }
  throw ArgumentError("unknown benchmark variant '" + name + "'");
}

BenchmarkSetup desk_benchmark() {
  BenchmarkSetup s;
  s.source_a.communities = 4;
  s.source_a.nodes = 200;
  s.source_a.edges = 2000;

  s.source_b = s.source_a;
  s.source_b.shift = {1.0, 0.5, 0.3, 2, 0.2};

  s.target = s.source_a;
  s.target.shift = {-0.5, 0.25, -0.3, 1, 0.2};

  ExperimentConfig& c = s.config;
  c.ego = {1, 16, 8};
  c.layer_dims = {32, 32};
  c.attention_dim = 32;
  c.prototype_dim = 16;
  c.epochs = 50;
  c.adapt_epochs = 10;
  c.learning_rate = 2e-3;
  c.adapt_learning_rate = 1e-3;
  c.anomaly_ratios = {s.target_ratio};
  return s;
}

ExperimentConfig apply_variant(ExperimentConfig config, Variant variant) {
  switch (variant) {
    case Variant::kFull:
    case Variant::kSingleSource:
      break;
    case Variant::kWithoutAdaptation:
      config.ncon_fraction = 0.0;
      break;
    case Variant::kWithoutRetention:
      config.lambda_e = 0.0;
      config.lambda_d = 1.0;
      break;
  }
  return config;
}

BenchmarkRun run_benchmark(const BenchmarkSetup& setup, Variant variant, std::uint64_t seed) {
  ExperimentConfig config = apply_variant(setup.config, variant);
  config.seed = seed;

  auto labeled_source = [&](SynthSpec spec, const char* name) {
    spec.seed = derive_seed(seed, std::string("bench.") + name);
    spec.structure_seed = derive_seed(setup.structure_seed, "bench.structure");
    const DynamicGraph g = generate_synthetic(spec).graph;
    return NamedGraph{name, inject_anomalies(g, setup.source_ratio,
                                             derive_seed(seed, std::string("bench.inject.") + name))};
  };
  std::vector<NamedGraph> sources;
  sources.push_back(labeled_source(setup.source_a, "source_a"));
  if (variant != Variant::kSingleSource) sources.push_back(labeled_source(setup.source_b, "source_b"));

  SynthSpec target_spec = setup.target;
  target_spec.seed = derive_seed(seed, "bench.target");
  target_spec.structure_seed = derive_seed(setup.structure_seed, "bench.structure");
  const NamedGraph target{"target", generate_synthetic(target_spec).graph};

  BenchmarkRun run;
  run.variant = variant;
  run.seed = seed;
  PretrainResult trained = pretrain(sources, config);
  run.log = std::move(trained.log);
  run.outcome = run_target(trained.checkpoint, target, setup.target_ratio, config);
  return run;
}

}  // namespace dgad
