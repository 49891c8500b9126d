#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgad/config.hpp"
#include "dgad/pipeline.hpp"
#include "dgad/synth.hpp"

namespace dgad {

enum class Variant {
  kFull,
  kWithoutAdaptation,  // N_con = 0
  kWithoutRetention,   // lambda_e = 0, lambda_d = 1
  kSingleSource,       // first source only
};

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

// Two labeled source domains and one shifted, unlabeled target domain.
struct BenchmarkSetup {
  SynthSpec source_a;
  SynthSpec source_b;
  SynthSpec target;
  double source_ratio = 0.10;  // anomalies injected across each whole source
  double target_ratio = 0.10;  // anomalies injected into the target test suffix
  // Fixes the shared community centroids, so every run seed sees the same
  // domains and only sampling, injection, initialisation and shuffling vary.
  std::uint64_t structure_seed = 0;
  ExperimentConfig config;
};

// Desk-scale defaults sized for a single CPU core.
BenchmarkSetup desk_benchmark();

ExperimentConfig apply_variant(ExperimentConfig config, Variant variant);

struct BenchmarkRun {
  Variant variant = Variant::kFull;
  std::uint64_t seed = 0;
  TargetOutcome outcome;
  std::vector<EpochLog> log;
};

// Generates the three domains from `seed`, pretrains, adapts and evaluates.
BenchmarkRun run_benchmark(const BenchmarkSetup& setup, Variant variant, std::uint64_t seed);

}  // namespace dgad
