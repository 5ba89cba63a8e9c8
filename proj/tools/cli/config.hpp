#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "capqe/providers.hpp"
#include "capqe/qe.hpp"
#include "capqe/refinement.hpp"

namespace capqe::cli {

struct SampleConfig {
  double fraction{0.1};
  std::uint64_t seed{0};
};

// Single JSON document; every key is optional and unknown keys are errors.
//   {"corpus": path, "store": path, "chunk_size": 1000, "workers": 1,
//    "store_retries": 2,
//    "qe": {"weights": {"comet", "bert", "clip"}, "threshold", "epsilon",
//           "bounds": {"comet": {"min", "max"}, ...},
//           "component_thresholds": {"comet", "bert", "clip"}},
//    "providers": {"translator" | "text_embedder" | "multimodal_embedder" |
//                  "qe_scorer" | "refiner": {"backend", "endpoint", "timeout_ms",
//                  "max_retries", "max_in_flight", "seed", "dim", "mean",
//                  "fixed_value", "rewrites", "substitutions", "embedding_file"}},
//    "refinement": {"max_iterations", "accept_rule", "instructions"},
//    "sample": {"fraction", "seed"}}
// Relative paths resolve against the directory of the config file.
struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path store;
  std::int64_t chunk_size{1000};
  int workers{1};
  int store_retries{2};
  QEConfig qe;
  ProvidersConfig providers;
  RefinementConfig refinement;
  SampleConfig sample;

  // sha256 of canonical_processing_json(*this).
  std::string config_hash;
};

// Throws ConfigError listing every problem, each prefixed with its key path.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// Sorted-key JSON of the settings that determine chunk content: qe and the
// four scoring providers' model settings. Paths, workers, chunk size, network
// tuning and refinement settings are excluded.
std::string canonical_processing_json(const PipelineConfig& config);

}  // namespace capqe::cli
