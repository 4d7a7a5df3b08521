#pragma once

#include "deepnmf/io.hpp"
#include "deepnmf/model.hpp"
#include "deepnmf/synth.hpp"
#include "deepnmf/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepnmf {

// Model fields as written in a config file. mu / lambda hold either one value
// (broadcast to every layer) or one per layer.
struct ModelParams {
  Variant variant = Variant::SDNMF_L;
  std::vector<Index> layers{20, 8};
  std::vector<double> mu{kDefaultPenalty};
  std::vector<double> lambda{kDefaultPenalty};
  ActivationKind activation = ActivationKind::linear;
  // Unset: square1 for nonlinear activations, none otherwise.
  std::optional<ProjectionMode> projection;

  ModelSpec build() const;
};

struct EvalConfig {
  int kmeans_restarts = 10;
  int model_reps = 3;
  int kmeans_reps = 5;
  std::uint64_t seed = 0;
  // Cluster count for k-means; 0 takes the label class count, or the top
  // layer size when the data has no labels.
  int clusters = 0;
  bool er_literal = true;
};

struct DataSource {
  std::filesystem::path path;    // empty: generate synthetic data
  std::filesystem::path labels;  // optional
  std::optional<MatrixFormat> format;
  SynthKind synth_kind = SynthKind::planted_linear;
  SynthParams synth;
  std::uint64_t synth_seed = 0;
};

// Ranked random layer sizes: `count` draws of `depth` sizes, the top fixed
// to `last`, the others last + G with G geometric(p) truncated to `max`,
// distinct and sorted so sizes shrink with depth.
struct RandomLayerDraws {
  int count = 0;
  int depth = 0;      // 0: model depth
  Index last = 0;     // 0: model top size
  Index max = 0;      // 0: features - 1
  double p = 0.1;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  std::vector<std::vector<Index>> layers;
  std::vector<double> mu;
  std::vector<double> lambda;
  std::vector<ActivationKind> activation;
  std::vector<ProjectionMode> projection;
  std::size_t cap = 512;
  RandomLayerDraws random;
};

struct OutputConfig {
  std::filesystem::path dir = "results";
  bool dump_factors = false;
  bool timing = false;
};

struct ExperimentConfig {
  ModelParams model;
  TrainConfig train;
  EvalConfig eval;
  SweepConfig sweep;
  DataSource data;
  OutputConfig output;

  ExperimentConfig();

  // Assigns one dotted key. Unknown keys and malformed values throw
  // InvalidInput.
  void set(std::string_view key, std::string_view value);
  void validate() const;
};

// Flat text format: one `key = value` per line, `#` starts a comment, list
// values are comma-separated, sweep lists separate points with `;`.
//
// Failures: IoError (missing file), ParseError with the line number.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Keys that reproduce a model spec (used when factors are saved).
std::string format_model_keys(const ModelSpec& spec);
ModelSpec parse_model_keys(std::string_view text, std::string_view source);

std::vector<Index> parse_index_list(std::string_view text);
std::string format_index_list(const std::vector<Index>& values, char sep = ',');

}  // namespace deepnmf
