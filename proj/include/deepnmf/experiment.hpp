#pragma once

#include "deepnmf/config.hpp"
#include "deepnmf/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace deepnmf {

struct SweepPoint {
  std::size_t index = 0;
  ModelSpec spec;
};

// Cross product of the sweep lists (an empty list keeps the base model
// value), or the ranked random layer draws. Throws InvalidInput when the
// point count exceeds sweep.cap.
std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg, Index features);

// `count` layer-size vectors of length `depth`, strictly decreasing, ending in
// `last`, every entry <= max.
std::vector<std::vector<Index>> draw_ranked_layers(const RandomLayerDraws& draws,
                                                   int depth, Index last, Index max);

DatasetBundle load_dataset(const DataSource& src);

struct KMeansScore {
  int kmeans_rep = 0;
  // NaN when the data carries no labels.
  double nmi = 0.0, er = 0.0, np = 0.0;
};

// One (sweep point, model rep) run.
struct RunRecord {
  std::size_t point = 0;
  int model_rep = 0;
  std::string status = "ok";  // otherwise the error class
  std::string message;
  double final_objective = 0.0;
  double pretrain_objective = 0.0;
  int sweeps_used = 0;
  double w1_sparsity = 0.0;  // fraction of |W_1| entries below 1e-6
  double wall_ms = 0.0;
  std::vector<KMeansScore> scores;

  bool ok() const noexcept { return status == "ok"; }
};

struct MetricStats {
  int n = 0;
  double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
};

struct PointSummary {
  std::size_t point = 0;
  int ok_runs = 0;
  int failed_runs = 0;
  MetricStats nmi, er, np, final_objective, sweeps_used, w1_sparsity;
};

struct ExperimentResult {
  std::string dataset;
  std::vector<SweepPoint> points;
  std::vector<RunRecord> records;  // ordered by (point, model_rep)
  std::vector<PointSummary> summaries;
};

// Worker count: DEEPNMF_THREADS when set to a positive integer, else the
// hardware concurrency; never more than `tasks`.
unsigned worker_count(std::size_t tasks);

// Runs every sweep point x model rep on `data`. Output ordering does not
// depend on scheduling.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const DatasetBundle& data);

// Loads the configured data, runs, and writes runs.csv, summary.csv,
// summary.json (plus timing.csv and factor dumps when enabled) to
// cfg.output.dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// CSV rows: one per (point, model_rep, kmeans_rep), header first.
std::string format_runs_csv(const ExperimentResult& r);
std::string format_summary_csv(const ExperimentResult& r);
std::string format_summary_json(const ExperimentResult& r);
std::string format_timing_csv(const ExperimentResult& r);

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& r);

}  // namespace deepnmf
