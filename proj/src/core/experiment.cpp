#include "deepnmf/experiment.hpp"

#include "deepnmf/error.hpp"
#include "deepnmf/nonlinear.hpp"
#include "deepnmf/store.hpp"
#include "deepnmf/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <thread>

namespace deepnmf {

namespace fs = std::filesystem;

std::vector<std::vector<Index>> draw_ranked_layers(const RandomLayerDraws& draws,
                                                   int depth, Index last, Index max) {
  if (depth < 1 || last < 1) throw InvalidInput("random layers: depth and last size must be >= 1");
  if (max - last < Index(depth - 1)) {
    throw InvalidInput("random layers: cannot fit " + std::to_string(depth) +
                       " distinct sizes in [" + std::to_string(last) + ", " +
                       std::to_string(max) + "]");
  }
  std::seed_seq seq{std::uint32_t(draws.seed), std::uint32_t(draws.seed >> 32), 0x1a7eu};
  std::mt19937_64 rng(seq);
  std::geometric_distribution<Index> geom(draws.p);
  const Index span = max - last;  // offsets 1..span are admissible

  std::vector<std::vector<Index>> out;
  for (int d = 0; d < draws.count; ++d) {
    std::set<Index> picked;
    int attempts = 0;
    while (Index(picked.size()) < Index(depth - 1)) {
      if (++attempts > 1000000) throw InternalError("random layers: rejection sampling stalled");
      const Index offset = 1 + geom(rng);
      if (offset > span) continue;  // truncation
      picked.insert(last + offset);
    }
    std::vector<Index> sizes(picked.rbegin(), picked.rend());
    sizes.push_back(last);
    out.push_back(std::move(sizes));
  }
  return out;
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg, Index features) {
  const SweepConfig& s = cfg.sweep;
  std::vector<std::vector<Index>> layers = s.layers;
  if (s.random.count > 0) {
    const int depth = s.random.depth > 0 ? s.random.depth : int(cfg.model.layers.size());
    const Index last = s.random.last > 0 ? s.random.last : cfg.model.layers.back();
    const Index max = s.random.max > 0 ? s.random.max : features - 1;
    layers = draw_ranked_layers(s.random, depth, last, max);
  }
  if (layers.empty()) layers.push_back(cfg.model.layers);
  const std::vector<double> mus = s.mu.empty() ? std::vector<double>{} : s.mu;
  const std::vector<double> lambdas = s.lambda;
  std::vector<std::optional<ActivationKind>> acts;
  for (auto a : s.activation) acts.emplace_back(a);
  if (acts.empty()) acts.emplace_back(std::nullopt);
  std::vector<std::optional<ProjectionMode>> projs;
  for (auto p : s.projection) projs.emplace_back(p);
  if (projs.empty()) projs.emplace_back(std::nullopt);

  const std::size_t n_mu = std::max<std::size_t>(1, mus.size());
  const std::size_t n_lambda = std::max<std::size_t>(1, lambdas.size());
  const std::size_t total = layers.size() * n_mu * n_lambda * acts.size() * projs.size();
  if (total > s.cap) {
    throw InvalidInput("sweep: " + std::to_string(total) + " points exceed the cap of " +
                       std::to_string(s.cap));
  }

  std::vector<SweepPoint> points;
  points.reserve(total);
  for (const auto& ls : layers) {
    for (std::size_t im = 0; im < n_mu; ++im) {
      for (std::size_t il = 0; il < n_lambda; ++il) {
        for (const auto& act : acts) {
          for (const auto& proj : projs) {
            ModelParams mp = cfg.model;
            if (ls.size() != mp.layers.size()) {
              if (mp.mu.size() != 1) mp.mu = {mp.mu.front()};
              if (mp.lambda.size() != 1) mp.lambda = {mp.lambda.front()};
            }
            mp.layers = ls;
            if (!mus.empty()) mp.mu = {mus[im]};
            if (!lambdas.empty()) mp.lambda = {lambdas[il]};
            if (act) mp.activation = *act;
            if (proj) mp.projection = *proj;
            if (mp.activation == ActivationKind::linear && !proj) mp.projection.reset();
            points.push_back({points.size(), mp.build()});
          }
        }
      }
    }
  }
  return points;
}

DatasetBundle load_dataset(const DataSource& src) {
  if (src.path.empty()) return synth_generate(src.synth_kind, src.synth, src.synth_seed);
  return load_dataset(src.path, src.labels, src.format);
}

unsigned worker_count(std::size_t tasks) {
  unsigned n = 0;
  if (const char* env = std::getenv("DEEPNMF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = unsigned(v);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return unsigned(std::max<std::size_t>(1, std::min<std::size_t>(n, tasks)));
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix(splitmix(splitmix(base ^ splitmix(a)) ^ b) ^ c);
}

RunRecord run_one(const ExperimentConfig& cfg, const DatasetBundle& data,
                  const SweepPoint& point, int rep,
                  const std::optional<Partition>& truth) {
  RunRecord rec;
  rec.point = point.index;
  rec.model_rep = rep;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    TrainConfig tcfg = cfg.train;
    tcfg.seed = cfg.train.seed + std::uint64_t(rep);
    tcfg.record_trace = false;
    const TrainResult tr = train(point.spec, data.x, tcfg);
    rec.final_objective = tr.report.final_objective;
    rec.pretrain_objective = tr.pretrain_objective;
    rec.sweeps_used = tr.report.sweeps_used;
    rec.w1_sparsity = near_zero_fraction(tr.stack.w.front().mat());

    const NonnegMatrix rep_h = representation(point.spec, tr.stack);
    int k = cfg.eval.clusters;
    if (k == 0) k = truth ? truth->n_clusters : int(point.spec.layer_sizes.back());
    k = int(std::min<Index>(k, data.x.cols()));
    for (int kr = 0; kr < cfg.eval.kmeans_reps; ++kr) {
      const auto km = kmeans(rep_h.mat(), k, cfg.eval.kmeans_restarts,
                             mix_seed(cfg.eval.seed, point.index, std::uint64_t(rep),
                                      std::uint64_t(kr)));
      KMeansScore s;
      s.kmeans_rep = kr;
      if (truth) {
        s.nmi = nmi(km.partition, *truth);
        s.er = error_rate(km.partition, *truth, cfg.eval.er_literal);
        s.np = naive_precision(km.partition, *truth);
      } else {
        s.nmi = s.er = s.np = std::numeric_limits<double>::quiet_NaN();
      }
      rec.scores.push_back(s);
    }
    if (cfg.output.dump_factors) {
      const fs::path dir = cfg.output.dir / "factors" /
                           ("p" + std::to_string(point.index) + "_r" + std::to_string(rep));
      save_model(dir, point.spec, tr.stack, data.labels ? &*data.labels : nullptr);
    }
  } catch (const Error& e) {
    rec.status = to_string(e.kind());
    rec.message = e.what();
    rec.scores.clear();
  } catch (const std::exception& e) {
    rec.status = to_string(ErrorKind::Internal);
    rec.message = e.what();
    rec.scores.clear();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

MetricStats stats(const std::vector<double>& v) {
  MetricStats s;
  std::vector<double> finite;
  for (double x : v) {
    if (std::isfinite(x)) finite.push_back(x);
  }
  s.n = int(finite.size());
  if (finite.empty()) {
    s.mean = s.std = s.min = s.max = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double x : finite) sum += x;
  s.mean = sum / double(s.n);
  double ss = 0.0;
  for (double x : finite) ss += (x - s.mean) * (x - s.mean);
  s.std = s.n > 1 ? std::sqrt(ss / double(s.n - 1)) : 0.0;
  s.min = *std::min_element(finite.begin(), finite.end());
  s.max = *std::max_element(finite.begin(), finite.end());
  return s;
}

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += '|';
    out += num(v[i]);
  }
  return out;
}

std::string point_columns(const ModelSpec& spec) {
  return std::string(to_string(spec.variant)) + "," + format_index_list(spec.layer_sizes, '|') +
         "," + join_reals(spec.mu) + "," + join_reals(spec.lambda) + "," +
         std::string(to_string(spec.activation)) + "," + std::string(to_string(spec.projection));
}

nlohmann::json stats_json(const MetricStats& s) {
  auto val = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"n", s.n}, {"mean", val(s.mean)}, {"std", val(s.std)}, {"min", val(s.min)},
          {"max", val(s.max)}};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const DatasetBundle& data) {
  cfg.validate();
  data.validate();
  ExperimentResult result;
  result.dataset = data.name;
  result.points = expand_sweep(cfg, data.x.rows());
  std::optional<Partition> truth;
  if (data.labels) truth = Partition::from_labels(data.labels->labels);

  const int reps = cfg.eval.model_reps;
  const std::size_t n_tasks = result.points.size() * std::size_t(reps);
  result.records.resize(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      result.records[t] = run_one(cfg, data, result.points[t / reps], int(t % reps), truth);
    }
  };
  const unsigned n_workers = worker_count(n_tasks);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const SweepPoint& p : result.points) {
    PointSummary s;
    s.point = p.index;
    std::vector<double> nmis, ers, nps, objs, sweeps, sparsity;
    for (int r = 0; r < reps; ++r) {
      const RunRecord& rec = result.records[p.index * reps + r];
      if (!rec.ok()) {
        ++s.failed_runs;
        continue;
      }
      ++s.ok_runs;
      objs.push_back(rec.final_objective);
      sweeps.push_back(rec.sweeps_used);
      sparsity.push_back(rec.w1_sparsity);
      for (const auto& sc : rec.scores) {
        nmis.push_back(sc.nmi);
        ers.push_back(sc.er);
        nps.push_back(sc.np);
      }
    }
    s.nmi = stats(nmis);
    s.er = stats(ers);
    s.np = stats(nps);
    s.final_objective = stats(objs);
    s.sweeps_used = stats(sweeps);
    s.w1_sparsity = stats(sparsity);
    result.summaries.push_back(s);
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const DatasetBundle data = load_dataset(cfg.data);
  std::error_code ec;
  fs::create_directories(cfg.output.dir, ec);
  if (ec) throw IoError("cannot create '" + cfg.output.dir.string() + "': " + ec.message());
  ExperimentResult r = run_experiment(cfg, data);
  write_outputs(cfg, r);
  return r;
}

std::string format_runs_csv(const ExperimentResult& r) {
  std::string out =
      "point,model_rep,kmeans_rep,variant,layers,mu,lambda,activation,projection,status,"
      "nmi,er,np,final_objective,pretrain_objective,sweeps_used,w1_sparsity\n";
  for (const RunRecord& rec : r.records) {
    const std::string prefix = std::to_string(rec.point) + "," + std::to_string(rec.model_rep) + ",";
    const std::string cols = point_columns(r.points[rec.point].spec) + "," + rec.status + ",";
    if (!rec.ok()) {
      out += prefix + "," + cols + ",,,,,,\n";
      continue;
    }
    const std::string tail = num(rec.final_objective) + "," + num(rec.pretrain_objective) + "," +
                             std::to_string(rec.sweeps_used) + "," + num(rec.w1_sparsity) + "\n";
    for (const auto& sc : rec.scores) {
      out += prefix + std::to_string(sc.kmeans_rep) + "," + cols + num(sc.nmi) + "," +
             num(sc.er) + "," + num(sc.np) + "," + tail;
    }
  }
  return out;
}

std::string format_summary_csv(const ExperimentResult& r) {
  std::string out = "point,variant,layers,mu,lambda,activation,projection,ok_runs,failed_runs";
  const char* metrics[] = {"nmi", "er", "np", "final_objective", "sweeps_used", "w1_sparsity"};
  for (const char* m : metrics) {
    for (const char* s : {"mean", "std", "min", "max"}) out += std::string(",") + m + "_" + s;
  }
  out += "\n";
  for (const PointSummary& s : r.summaries) {
    out += std::to_string(s.point) + "," + point_columns(r.points[s.point].spec) + "," +
           std::to_string(s.ok_runs) + "," + std::to_string(s.failed_runs);
    for (const MetricStats* m : {&s.nmi, &s.er, &s.np, &s.final_objective, &s.sweeps_used,
                                 &s.w1_sparsity}) {
      out += "," + num(m->mean) + "," + num(m->std) + "," + num(m->min) + "," + num(m->max);
    }
    out += "\n";
  }
  return out;
}

std::string format_summary_json(const ExperimentResult& r) {
  nlohmann::json points = nlohmann::json::array();
  for (const PointSummary& s : r.summaries) {
    const ModelSpec& spec = r.points[s.point].spec;
    nlohmann::json errors = nlohmann::json::array();
    for (const RunRecord& rec : r.records) {
      if (rec.point == s.point && !rec.ok()) {
        errors.push_back({{"model_rep", rec.model_rep}, {"status", rec.status},
                          {"message", rec.message}});
      }
    }
    points.push_back({{"point", s.point},
                      {"variant", to_string(spec.variant)},
                      {"layers", spec.layer_sizes},
                      {"mu", spec.mu},
                      {"lambda", spec.lambda},
                      {"activation", to_string(spec.activation)},
                      {"projection", to_string(spec.projection)},
                      {"ok_runs", s.ok_runs},
                      {"failed_runs", s.failed_runs},
                      {"errors", errors},
                      {"nmi", stats_json(s.nmi)},
                      {"er", stats_json(s.er)},
                      {"np", stats_json(s.np)},
                      {"final_objective", stats_json(s.final_objective)},
                      {"sweeps_used", stats_json(s.sweeps_used)},
                      {"w1_sparsity", stats_json(s.w1_sparsity)}});
  }
  nlohmann::json doc = {{"dataset", r.dataset}, {"points", points}};
  return doc.dump(2) + "\n";
}

std::string format_timing_csv(const ExperimentResult& r) {
  std::string out = "point,model_rep,wall_ms\n";
  for (const RunRecord& rec : r.records) {
    out += std::to_string(rec.point) + "," + std::to_string(rec.model_rep) + "," +
           num(rec.wall_ms) + "\n";
  }
  return out;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& r) {
  std::error_code ec;
  fs::create_directories(cfg.output.dir, ec);
  if (ec) throw IoError("cannot create '" + cfg.output.dir.string() + "': " + ec.message());
  write_file(cfg.output.dir / "runs.csv", format_runs_csv(r));
  write_file(cfg.output.dir / "summary.csv", format_summary_csv(r));
  write_file(cfg.output.dir / "summary.json", format_summary_json(r));
  if (cfg.output.timing) write_file(cfg.output.dir / "timing.csv", format_timing_csv(r));
}

}  // namespace deepnmf
