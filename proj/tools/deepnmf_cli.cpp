// deepnmf command line front end. Talks to the library only through the C API.
#include "deepnmf/deepnmf.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct Failure {
  dnmf_status status;
  std::string message;
};

void check(dnmf_status s) {
  if (s != DNMF_OK) throw Failure{s, dnmf_last_error()};
}

int exit_code(dnmf_status s) {
  switch (s) {
    case DNMF_OK: return kExitOk;
    case DNMF_E_INVALID:
    case DNMF_E_PARSE:
    case DNMF_E_IO: return kExitData;
    default: return kExitNumerical;
  }
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<dnmf_config, Deleter<dnmf_config, dnmf_config_free>>;
using Dataset = std::unique_ptr<dnmf_dataset, Deleter<dnmf_dataset, dnmf_dataset_free>>;
using Model = std::unique_ptr<dnmf_model, Deleter<dnmf_model, dnmf_model_free>>;
using Matrix = std::unique_ptr<dnmf_matrix, Deleter<dnmf_matrix, dnmf_matrix_free>>;

struct CString {
  char* p = nullptr;
  ~CString() { dnmf_string_free(p); }
};

struct Labels {
  int* p = nullptr;
  size_t n = 0;
  ~Labels() { dnmf_labels_free(p); }
};

Config new_config(const std::string& path) {
  dnmf_config* raw = nullptr;
  check(path.empty() ? dnmf_config_create(&raw) : dnmf_config_load(path.c_str(), &raw));
  return Config(raw);
}

void set(dnmf_config* cfg, const char* key, const std::string& value) {
  check(dnmf_config_set(cfg, key, value.c_str()));
}

template <class T>
void set_opt(dnmf_config* cfg, const char* key, const std::optional<T>& v) {
  if (!v) return;
  if constexpr (std::is_same_v<T, std::string>) {
    set(cfg, key, *v);
  } else {
    std::ostringstream ss;
    ss.precision(17);
    ss << *v;
    set(cfg, key, ss.str());
  }
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data, labels, config, out;
  std::optional<std::string> layers, variant, mu, lambda, activation, projection;
  std::optional<int> max_iters, max_sweeps;
  std::optional<double> grad_tol, rel_tol, jitter;
  std::optional<std::uint64_t> seed;
};

int run_train(const TrainArgs& a) {
  Config cfg = new_config(a.config);
  set_opt(cfg.get(), "model.layers", a.layers);
  set_opt(cfg.get(), "model.variant", a.variant);
  set_opt(cfg.get(), "model.mu", a.mu);
  set_opt(cfg.get(), "model.lambda", a.lambda);
  set_opt(cfg.get(), "model.activation", a.activation);
  set_opt(cfg.get(), "model.projection", a.projection);
  set_opt(cfg.get(), "train.max_iters", a.max_iters);
  set_opt(cfg.get(), "train.max_sweeps", a.max_sweeps);
  set_opt(cfg.get(), "train.grad_tol", a.grad_tol);
  set_opt(cfg.get(), "train.rel_tol", a.rel_tol);
  set_opt(cfg.get(), "train.init_jitter", a.jitter);
  set_opt(cfg.get(), "train.seed", a.seed);

  dnmf_dataset* raw_ds = nullptr;
  check(dnmf_dataset_load(a.data.c_str(), a.labels.empty() ? nullptr : a.labels.c_str(), &raw_ds));
  Dataset ds(raw_ds);

  dnmf_model* raw_model = nullptr;
  check(dnmf_train(cfg.get(), dnmf_dataset_matrix(ds.get()), &raw_model));
  Model model(raw_model);

  const double* trace = nullptr;
  size_t n = 0;
  dnmf_model_trace(model.get(), &trace, &n);
  std::printf("pretrain objective %.10g\n", dnmf_model_pretrain_objective(model.get()));
  for (size_t i = 0; i < n; ++i) std::printf("sweep %zu objective %.10g\n", i, trace[i]);
  std::printf("final objective %.10g after %d sweeps\n", dnmf_model_final_objective(model.get()),
              dnmf_model_sweeps(model.get()));

  std::string out = a.out;
  if (out.empty()) {
    fs::path p(a.data);
    out = (p.parent_path() / (p.stem().string() + "_model")).string();
  }
  const int* labels = nullptr;
  size_t n_labels = 0;
  dnmf_dataset_labels(ds.get(), &labels, &n_labels);
  check(dnmf_model_save(model.get(), out.c_str(), labels, n_labels));
  std::printf("factors written to %s\n", out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string factors, pred, labels;
  int clusters = 0;
  int restarts = 10;
  int reps = 1;
  std::uint64_t seed = 0;
  bool er_sqrt_only = false;
};

void print_scores(const int* found, const int* truth, size_t n, bool literal, double acc[3]) {
  double s[3];
  check(dnmf_nmi(found, truth, n, &s[0]));
  check(dnmf_error_rate(found, truth, n, literal ? 1 : 0, &s[1]));
  check(dnmf_naive_precision(found, truth, n, &s[2]));
  std::printf("nmi %.6f er %.6f np %.6f\n", s[0], s[1], s[2]);
  for (int i = 0; i < 3; ++i) acc[i] += s[i];
}

int run_evaluate(const EvalArgs& a) {
  std::string labels_path = a.labels;
  if (labels_path.empty() && !a.factors.empty()) {
    labels_path = (fs::path(a.factors) / "labels.txt").string();
  }
  if (labels_path.empty()) throw Failure{DNMF_E_INVALID, "evaluate needs --labels"};
  Labels truth;
  check(dnmf_labels_load(labels_path.c_str(), &truth.p, &truth.n));
  const bool literal = !a.er_sqrt_only;
  double acc[3] = {0, 0, 0};

  if (!a.pred.empty()) {
    Labels found;
    check(dnmf_labels_load(a.pred.c_str(), &found.p, &found.n));
    if (found.n != truth.n) throw Failure{DNMF_E_INVALID, "label files differ in length"};
    print_scores(found.p, truth.p, truth.n, literal, acc);
    return kExitOk;
  }

  dnmf_model* raw_model = nullptr;
  check(dnmf_model_load(a.factors.c_str(), &raw_model));
  Model model(raw_model);
  dnmf_matrix* raw_rep = nullptr;
  check(dnmf_model_representation(model.get(), &raw_rep));
  Matrix rep(raw_rep);
  const size_t n = dnmf_matrix_cols(rep.get());
  if (n != truth.n) throw Failure{DNMF_E_INVALID, "label count does not match the sample count"};

  int k = a.clusters;
  if (k == 0) {
    int max_label = 0;
    for (size_t i = 0; i < truth.n; ++i) max_label = std::max(max_label, truth.p[i]);
    k = max_label + 1;
  }
  std::vector<int> found(n);
  for (int r = 0; r < a.reps; ++r) {
    check(dnmf_kmeans(rep.get(), k, a.restarts, a.seed + std::uint64_t(r), found.data(), nullptr));
    std::printf("rep %d ", r);
    print_scores(found.data(), truth.p, n, literal, acc);
  }
  if (a.reps > 1) {
    std::printf("mean nmi %.6f er %.6f np %.6f\n", acc[0] / a.reps, acc[1] / a.reps,
                acc[2] / a.reps);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string kind, out;
  std::uint64_t seed = 0;
  std::optional<long long> features, samples;
  std::optional<int> classes;
  std::optional<std::string> layers, activation;
  std::optional<double> sigma, density, separation;
};

int run_synth(const SynthArgs& a) {
  Config cfg = new_config("");
  set(cfg.get(), "data.synth", a.kind);
  set_opt(cfg.get(), "data.synth.seed", std::optional<std::uint64_t>(a.seed));
  set_opt(cfg.get(), "data.synth.features", a.features);
  set_opt(cfg.get(), "data.synth.samples", a.samples);
  set_opt(cfg.get(), "data.synth.classes", a.classes);
  set_opt(cfg.get(), "data.synth.layers", a.layers);
  set_opt(cfg.get(), "data.synth.activation", a.activation);
  set_opt(cfg.get(), "data.synth.sigma", a.sigma);
  set_opt(cfg.get(), "data.synth.density", a.density);
  set_opt(cfg.get(), "data.synth.separation", a.separation);

  dnmf_dataset* raw = nullptr;
  check(dnmf_dataset_from_config(cfg.get(), &raw));
  Dataset ds(raw);
  check(dnmf_dataset_save(ds.get(), a.out.c_str()));
  const dnmf_matrix* x = dnmf_dataset_matrix(ds.get());
  std::printf("%s: %zu x %zu written to %s\n", a.kind.c_str(), dnmf_matrix_rows(x),
              dnmf_matrix_cols(x), a.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_sweep(const std::string& config, const std::string& out) {
  Config cfg = new_config(config);
  if (!out.empty()) set(cfg.get(), "output.dir", out);
  CString summary;
  check(dnmf_run_experiment(cfg.get(), &summary.p));
  const auto doc = nlohmann::json::parse(summary.p);
  for (const auto& p : doc.at("points")) {
    std::string layers;
    for (const auto& k : p.at("layers")) layers += (layers.empty() ? "" : ",") + std::to_string(k.get<long long>());
    const auto& nmi = p.at("nmi").at("mean");
    std::printf("point %zu %s [%s] ok %d failed %d nmi %s\n", p.at("point").get<std::size_t>(),
                p.at("variant").get<std::string>().c_str(), layers.c_str(),
                p.at("ok_runs").get<int>(), p.at("failed_runs").get<int>(),
                nmi.is_null() ? "-" : std::to_string(nmi.get<double>()).c_str());
  }
  return kExitOk;
}

int run_inspect(const std::string& dir, const std::string& labels, int class_id, int top) {
  CString report;
  check(dnmf_inspect(dir.c_str(), labels.empty() ? nullptr : labels.c_str(), class_id, top,
                     &report.p));
  std::fputs(report.p, stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse deep nonnegative matrix factorization"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "fit one model and write its factors");
  train->add_option("--data", ta.data, "data matrix (.csv or .bin), features x samples")->required();
  train->add_option("--labels", ta.labels, "label file (default: <stem>.labels if present)");
  train->add_option("--config", ta.config, "base config file");
  train->add_option("--layers", ta.layers, "layer sizes, e.g. 20,8");
  train->add_option("--variant", ta.variant, "dnmf, sdnmf_l, sdnmf_r, sdnmf_rl1, sdnmf_rl2");
  train->add_option("--mu", ta.mu, "W penalty (one value or one per layer)");
  train->add_option("--lambda", ta.lambda, "H penalty (one value or one per layer)");
  train->add_option("--activation", ta.activation, "linear, root, tanh, sigmoid, softplus");
  train->add_option("--projection", ta.projection, "square1 or square2");
  train->add_option("--max-iters", ta.max_iters, "inner solver iteration cap");
  train->add_option("--grad-tol", ta.grad_tol, "inner solver relative residual");
  train->add_option("--max-sweeps", ta.max_sweeps, "outer sweep cap");
  train->add_option("--rel-tol", ta.rel_tol, "outer relative objective change");
  train->add_option("--jitter", ta.jitter, "initialization jitter");
  train->add_option("--seed", ta.seed, "training seed");
  train->add_option("--out", ta.out, "output directory (default: <stem>_model)");

  EvalArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "score saved factors or a label file");
  auto* ev_factors = evaluate->add_option("--factors", ea.factors, "model directory");
  auto* ev_pred = evaluate->add_option("--pred", ea.pred, "predicted label file");
  ev_factors->excludes(ev_pred);
  evaluate->add_option("--labels", ea.labels, "ground-truth label file");
  evaluate->add_option("--clusters", ea.clusters, "k-means cluster count (default: label classes)");
  evaluate->add_option("--restarts", ea.restarts, "k-means restarts");
  evaluate->add_option("--reps", ea.reps, "k-means repetitions");
  evaluate->add_option("--seed", ea.seed, "k-means seed");
  evaluate->add_flag("--er-sqrt-only", ea.er_sqrt_only, "report the Frobenius norm without the outer root");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  synth->add_option("--kind", sa.kind, "planted_linear, planted_nonlinear, blobs")->required();
  synth->add_option("--out", sa.out, "output path (.csv or .bin)")->required();
  synth->add_option("--seed", sa.seed, "generator seed");
  synth->add_option("--features", sa.features);
  synth->add_option("--samples", sa.samples);
  synth->add_option("--classes", sa.classes);
  synth->add_option("--layers", sa.layers, "planted layer sizes");
  synth->add_option("--activation", sa.activation, "planted_nonlinear activation");
  synth->add_option("--sigma", sa.sigma, "noise level");
  synth->add_option("--density", sa.density, "nonzero probability of planted W entries");
  synth->add_option("--separation", sa.separation, "blob separation in units of sigma");

  std::string sweep_config, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "run an experiment from a config file");
  sweep->add_option("--config", sweep_config, "config file")->required();
  sweep->add_option("--out", sweep_out, "override output.dir");

  std::string ins_dir, ins_labels;
  int ins_class = -1;
  int ins_top = 5;
  auto* inspect = app.add_subcommand("inspect", "summarize saved factors");
  inspect->add_option("--factors", ins_dir, "model directory")->required();
  inspect->add_option("--class", ins_class, "class id for the drill-down");
  inspect->add_option("--top", ins_top, "entries reported per layer");
  inspect->add_option("--labels", ins_labels, "label file (default: labels.txt in the directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return kExitUsage;
  }

  try {
    if (*train) return run_train(ta);
    if (*evaluate) {
      if (ea.factors.empty() && ea.pred.empty()) {
        std::cerr << "error: evaluate needs --factors or --pred\n\n" << evaluate->help();
        return kExitUsage;
      }
      return run_evaluate(ea);
    }
    if (*synth) return run_synth(sa);
    if (*sweep) return run_sweep(sweep_config, sweep_out);
    if (*inspect) return run_inspect(ins_dir, ins_labels, ins_class, ins_top);
  } catch (const Failure& f) {
    std::cerr << "error (" << dnmf_status_name(f.status) << "): " << f.message << "\n";
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
