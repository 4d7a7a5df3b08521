#include "deepnmf/deepnmf.h"

#include "deepnmf/config.hpp"
#include "deepnmf/error.hpp"
#include "deepnmf/experiment.hpp"
#include "deepnmf/inspect.hpp"
#include "deepnmf/io.hpp"
#include "deepnmf/metrics.hpp"
#include "deepnmf/nonlinear.hpp"
#include "deepnmf/store.hpp"
#include "deepnmf/synth.hpp"
#include "deepnmf/trainer.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <span>
#include <string>

using namespace deepnmf;

struct dnmf_matrix {
  DenseMatrix m;
};

struct dnmf_config {
  ExperimentConfig cfg;
};

struct dnmf_dataset {
  DatasetBundle bundle;
  dnmf_matrix x;
};

struct dnmf_model {
  ModelSpec spec;
  FactorStack stack;
  std::vector<double> trace;
  double pretrain_objective = 0.0;
  double final_objective = 0.0;
  int sweeps = 0;
};

namespace {

thread_local std::string g_last_error;

dnmf_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return DNMF_E_INVALID;
    case ErrorKind::Parse: return DNMF_E_PARSE;
    case ErrorKind::Io: return DNMF_E_IO;
    case ErrorKind::Numerical: return DNMF_E_NUMERICAL;
    case ErrorKind::Convergence: return DNMF_E_CONVERGENCE;
    case ErrorKind::Internal: return DNMF_E_INTERNAL;
  }
  return DNMF_E_INTERNAL;
}

template <class F>
dnmf_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return DNMF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DNMF_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DNMF_E_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (!p) throw InvalidInput(std::string("null argument: ") + name);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Partition partition_of(const int* labels, std::size_t n, const char* name) {
  require(labels, name);
  if (n == 0) throw InvalidInput(std::string(name) + ": no labels");
  return Partition::from_labels(std::span<const int>(labels, n));
}

MatrixFormat format_arg(const char* format, const char* path) {
  return format ? parse_matrix_format(format) : format_for_path(path);
}

}  // namespace

extern "C" {

const char* dnmf_last_error(void) { return g_last_error.c_str(); }

const char* dnmf_status_name(dnmf_status s) {
  switch (s) {
    case DNMF_OK: return "ok";
    case DNMF_E_INVALID: return "invalid-input";
    case DNMF_E_PARSE: return "parse";
    case DNMF_E_IO: return "io";
    case DNMF_E_NUMERICAL: return "numerical";
    case DNMF_E_CONVERGENCE: return "convergence";
    case DNMF_E_INTERNAL: return "internal";
  }
  return "unknown";
}

void dnmf_string_free(char* s) { std::free(s); }

// ---- matrices

dnmf_status dnmf_matrix_create(size_t rows, size_t cols, const double* row_major,
                               dnmf_matrix** out) {
  return guarded([&] {
    require(out, "out");
    if (rows == 0 || cols == 0) throw InvalidInput("matrix dimensions must be positive");
    auto* h = new dnmf_matrix{DenseMatrix::Zero(Index(rows), Index(cols))};
    if (row_major) std::memcpy(h->m.data(), row_major, rows * cols * sizeof(double));
    *out = h;
  });
}

dnmf_status dnmf_matrix_load(const char* path, const char* format, dnmf_matrix** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dnmf_matrix{load_matrix(path, format_arg(format, path))};
  });
}

dnmf_status dnmf_matrix_save(const dnmf_matrix* m, const char* path, const char* format) {
  return guarded([&] {
    require(m, "matrix");
    require(path, "path");
    save_matrix(m->m, path, format_arg(format, path));
  });
}

size_t dnmf_matrix_rows(const dnmf_matrix* m) { return m ? size_t(m->m.rows()) : 0; }
size_t dnmf_matrix_cols(const dnmf_matrix* m) { return m ? size_t(m->m.cols()) : 0; }
const double* dnmf_matrix_data(const dnmf_matrix* m) { return m ? m->m.data() : nullptr; }
void dnmf_matrix_free(dnmf_matrix* m) { delete m; }

// ---- labels

dnmf_status dnmf_labels_load(const char* path, int** out, size_t* n) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    require(n, "n");
    const Partition p = load_labels(path);
    int* buf = static_cast<int*>(std::malloc(p.size() * sizeof(int)));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, p.labels.data(), p.size() * sizeof(int));
    *out = buf;
    *n = p.size();
  });
}

dnmf_status dnmf_labels_save(const char* path, const int* labels, size_t n) {
  return guarded([&] {
    require(path, "path");
    save_labels(partition_of(labels, n, "labels"), path);
  });
}

void dnmf_labels_free(int* labels) { std::free(labels); }

// ---- config

dnmf_status dnmf_config_create(dnmf_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dnmf_config{};
  });
}

dnmf_status dnmf_config_load(const char* path, dnmf_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dnmf_config{load_config(path)};
  });
}

dnmf_status dnmf_config_set(dnmf_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
  });
}

void dnmf_config_free(dnmf_config* cfg) { delete cfg; }

// ---- datasets

namespace {

dnmf_dataset* wrap(DatasetBundle b) {
  auto* ds = new dnmf_dataset{std::move(b), {}};
  ds->x.m = ds->bundle.x.mat();
  return ds;
}

}  // namespace

dnmf_status dnmf_dataset_from_config(const dnmf_config* cfg, dnmf_dataset** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = wrap(load_dataset(cfg->cfg.data));
  });
}

dnmf_status dnmf_dataset_load(const char* path, const char* labels_path, dnmf_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = wrap(load_dataset(path, labels_path ? labels_path : ""));
  });
}

dnmf_status dnmf_dataset_save(const dnmf_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    save_dataset(ds->bundle, path);
  });
}

const dnmf_matrix* dnmf_dataset_matrix(const dnmf_dataset* ds) { return ds ? &ds->x : nullptr; }

void dnmf_dataset_labels(const dnmf_dataset* ds, const int** labels, size_t* n) {
  if (labels) *labels = nullptr;
  if (n) *n = 0;
  if (!ds || !ds->bundle.labels) return;
  if (labels) *labels = ds->bundle.labels->labels.data();
  if (n) *n = ds->bundle.labels->size();
}

void dnmf_dataset_free(dnmf_dataset* ds) { delete ds; }

// ---- models

dnmf_status dnmf_train(const dnmf_config* cfg, const dnmf_matrix* x, dnmf_model** out) {
  return guarded([&] {
    require(cfg, "config");
    require(x, "matrix");
    require(out, "out");
    const ModelSpec spec = cfg->cfg.model.build();
    const NonnegMatrix data(x->m);
    TrainResult r = train(spec, data, cfg->cfg.train);
    auto* m = new dnmf_model;
    m->spec = spec;
    m->stack = std::move(r.stack);
    m->trace = std::move(r.report.objective_trace);
    m->pretrain_objective = r.pretrain_objective;
    m->final_objective = r.report.final_objective;
    m->sweeps = r.report.sweeps_used;
    *out = m;
  });
}

size_t dnmf_model_depth(const dnmf_model* m) { return m ? m->stack.depth() : 0; }

dnmf_status dnmf_model_factor(const dnmf_model* m, char role, size_t layer, dnmf_matrix** out) {
  return guarded([&] {
    require(m, "model");
    require(out, "out");
    if (layer < 1 || layer > m->stack.depth()) {
      throw InvalidInput("layer " + std::to_string(layer) + " outside [1, " +
                         std::to_string(m->stack.depth()) + "]");
    }
    if (role == 'W' || role == 'w') {
      *out = new dnmf_matrix{m->stack.w[layer - 1].mat()};
    } else if (role == 'H' || role == 'h') {
      *out = new dnmf_matrix{m->stack.h[layer - 1].mat()};
    } else {
      throw InvalidInput("factor role must be 'W' or 'H'");
    }
  });
}

dnmf_status dnmf_model_representation(const dnmf_model* m, dnmf_matrix** out) {
  return guarded([&] {
    require(m, "model");
    require(out, "out");
    *out = new dnmf_matrix{representation(m->spec, m->stack).mat()};
  });
}

void dnmf_model_trace(const dnmf_model* m, const double** values, size_t* n) {
  if (values) *values = m ? m->trace.data() : nullptr;
  if (n) *n = m ? m->trace.size() : 0;
}

double dnmf_model_pretrain_objective(const dnmf_model* m) { return m ? m->pretrain_objective : 0.0; }
double dnmf_model_final_objective(const dnmf_model* m) { return m ? m->final_objective : 0.0; }
int dnmf_model_sweeps(const dnmf_model* m) { return m ? m->sweeps : 0; }

dnmf_status dnmf_model_save(const dnmf_model* m, const char* dir, const int* labels, size_t n) {
  return guarded([&] {
    require(m, "model");
    require(dir, "dir");
    if (labels) {
      Partition p;
      p.labels.assign(labels, labels + n);
      for (int v : p.labels) {
        if (v < 0) throw InvalidInput("labels must be >= 0");
        p.n_clusters = std::max(p.n_clusters, v + 1);
      }
      save_model(dir, m->spec, m->stack, &p);
    } else {
      save_model(dir, m->spec, m->stack);
    }
  });
}

dnmf_status dnmf_model_load(const char* dir, dnmf_model** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    SavedModel saved = load_model(dir);
    auto* m = new dnmf_model;
    m->spec = std::move(saved.spec);
    m->stack = std::move(saved.stack);
    *out = m;
  });
}

void dnmf_model_free(dnmf_model* m) { delete m; }

// ---- clustering and scores

dnmf_status dnmf_kmeans(const dnmf_matrix* data, int k, int restarts, uint64_t seed,
                        int* labels_out, double* wcss) {
  return guarded([&] {
    require(data, "data");
    require(labels_out, "labels_out");
    const KMeansResult r = kmeans(data->m, k, restarts, seed);
    std::memcpy(labels_out, r.partition.labels.data(), r.partition.size() * sizeof(int));
    if (wcss) *wcss = r.wcss;
  });
}

dnmf_status dnmf_nmi(const int* found, const int* truth, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = nmi(partition_of(found, n, "found"), partition_of(truth, n, "truth"));
  });
}

dnmf_status dnmf_error_rate(const int* found, const int* truth, size_t n, int literal,
                            double* out) {
  return guarded([&] {
    require(out, "out");
    *out = error_rate(partition_of(found, n, "found"), partition_of(truth, n, "truth"),
                      literal != 0);
  });
}

dnmf_status dnmf_naive_precision(const int* found, const int* truth, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = naive_precision(partition_of(found, n, "found"), partition_of(truth, n, "truth"));
  });
}

// ---- experiments and inspection

dnmf_status dnmf_run_experiment(const dnmf_config* cfg, char** summary_json) {
  return guarded([&] {
    require(cfg, "config");
    const ExperimentResult r = run_experiment(cfg->cfg);
    if (summary_json) *summary_json = dup_string(format_summary_json(r));
  });
}

dnmf_status dnmf_inspect(const char* dir, const char* labels_path, int class_id, int top,
                         char** report) {
  return guarded([&] {
    require(dir, "dir");
    require(report, "report");
    SavedModel model = load_model(dir);
    if (labels_path) model.labels = load_labels(labels_path);
    InspectOptions opts;
    if (class_id >= 0) opts.class_id = class_id;
    opts.top = top;
    *report = dup_string(inspect_report(model, opts));
  });
}

}  // extern "C"
