#include "deepnmf/synth.hpp"

#include "deepnmf/error.hpp"
#include "deepnmf/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace deepnmf {

void DatasetBundle::validate() const {
  if (labels && labels->size() != std::size_t(x.cols())) {
    throw InvalidInput("dataset '" + name + "': " + std::to_string(labels->size()) +
                       " labels for " + std::to_string(x.cols()) + " samples");
  }
  if (labels) labels->validate();
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "planted_linear") return SynthKind::planted_linear;
  if (name == "planted_nonlinear") return SynthKind::planted_nonlinear;
  if (name == "blobs") return SynthKind::blobs;
  throw InvalidInput("unknown synthetic kind '" + std::string(name) + "'");
}

std::string_view to_string(SynthKind kind) noexcept {
  switch (kind) {
    case SynthKind::planted_linear: return "planted_linear";
    case SynthKind::planted_nonlinear: return "planted_nonlinear";
    case SynthKind::blobs: return "blobs";
  }
  return "?";
}

void SynthParams::validate(SynthKind kind) const {
  if (features < 1 || samples < 1) throw InvalidInput("synth: dims must be positive");
  if (classes < 1 || Index(classes) > samples) {
    throw InvalidInput("synth: classes must be in [1, samples]");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("synth: sigma must be >= 0");
  if (kind == SynthKind::blobs) {
    if (!(separation > 0.0)) throw InvalidInput("synth: separation must be > 0");
    return;
  }
  if (layer_sizes.empty()) throw InvalidInput("synth: planted kinds need layer sizes");
  Index prev = features;
  for (Index k : layer_sizes) {
    if (k < 1 || k > prev) {
      throw InvalidInput("synth: layer size " + std::to_string(k) +
                         " infeasible below a dimension of " + std::to_string(prev));
    }
    prev = k;
  }
  if (layer_sizes.back() < classes) {
    throw InvalidInput("synth: top layer size " + std::to_string(layer_sizes.back()) +
                       " is smaller than the class count " + std::to_string(classes));
  }
  if (!(density > 0.0 && density <= 1.0)) throw InvalidInput("synth: density must be in (0, 1]");
  if (kind == SynthKind::planted_nonlinear && activation == ActivationKind::linear) {
    throw InvalidInput("synth: planted_nonlinear needs an activation");
  }
}

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, SynthKind kind) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32),
                    std::uint32_t(kind), 0x5d1fu};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
}

Partition block_labels(Index samples, int classes) {
  Partition p;
  p.n_clusters = classes;
  p.labels.resize(samples);
  for (Index j = 0; j < samples; ++j) p.labels[j] = int(j * classes / samples);
  return p;
}

// Sparse nonnegative factor with at least one nonzero per column.
NonnegMatrix sparse_factor(std::mt19937_64& rng, Index rows, Index cols, double density) {
  DenseMatrix w = DenseMatrix::Zero(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    bool any = false;
    for (Index i = 0; i < rows; ++i) {
      if (uniform(rng, 0.0, 1.0) < density) {
        w(i, j) = uniform(rng, 0.1, 1.0);
        any = true;
      }
    }
    if (!any) {
      Index i = Index(uniform(rng, 0.0, double(rows)));
      if (i >= rows) i = rows - 1;
      w(i, j) = uniform(rng, 0.1, 1.0);
    }
  }
  return NonnegMatrix::adopt(std::move(w));
}

DatasetBundle planted(SynthKind kind, const SynthParams& p, std::uint64_t seed) {
  auto rng = make_rng(seed, kind);
  const Partition labels = block_labels(p.samples, p.classes);

  ModelSpec spec = make_spec(Variant::DNMF, p.layer_sizes, 0.0, 0.0);
  if (kind == SynthKind::planted_nonlinear) {
    spec.activation = p.activation;
    spec.projection = ProjectionMode::square1;
  }
  FactorStack stack;
  Index rows = p.features;
  for (Index k : p.layer_sizes) {
    stack.w.push_back(sparse_factor(rng, rows, k, p.density));
    rows = k;
  }

  // Top-layer rows are dealt round-robin to classes; a sample only loads on
  // the rows of its own class.
  const Index top = p.layer_sizes.back();
  DenseMatrix h = DenseMatrix::Zero(top, p.samples);
  for (Index j = 0; j < p.samples; ++j) {
    for (Index r = 0; r < top; ++r) {
      if (int(r % p.classes) == labels.labels[j]) h(r, j) = uniform(rng, 0.8, 1.2);
    }
  }
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    stack.h.push_back(NonnegMatrix::zeros(p.layer_sizes[l], p.samples));
  }
  stack.h.push_back(NonnegMatrix::adopt(std::move(h)));

  DenseMatrix x = reconstruct(spec, stack);
  if (p.sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, p.sigma);
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < x.cols(); ++j) x(i, j) += std::abs(noise(rng));
    }
  }
  DatasetBundle b{project_nonneg(x), labels, std::string(to_string(kind))};
  return b;
}

DatasetBundle blobs(const SynthParams& p, std::uint64_t seed) {
  auto rng = make_rng(seed, SynthKind::blobs);
  const Partition labels = block_labels(p.samples, p.classes);
  const double step = p.separation * p.sigma;
  // Offset keeps the clusters clear of the clipping boundary.
  const double base = 4.0 * p.sigma;

  DenseMatrix centers = DenseMatrix::Constant(p.features, p.classes, base);
  for (int c = 0; c < p.classes; ++c) {
    centers(c % p.features, c) += step * double(1 + c / p.features);
  }
  std::normal_distribution<double> noise(0.0, p.sigma > 0.0 ? p.sigma : 1.0);
  DenseMatrix x(p.features, p.samples);
  for (Index j = 0; j < p.samples; ++j) {
    for (Index i = 0; i < p.features; ++i) {
      const double e = p.sigma > 0.0 ? noise(rng) : 0.0;
      x(i, j) = std::max(0.0, centers(i, labels.labels[j]) + e);
    }
  }
  // sigma = 0 collapses every blob onto its centre; centres still differ.
  if (p.sigma == 0.0) {
    for (Index j = 0; j < p.samples; ++j) x(labels.labels[j] % p.features, j) += 1.0 + labels.labels[j] / p.features;
  }
  return DatasetBundle{NonnegMatrix::adopt(std::move(x)), labels, "blobs"};
}

}  // namespace

DatasetBundle synth_generate(SynthKind kind, const SynthParams& params,
                             std::uint64_t seed) {
  params.validate(kind);
  DatasetBundle b = kind == SynthKind::blobs ? blobs(params, seed)
                                             : planted(kind, params, seed);
  b.validate();
  return b;
}

}  // namespace deepnmf

namespace deepnmf {

std::filesystem::path labels_path_for(const std::filesystem::path& data) {
  std::filesystem::path p = data;
  p.replace_extension(".labels");
  return p;
}

void save_dataset(const DatasetBundle& b, const std::filesystem::path& path) {
  b.validate();
  save_matrix(b.x.mat(), path, format_for_path(path));
  if (b.labels) save_labels(*b.labels, labels_path_for(path));
}

DatasetBundle load_dataset(const std::filesystem::path& path,
                           const std::filesystem::path& labels,
                           std::optional<MatrixFormat> format) {
  DatasetBundle b;
  b.x = load_nonneg_matrix(path, format.value_or(format_for_path(path)));
  b.name = path.stem().string();
  if (!labels.empty()) {
    b.labels = load_labels(labels);
  } else if (std::filesystem::exists(labels_path_for(path))) {
    b.labels = load_labels(labels_path_for(path));
  }
  b.validate();
  return b;
}

}  // namespace deepnmf
