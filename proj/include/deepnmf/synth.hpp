#pragma once

#include "deepnmf/activation.hpp"
#include "deepnmf/io.hpp"
#include "deepnmf/linalg.hpp"
#include "deepnmf/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepnmf {

// A data matrix (features x samples) with optional ground-truth classes.
struct DatasetBundle {
  NonnegMatrix x;
  std::optional<Partition> labels;
  std::string name;

  // Throws InvalidInput when the label count does not match x.cols().
  void validate() const;
};

enum class SynthKind { planted_linear, planted_nonlinear, blobs };

SynthKind parse_synth_kind(std::string_view name);
std::string_view to_string(SynthKind kind) noexcept;

struct SynthParams {
  Index features = 50;
  Index samples = 200;
  std::vector<Index> layer_sizes{20, 8};  // planted kinds only
  int classes = 8;
  double sigma = 0.01;
  // Probability that an entry of a planted W_l is nonzero.
  double density = 0.5;
  // Planted nonlinear kind: X = W_1 g^{-1}(W_2 ... g^{-1}(W_L H_L)).
  ActivationKind activation = ActivationKind::root;
  // Blobs: distance between neighbouring centres, in units of sigma.
  double separation = 10.0;

  void validate(SynthKind kind) const;
};

// Deterministic in (kind, params, seed). Sample j belongs to class
// floor(j * classes / samples).
//
// planted_*: sparse nonnegative W_l, block-structured top H (each class owns
// a group of top-layer rows), plus |N(0, sigma^2)| noise.
// blobs: axis-aligned Gaussian clusters, clipped at zero.
DatasetBundle synth_generate(SynthKind kind, const SynthParams& params,
                             std::uint64_t seed);

}  // namespace deepnmf

namespace deepnmf {

// Label file stored next to a data file: same stem, ".labels" extension.
std::filesystem::path labels_path_for(const std::filesystem::path& data);

// Writes x (format from the extension) and, when present, the labels file
// next to it.
void save_dataset(const DatasetBundle& b, const std::filesystem::path& path);

// Loads x as a nonnegative matrix. Labels come from `labels` when given,
// else from labels_path_for(path) if that file exists.
DatasetBundle load_dataset(const std::filesystem::path& path,
                           const std::filesystem::path& labels = {},
                           std::optional<MatrixFormat> format = std::nullopt);

}  // namespace deepnmf
