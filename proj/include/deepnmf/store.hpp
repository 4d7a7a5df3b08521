#pragma once

#include "deepnmf/metrics.hpp"
#include "deepnmf/model.hpp"

#include <filesystem>
#include <optional>

namespace deepnmf {

// On-disk model directory:
//   model.cfg              model.* keys
//   W1.bin ... WL.bin      binary matrices, 1-based layer numbers
//   H1.bin ... HL.bin
//   labels.txt             optional ground truth
struct SavedModel {
  ModelSpec spec;
  FactorStack stack;
  std::optional<Partition> labels;
};

void save_model(const std::filesystem::path& dir, const ModelSpec& spec,
                const FactorStack& stack, const Partition* labels = nullptr);

// Failures: IoError when the directory or a factor file is missing,
// ParseError on malformed files, InvalidInput when shapes do not chain.
SavedModel load_model(const std::filesystem::path& dir);

}  // namespace deepnmf
