#pragma once

#include "deepnmf/linalg.hpp"
#include "deepnmf/metrics.hpp"

#include <filesystem>
#include <string_view>

namespace deepnmf {

enum class MatrixFormat { csv, bin };

MatrixFormat parse_matrix_format(std::string_view name);
// From the file extension: ".csv" is CSV, anything else binary.
MatrixFormat format_for_path(const std::filesystem::path& path);

// Binary layout (little-endian throughout):
//   bytes 0-5   magic "SDNMF1"
//   u32         rows
//   u32         cols
//   f64 * rows*cols, column-major
inline constexpr std::string_view kBinMagic = "SDNMF1";

// CSV: one matrix row per line, comma-separated, no header.
//
// Failures: IoError (cannot open), ParseError (bad magic, truncated payload,
// non-numeric cell, ragged rows) with the line or byte offset attached.
DenseMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);

// As load_matrix, additionally rejecting negative entries (ParseError naming
// the location of the first one).
NonnegMatrix load_nonneg_matrix(const std::filesystem::path& path,
                                MatrixFormat format);

void save_matrix(const DenseMatrix& m, const std::filesystem::path& path,
                 MatrixFormat format);

// Label files: whitespace- or comma-separated integers.
Partition load_labels(const std::filesystem::path& path);
void save_labels(const Partition& p, const std::filesystem::path& path);

}  // namespace deepnmf
