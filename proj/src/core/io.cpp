#include "deepnmf/io.hpp"

#include "deepnmf/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace deepnmf {

namespace fs = std::filesystem;

MatrixFormat parse_matrix_format(std::string_view name) {
  if (name == "csv") return MatrixFormat::csv;
  if (name == "bin") return MatrixFormat::bin;
  throw InvalidInput("unknown matrix format '" + std::string(name) + "'");
}

MatrixFormat format_for_path(const fs::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::csv : MatrixFormat::bin;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  // strtod accepts the same spellings the writer produces (including "inf").
  std::string buf(cell);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

DenseMatrix load_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    if (trim(line).empty()) {
      if (eol == text.size()) break;
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t col = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell =
          line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                             : comma - start);
      ++col;
      double v = 0.0;
      if (!parse_double(cell, v)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": non-numeric cell " + std::to_string(col) + " '" +
                             std::string(trim(cell)) + "'",
                         line_no);
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": expected " + std::to_string(rows.front().size()) +
                           " cells, found " + std::to_string(row.size()),
                       line_no);
    }
    rows.push_back(std::move(row));
    if (eol == text.size()) break;
  }
  if (rows.empty()) throw ParseError(path.string() + ": empty matrix", 0);

  DenseMatrix m(Index(rows.size()), Index(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

template <class T>
T read_le(const std::string& bytes, std::size_t offset) {
  std::array<unsigned char, sizeof(T)> raw;
  std::memcpy(raw.data(), bytes.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

template <class T>
void write_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> raw;
  std::memcpy(raw.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  out.write(reinterpret_cast<const char*>(raw.data()), sizeof(T));
}

constexpr std::size_t kHeaderBytes = 6 + 4 + 4;

DenseMatrix load_bin(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kBinMagic.size() ||
      std::string_view(bytes.data(), kBinMagic.size()) != kBinMagic) {
    throw ParseError(path.string() + ": bad magic at byte 0 (expected SDNMF1)", 0);
  }
  if (bytes.size() < kHeaderBytes) {
    throw ParseError(path.string() + ": truncated header, expected " +
                         std::to_string(kHeaderBytes) + " bytes, found " +
                         std::to_string(bytes.size()),
                     bytes.size());
  }
  const auto rows = read_le<std::uint32_t>(bytes, 6);
  const auto cols = read_le<std::uint32_t>(bytes, 10);
  const std::uint64_t expected = std::uint64_t(rows) * cols * 8;
  const std::uint64_t found = bytes.size() - kHeaderBytes;
  if (expected != found) {
    throw ParseError(path.string() + ": payload size mismatch at byte " +
                         std::to_string(kHeaderBytes) + ": expected " +
                         std::to_string(expected) + " bytes, found " +
                         std::to_string(found),
                     kHeaderBytes);
  }
  if (rows == 0 || cols == 0) throw ParseError(path.string() + ": empty matrix", 6);

  DenseMatrix m(rows, cols);
  std::size_t offset = kHeaderBytes;
  for (Index j = 0; j < Index(cols); ++j) {
    for (Index i = 0; i < Index(rows); ++i) {
      m(i, j) = read_le<double>(bytes, offset);
      offset += 8;
    }
  }
  return m;
}

}  // namespace

DenseMatrix load_matrix(const fs::path& path, MatrixFormat format) {
  return format == MatrixFormat::csv ? load_csv(path) : load_bin(path);
}

NonnegMatrix load_nonneg_matrix(const fs::path& path, MatrixFormat format) {
  DenseMatrix m = load_matrix(path, format);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (v < 0.0 || !std::isfinite(v)) {
        std::size_t location = 0;
        std::string where;
        if (format == MatrixFormat::csv) {
          location = std::size_t(i) + 1;
          where = "line " + std::to_string(location) + ", cell " + std::to_string(j + 1);
        } else {
          location = kHeaderBytes + 8 * std::size_t(j * m.rows() + i);
          where = "byte " + std::to_string(location);
        }
        throw ParseError(path.string() + ": entry " + std::to_string(v) + " at " +
                             where + " is not a finite nonnegative value",
                         location);
      }
    }
  }
  return NonnegMatrix::adopt(std::move(m));
}

void save_matrix(const DenseMatrix& m, const fs::path& path, MatrixFormat format) {
  if (m.rows() > 0xFFFFFFFFLL || m.cols() > 0xFFFFFFFFLL) {
    throw InvalidInput("save_matrix: dimensions exceed 32 bits");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  if (format == MatrixFormat::csv) {
    out << std::setprecision(17);
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        if (j) out << ',';
        out << m(i, j);
      }
      out << '\n';
    }
  } else {
    out.write(kBinMagic.data(), std::streamsize(kBinMagic.size()));
    write_le<std::uint32_t>(out, std::uint32_t(m.rows()));
    write_le<std::uint32_t>(out, std::uint32_t(m.cols()));
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) write_le<double>(out, m(i, j));
    }
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Partition load_labels(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<int> raw;
  std::size_t line_no = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') ++line_no;
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
    if (ec != std::errc() || (ptr < text.data() + text.size() &&
                              !std::isspace(static_cast<unsigned char>(*ptr)) && *ptr != ',')) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": label is not an integer",
                       line_no);
    }
    raw.push_back(value);
    i = std::size_t(ptr - text.data());
  }
  if (raw.empty()) throw ParseError(path.string() + ": no labels", 0);
  for (int v : raw) {
    if (v < 0) throw ParseError(path.string() + ": negative label", 0);
  }
  Partition p;
  p.labels = std::move(raw);
  p.n_clusters = *std::max_element(p.labels.begin(), p.labels.end()) + 1;
  return p;
}

void save_labels(const Partition& p, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (int v : p.labels) out << v << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace deepnmf
