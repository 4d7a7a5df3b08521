#include "deepnmf/store.hpp"

#include "deepnmf/config.hpp"
#include "deepnmf/error.hpp"
#include "deepnmf/io.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace deepnmf {

namespace fs = std::filesystem;

namespace {

fs::path factor_path(const fs::path& dir, char role, std::size_t layer) {
  return dir / (std::string(1, role) + std::to_string(layer + 1) + ".bin");
}

}  // namespace

void save_model(const fs::path& dir, const ModelSpec& spec, const FactorStack& stack,
                const Partition* labels) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  {
    std::ofstream out(dir / "model.cfg", std::ios::trunc);
    if (!out) throw IoError("cannot write '" + (dir / "model.cfg").string() + "'");
    out << format_model_keys(spec);
  }
  for (std::size_t l = 0; l < stack.depth(); ++l) {
    save_matrix(stack.w[l].mat(), factor_path(dir, 'W', l), MatrixFormat::bin);
    save_matrix(stack.h[l].mat(), factor_path(dir, 'H', l), MatrixFormat::bin);
  }
  if (labels) save_labels(*labels, dir / "labels.txt");
}

SavedModel load_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("model directory '" + dir.string() + "' not found");
  const fs::path cfg_path = dir / "model.cfg";
  std::ifstream in(cfg_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + cfg_path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();

  SavedModel m;
  m.spec = parse_model_keys(ss.str(), cfg_path.string());
  for (std::size_t l = 0; l < m.spec.depth(); ++l) {
    m.stack.w.push_back(load_nonneg_matrix(factor_path(dir, 'W', l), MatrixFormat::bin));
    m.stack.h.push_back(load_nonneg_matrix(factor_path(dir, 'H', l), MatrixFormat::bin));
  }
  m.stack.check(m.spec, m.stack.w.front().rows(), m.stack.h.back().cols());
  if (fs::exists(dir / "labels.txt")) m.labels = load_labels(dir / "labels.txt");
  return m;
}

}  // namespace deepnmf
