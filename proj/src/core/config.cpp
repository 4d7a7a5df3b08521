#include "deepnmf/config.hpp"

#include "deepnmf/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace deepnmf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.size() - start
                                                                     : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw InvalidInput("config: bad value '" + std::string(value) + "' for " + std::string(key));
}

template <class T>
T parse_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text);
  return v;
}

double parse_real(std::string_view key, std::string_view text) {
  text = trim(text);
  std::string buf(text);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v)) bad_value(key, text);
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad_value(key, text);
}

std::vector<double> parse_real_list(std::string_view key, std::string_view text, char sep) {
  std::vector<double> out;
  for (auto part : split(text, sep)) out.push_back(parse_real(key, part));
  return out;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_real_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_real(v[i]);
  }
  return out;
}

}  // namespace

std::vector<Index> parse_index_list(std::string_view text) {
  std::vector<Index> out;
  for (auto part : split(text, ',')) {
    if (part.empty()) throw InvalidInput("empty entry in list '" + std::string(text) + "'");
    out.push_back(parse_integer<Index>("list", part));
  }
  return out;
}

std::string format_index_list(const std::vector<Index>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

ModelSpec ModelParams::build() const {
  auto expand = [&](const std::vector<double>& v, const char* name) {
    if (v.size() == 1) return std::vector<double>(layers.size(), v.front());
    if (v.size() != layers.size()) {
      throw InvalidInput(std::string("config: model.") + name + " has " +
                         std::to_string(v.size()) + " entries for " +
                         std::to_string(layers.size()) + " layers");
    }
    return v;
  };
  ModelSpec spec;
  spec.variant = variant;
  spec.layer_sizes = layers;
  spec.mu = expand(mu, "mu");
  spec.lambda = expand(lambda, "lambda");
  spec.activation = activation;
  spec.projection = projection.value_or(activation == ActivationKind::linear
                                            ? ProjectionMode::none
                                            : ProjectionMode::square1);
  spec.validate();
  return spec;
}

ExperimentConfig::ExperimentConfig() {
  // Repetitions differ only through the jittered initialization.
  train.init_jitter = 0.05;
}

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  const std::string k(trim(key));

  // model
  if (k == "model.variant") model.variant = parse_variant(value);
  else if (k == "model.layers") model.layers = parse_index_list(value);
  else if (k == "model.mu") model.mu = parse_real_list(k, value, ',');
  else if (k == "model.lambda") model.lambda = parse_real_list(k, value, ',');
  else if (k == "model.activation") model.activation = parse_activation(value);
  else if (k == "model.projection") model.projection = parse_projection(value);
  // train
  else if (k == "train.max_iters") train.inner.max_iters = parse_integer<int>(k, value);
  else if (k == "train.grad_tol") train.inner.grad_tol = parse_real(k, value);
  else if (k == "train.max_sweeps") train.outer.max_sweeps = parse_integer<int>(k, value);
  else if (k == "train.rel_tol") train.outer.rel_obj_tol = parse_real(k, value);
  else if (k == "train.seed") train.seed = parse_integer<std::uint64_t>(k, value);
  else if (k == "train.init_jitter") train.init_jitter = parse_real(k, value);
  // eval
  else if (k == "eval.kmeans_restarts") eval.kmeans_restarts = parse_integer<int>(k, value);
  else if (k == "eval.model_reps") eval.model_reps = parse_integer<int>(k, value);
  else if (k == "eval.kmeans_reps") eval.kmeans_reps = parse_integer<int>(k, value);
  else if (k == "eval.seed") eval.seed = parse_integer<std::uint64_t>(k, value);
  else if (k == "eval.clusters") eval.clusters = parse_integer<int>(k, value);
  else if (k == "eval.er_literal") eval.er_literal = parse_bool(k, value);
  // data
  else if (k == "data.path") data.path = std::string(value);
  else if (k == "data.labels") data.labels = std::string(value);
  else if (k == "data.format") data.format = parse_matrix_format(value);
  else if (k == "data.synth") data.synth_kind = parse_synth_kind(value);
  else if (k == "data.synth.features") data.synth.features = parse_integer<Index>(k, value);
  else if (k == "data.synth.samples") data.synth.samples = parse_integer<Index>(k, value);
  else if (k == "data.synth.layers") data.synth.layer_sizes = parse_index_list(value);
  else if (k == "data.synth.classes") data.synth.classes = parse_integer<int>(k, value);
  else if (k == "data.synth.sigma") data.synth.sigma = parse_real(k, value);
  else if (k == "data.synth.density") data.synth.density = parse_real(k, value);
  else if (k == "data.synth.activation") data.synth.activation = parse_activation(value);
  else if (k == "data.synth.separation") data.synth.separation = parse_real(k, value);
  else if (k == "data.synth.seed") data.synth_seed = parse_integer<std::uint64_t>(k, value);
  // sweep
  else if (k == "sweep.layers") {
    sweep.layers.clear();
    for (auto part : split(value, ';')) sweep.layers.push_back(parse_index_list(part));
  } else if (k == "sweep.mu") sweep.mu = parse_real_list(k, value, ';');
  else if (k == "sweep.lambda") sweep.lambda = parse_real_list(k, value, ';');
  else if (k == "sweep.activation") {
    sweep.activation.clear();
    for (auto part : split(value, ';')) sweep.activation.push_back(parse_activation(part));
  } else if (k == "sweep.projection") {
    sweep.projection.clear();
    for (auto part : split(value, ';')) sweep.projection.push_back(parse_projection(part));
  } else if (k == "sweep.cap") sweep.cap = parse_integer<std::size_t>(k, value);
  else if (k == "sweep.random.count") sweep.random.count = parse_integer<int>(k, value);
  else if (k == "sweep.random.depth") sweep.random.depth = parse_integer<int>(k, value);
  else if (k == "sweep.random.last") sweep.random.last = parse_integer<Index>(k, value);
  else if (k == "sweep.random.max") sweep.random.max = parse_integer<Index>(k, value);
  else if (k == "sweep.random.p") sweep.random.p = parse_real(k, value);
  else if (k == "sweep.random.seed") sweep.random.seed = parse_integer<std::uint64_t>(k, value);
  // output
  else if (k == "output.dir") output.dir = std::string(value);
  else if (k == "output.dump_factors") output.dump_factors = parse_bool(k, value);
  else if (k == "output.timing") output.timing = parse_bool(k, value);
  else throw InvalidInput("config: unknown key '" + k + "'");
}

void ExperimentConfig::validate() const {
  (void)model.build();
  train.validate();
  if (eval.kmeans_restarts < 1 || eval.model_reps < 1 || eval.kmeans_reps < 1) {
    throw InvalidInput("config: eval repetition counts must be >= 1");
  }
  if (eval.clusters < 0) throw InvalidInput("config: eval.clusters must be >= 0");
  if (sweep.cap < 1) throw InvalidInput("config: sweep.cap must be >= 1");
  const auto& r = sweep.random;
  if (r.count < 0 || r.depth < 0 || r.last < 0 || r.max < 0) {
    throw InvalidInput("config: sweep.random fields must be >= 0");
  }
  if (r.count > 0 && !(r.p > 0.0 && r.p < 1.0)) {
    throw InvalidInput("config: sweep.random.p must be in (0, 1)");
  }
  if (r.count > 0 && !sweep.layers.empty()) {
    throw InvalidInput("config: sweep.layers and sweep.random.count are exclusive");
  }
  for (const auto& layers : sweep.layers) {
    if (layers.empty()) throw InvalidInput("config: empty layer list in sweep.layers");
  }
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      throw ParseError(where + ": expected 'key = value'", line_no);
    }
    try {
      cfg.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw ParseError(where + ": " + e.what(), line_no);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "': file not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string format_model_keys(const ModelSpec& spec) {
  std::string out;
  out += "model.variant = " + std::string(to_string(spec.variant)) + "\n";
  out += "model.layers = " + format_index_list(spec.layer_sizes) + "\n";
  out += "model.mu = " + format_real_list(spec.mu) + "\n";
  out += "model.lambda = " + format_real_list(spec.lambda) + "\n";
  out += "model.activation = " + std::string(to_string(spec.activation)) + "\n";
  out += "model.projection = " + std::string(to_string(spec.projection)) + "\n";
  return out;
}

ModelSpec parse_model_keys(std::string_view text, std::string_view source) {
  return parse_config(text, source).model.build();
}

}  // namespace deepnmf
