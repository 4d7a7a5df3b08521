#include "deepnmf/inspect.hpp"

#include "deepnmf/config.hpp"
#include "deepnmf/error.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace deepnmf {

namespace {

std::vector<std::pair<Index, double>> top_entries(const Eigen::VectorXd& v, int q) {
  std::vector<Index> order(v.size());
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return v(a) > v(b); });
  order.resize(std::min<std::size_t>(order.size(), std::size_t(q)));
  std::vector<std::pair<Index, double>> out;
  for (Index i : order) out.emplace_back(i, v(i));
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::vector<DrillStep> drill_down(const FactorStack& stack, const Partition& labels,
                                  int class_id, int top) {
  if (top < 1) throw InvalidInput("inspect: top must be >= 1");
  if (stack.depth() == 0) throw InvalidInput("inspect: empty factor stack");
  const DenseMatrix& h = stack.h.back().mat();
  if (labels.size() != std::size_t(h.cols())) {
    throw InvalidInput("inspect: " + std::to_string(labels.size()) + " labels for " +
                       std::to_string(h.cols()) + " samples");
  }
  if (class_id < 0 || class_id >= labels.n_clusters) {
    throw InvalidInput("inspect: class " + std::to_string(class_id) + " outside [0, " +
                       std::to_string(labels.n_clusters) + ")");
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(h.rows());
  Index members = 0;
  for (Index j = 0; j < h.cols(); ++j) {
    if (labels.labels[j] != class_id) continue;
    mean += h.col(j);
    ++members;
  }
  if (members == 0) throw InvalidInput("inspect: class " + std::to_string(class_id) + " is empty");
  mean /= double(members);

  std::vector<DrillStep> steps;
  const std::size_t depth = stack.depth();
  steps.push_back({depth - 1, true, -1, top_entries(mean, top)});
  Index selected = steps.back().top.front().first;
  for (std::size_t l = depth; l-- > 0;) {
    const Eigen::VectorXd col = stack.w[l].mat().col(selected);
    steps.push_back({l, false, selected, top_entries(col, top)});
    selected = steps.back().top.front().first;
  }
  return steps;
}

std::string inspect_report(const SavedModel& model, const InspectOptions& opts) {
  const ModelSpec& spec = model.spec;
  const FactorStack& stack = model.stack;
  std::string out;
  out += "model " + std::string(to_string(spec.variant)) + " layers " +
         format_index_list(spec.layer_sizes) + " activation " +
         std::string(to_string(spec.activation)) + " projection " +
         std::string(to_string(spec.projection)) + "\n";
  for (std::size_t l = 0; l < stack.depth(); ++l) {
    const DenseMatrix& w = stack.w[l].mat();
    const DenseMatrix& h = stack.h[l].mat();
    out += "layer " + std::to_string(l + 1) + ": W " + std::to_string(w.rows()) + "x" +
           std::to_string(w.cols()) + " near-zero " + fmt("%.4f", near_zero_fraction(w)) +
           ", H " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
           " near-zero " + fmt("%.4f", near_zero_fraction(h)) + "\n";
    const Eigen::RowVectorXd l1 = w.colwise().sum();
    out += "  W column L1: min " + fmt("%.6g", l1.minCoeff()) + " mean " +
           fmt("%.6g", l1.mean()) + " max " + fmt("%.6g", l1.maxCoeff()) + "\n  profile";
    for (Index j = 0; j < l1.size(); ++j) out += " " + fmt("%.4g", l1(j));
    out += "\n";
  }
  if (opts.class_id) {
    if (!model.labels) {
      throw InvalidInput("inspect: class drill-down needs labels (labels.txt or --labels)");
    }
    out += "drill-down class " + std::to_string(*opts.class_id) + " top " +
           std::to_string(opts.top) + "\n";
    for (const DrillStep& s : drill_down(stack, *model.labels, *opts.class_id, opts.top)) {
      if (s.from_h) {
        out += "  H" + std::to_string(s.layer + 1) + " class mean:";
      } else {
        out += "  W" + std::to_string(s.layer + 1) + " column " + std::to_string(s.column) + ":";
      }
      for (const auto& [i, v] : s.top) out += " " + std::to_string(i) + "(" + fmt("%.4g", v) + ")";
      out += "\n";
    }
  }
  return out;
}

}  // namespace deepnmf
