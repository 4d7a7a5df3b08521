#pragma once

#include "deepnmf/metrics.hpp"
#include "deepnmf/store.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace deepnmf {

// One level of the feature-hierarchy drill-down. layer is 0-based; for the
// first step `column` is -1 and `top` ranks the class-mean top-layer
// coefficients, later steps rank the entries of column `column` of W_layer.
struct DrillStep {
  std::size_t layer = 0;
  bool from_h = false;
  Index column = -1;
  std::vector<std::pair<Index, double>> top;
};

// Starting from the mean top-layer representation of the samples in
// class_id, repeatedly follow the strongest index down through W_L ... W_1.
// Ties rank the lower index first.
std::vector<DrillStep> drill_down(const FactorStack& stack, const Partition& labels,
                                  int class_id, int top);

struct InspectOptions {
  std::optional<int> class_id;
  int top = 5;
};

// Shapes, near-zero fractions and column L1 norms per layer, plus the
// drill-down when a class is given (needs saved or supplied labels).
std::string inspect_report(const SavedModel& model, const InspectOptions& opts);

}  // namespace deepnmf
