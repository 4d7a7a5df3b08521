#pragma once

#include "deepnmf/linalg.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace deepnmf {

// Cluster assignment, one id in [0, n_clusters) per sample.
struct Partition {
  std::vector<int> labels;
  int n_clusters = 0;

  std::size_t size() const noexcept { return labels.size(); }

  // Relabels arbitrary integer ids to 0..k-1 in order of first appearance.
  static Partition from_labels(std::span<const int> raw);
  // Throws InvalidInput if an id is outside [0, n_clusters).
  void validate() const;
};

// counts(i, j): samples in true class i and obtained cluster j.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t total = 0;

  static ConfusionMatrix build(const Partition& truth, const Partition& found);
};

struct KMeansResult {
  Partition partition;
  double wcss = 0.0;
};

// Lloyd's algorithm with k-means++ seeding on the columns of `data`; keeps the
// restart with the lowest within-cluster sum of squares (ties: earliest).
// Empty clusters are re-seeded at the point farthest from its centroid.
KMeansResult kmeans(const DenseMatrix& data, int k, int restarts,
                    std::uint64_t seed, int max_iters = 300);

// Normalized mutual information with natural logarithms. When both
// partitions have a single cluster the ratio is undefined: 1 if the
// partitions coincide, else 0.
double nmi(const Partition& c, const Partition& c_star);

// sqrt(||Z* Z*^T - Z Z^T||_F) over 0/1 indicator matrices; with
// literal = false the outer square root is dropped.
double error_rate(const Partition& c, const Partition& c_star,
                  bool literal = true);

// Mean over true classes of (largest overlap with a found cluster) / class
// size. Throws InvalidInput on an empty true class.
double naive_precision(const Partition& c, const Partition& c_star);

}  // namespace deepnmf
