#include "deepnmf/metrics.hpp"

#include "deepnmf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

namespace deepnmf {

Partition Partition::from_labels(std::span<const int> raw) {
  Partition p;
  std::map<int, int> ids;
  p.labels.reserve(raw.size());
  for (int r : raw) {
    auto [it, inserted] = ids.try_emplace(r, int(ids.size()));
    p.labels.push_back(it->second);
  }
  p.n_clusters = int(ids.size());
  return p;
}

void Partition::validate() const {
  for (int id : labels) {
    if (id < 0 || id >= n_clusters) {
      throw InvalidInput("partition: cluster id " + std::to_string(id) +
                         " outside [0, " + std::to_string(n_clusters) + ")");
    }
  }
}

ConfusionMatrix ConfusionMatrix::build(const Partition& truth,
                                       const Partition& found) {
  if (truth.size() != found.size()) {
    throw InvalidInput("partitions have different sample counts (" +
                       std::to_string(truth.size()) + " vs " +
                       std::to_string(found.size()) + ")");
  }
  truth.validate();
  found.validate();
  ConfusionMatrix cm;
  cm.counts.setZero(truth.n_clusters, found.n_clusters);
  for (std::size_t s = 0; s < truth.size(); ++s) {
    ++cm.counts(truth.labels[s], found.labels[s]);
  }
  cm.row_sums.assign(truth.n_clusters, 0);
  cm.col_sums.assign(found.n_clusters, 0);
  for (int i = 0; i < truth.n_clusters; ++i) {
    for (int j = 0; j < found.n_clusters; ++j) {
      cm.row_sums[i] += cm.counts(i, j);
      cm.col_sums[j] += cm.counts(i, j);
    }
  }
  cm.total = std::int64_t(truth.size());
  return cm;
}

// ---------------------------------------------------------------------------
// k-means

namespace {

double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

struct Lloyd {
  const DenseMatrix& data;  // features x samples
  int k;

  double dist2(const Eigen::MatrixXd& centers, Index c, Index s) const {
    return (centers.col(c) - data.col(s)).squaredNorm();
  }

  Eigen::MatrixXd seed_plus_plus(std::mt19937_64& rng) const {
    const Index n = data.cols();
    Eigen::MatrixXd centers(data.rows(), k);
    Index first = Index(uniform01(rng) * double(n));
    if (first >= n) first = n - 1;
    centers.col(0) = data.col(first);
    Eigen::VectorXd d2(n);
    for (Index s = 0; s < n; ++s) d2(s) = dist2(centers, 0, s);
    for (int c = 1; c < k; ++c) {
      const double total = d2.sum();
      Index pick = 0;
      if (total > 0.0) {
        const double target = uniform01(rng) * total;
        double acc = 0.0;
        pick = n - 1;
        for (Index s = 0; s < n; ++s) {
          acc += d2(s);
          if (acc > target) {
            pick = s;
            break;
          }
        }
      } else {
        pick = Index(c) % n;
      }
      centers.col(c) = data.col(pick);
      for (Index s = 0; s < n; ++s) d2(s) = std::min(d2(s), dist2(centers, c, s));
    }
    return centers;
  }

  KMeansResult run(std::mt19937_64& rng, int max_iters) const {
    const Index n = data.cols();
    Eigen::MatrixXd centers = seed_plus_plus(rng);
    std::vector<int> assign(n, -1);
    Eigen::VectorXd own_d2(n);

    for (int it = 0; it < max_iters; ++it) {
      bool changed = false;
      for (Index s = 0; s < n; ++s) {
        int best = 0;
        double best_d = dist2(centers, 0, s);
        for (int c = 1; c < k; ++c) {
          const double d = dist2(centers, c, s);
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        own_d2(s) = best_d;
        if (assign[s] != best) {
          assign[s] = best;
          changed = true;
        }
      }

      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(data.rows(), k);
      std::vector<Index> sizes(k, 0);
      for (Index s = 0; s < n; ++s) {
        sums.col(assign[s]) += data.col(s);
        ++sizes[assign[s]];
      }
      for (int c = 0; c < k; ++c) {
        if (sizes[c] > 0) {
          centers.col(c) = sums.col(c) / double(sizes[c]);
          continue;
        }
        // Empty: move it onto the sample worst served by its centroid.
        Index far = 0;
        for (Index s = 1; s < n; ++s) {
          if (own_d2(s) > own_d2(far)) far = s;
        }
        centers.col(c) = data.col(far);
        own_d2(far) = 0.0;
        changed = true;
      }
      if (!changed) break;
    }

    KMeansResult r;
    r.partition.n_clusters = k;
    r.partition.labels.resize(n);
    for (Index s = 0; s < n; ++s) {
      int best = 0;
      double best_d = dist2(centers, 0, s);
      for (int c = 1; c < k; ++c) {
        const double d = dist2(centers, c, s);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      r.partition.labels[s] = best;
      r.wcss += best_d;
    }
    return r;
  }
};

}  // namespace

KMeansResult kmeans(const DenseMatrix& data, int k, int restarts,
                    std::uint64_t seed, int max_iters) {
  const Index n = data.cols();
  if (k < 1 || Index(k) > n) {
    throw InvalidInput("kmeans: k=" + std::to_string(k) + " must be in [1, " +
                       std::to_string(n) + "]");
  }
  if (restarts < 1) throw InvalidInput("kmeans: restarts must be >= 1");
  if (!data.allFinite()) throw InvalidInput("kmeans: non-finite data");

  const Lloyd lloyd{data, k};
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32),
                      std::uint32_t(r)};
    std::mt19937_64 rng(seq);
    KMeansResult run = lloyd.run(rng, max_iters);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return best;
}

// ---------------------------------------------------------------------------
// External scores

namespace {

bool same_grouping(const Partition& a, const Partition& b) {
  return Partition::from_labels(a.labels).labels ==
         Partition::from_labels(b.labels).labels;
}

}  // namespace

double nmi(const Partition& c, const Partition& c_star) {
  const ConfusionMatrix cm = ConfusionMatrix::build(c_star, c);
  const double total = double(cm.total);
  if (cm.total == 0) throw InvalidInput("nmi: empty partitions");

  double numer = 0.0;
  for (Index i = 0; i < cm.counts.rows(); ++i) {
    for (Index j = 0; j < cm.counts.cols(); ++j) {
      const double nij = double(cm.counts(i, j));
      if (nij == 0.0) continue;
      numer += nij * std::log(nij * total /
                              (double(cm.row_sums[i]) * double(cm.col_sums[j])));
    }
  }
  double denom = 0.0;
  for (auto ni : cm.row_sums) {
    if (ni > 0) denom += double(ni) * std::log(double(ni) / total);
  }
  for (auto nj : cm.col_sums) {
    if (nj > 0) denom += double(nj) * std::log(double(nj) / total);
  }
  if (denom == 0.0) return same_grouping(c, c_star) ? 1.0 : 0.0;
  const double value = -2.0 * numer / denom;
  return std::clamp(value, 0.0, 1.0);
}

double error_rate(const Partition& c, const Partition& c_star, bool literal) {
  if (c.size() != c_star.size()) {
    throw InvalidInput("error_rate: partitions have different sample counts");
  }
  c.validate();
  c_star.validate();
  // Entries of Z*Z*^T - ZZ^T are 0 or +-1; count the off-diagonal mismatches
  // (the diagonal always agrees).
  std::int64_t mismatches = 0;
  const std::size_t n = c.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const bool together = c.labels[a] == c.labels[b];
      const bool together_star = c_star.labels[a] == c_star.labels[b];
      if (together != together_star) ++mismatches;
    }
  }
  const double frob = std::sqrt(2.0 * double(mismatches));
  return literal ? std::sqrt(frob) : frob;
}

double naive_precision(const Partition& c, const Partition& c_star) {
  const ConfusionMatrix cm = ConfusionMatrix::build(c_star, c);
  if (cm.counts.rows() == 0) throw InvalidInput("naive_precision: no classes");
  double sum = 0.0;
  for (Index i = 0; i < cm.counts.rows(); ++i) {
    if (cm.row_sums[i] == 0) {
      throw InvalidInput("naive_precision: true class " + std::to_string(i) +
                         " is empty");
    }
    sum += double(cm.counts.row(i).maxCoeff()) / double(cm.row_sums[i]);
  }
  return sum / double(cm.counts.rows());
}

}  // namespace deepnmf
