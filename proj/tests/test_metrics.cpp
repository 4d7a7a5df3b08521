#include "deepnmf/error.hpp"
#include "deepnmf/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace deepnmf;

namespace {

Partition part(std::vector<int> raw) { return Partition::from_labels(raw); }

bool has_empty_class(const std::vector<int>& labels) {
  std::set<int> used(labels.begin(), labels.end());
  return int(used.size()) != *used.rbegin() + 1;
}

}  // namespace

TEST_CASE("Partition relabels by first appearance") {
  const Partition p = part({7, 7, 2, 9, 2});
  CHECK(p.labels == std::vector<int>{0, 0, 1, 2, 1});
  CHECK(p.n_clusters == 3);
  Partition bad{{0, 3}, 2};
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("confusion matrix marginals") {
  const ConfusionMatrix cm = ConfusionMatrix::build(part({0, 0, 1, 1, 1}), part({0, 1, 1, 1, 0}));
  CHECK(cm.counts.sum() == cm.total);
  CHECK(cm.total == 5);
  for (Index i = 0; i < cm.counts.rows(); ++i) CHECK(cm.counts.row(i).sum() == cm.row_sums[i]);
  for (Index j = 0; j < cm.counts.cols(); ++j) CHECK(cm.counts.col(j).sum() == cm.col_sums[j]);
  CHECK_THROWS_AS(ConfusionMatrix::build(part({0, 1}), part({0, 1, 1})), InvalidInput);
}

TEST_CASE("worked examples") {
  const Partition star = part({1, 1, 2, 2});
  CHECK(nmi(part({2, 2, 1, 1}), star) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nmi(part({1, 2, 1, 2}), star) == doctest::Approx(0.0));
  const std::vector<int> c{1, 2, 2, 2}, cs{1, 1, 2, 2};
  CHECK(nmi(part(c), star) == doctest::Approx(oracle::nmi(c, cs)).epsilon(1e-14));
  CHECK(error_rate(part(c), star) == doctest::Approx(std::pow(6.0, 0.25)).epsilon(1e-14));
  CHECK(error_rate(part(c), star, false) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14));
  CHECK(naive_precision(part(c), star) == 0.75);
}

TEST_CASE("NP inflates when everything lands in one cluster") {
  CHECK(naive_precision(part({0, 0, 0, 0}), part({0, 0, 1, 1})) == 1.0);
}

TEST_CASE("NMI degenerate single-cluster case") {
  CHECK(nmi(part({5, 5, 5}), part({0, 0, 0})) == 1.0);
  CHECK(nmi(Partition{{0, 0, 0}, 2}, Partition{{1, 1, 1}, 2}) == 1.0);
}

TEST_CASE("naive precision rejects an empty true class") {
  const Partition truth{{0, 0, 2}, 3};
  CHECK_THROWS_AS(naive_precision(part({0, 1, 1}), truth), InvalidInput);
}

TEST_CASE("metrics agree with brute force over all small partitions") {
  long compared = 0;
  for (int n = 1; n <= 6; ++n) {
    for (int k = 1; k <= 3; ++k) {
      const auto all = oracle::all_labelings(n, k);
      for (const auto& c : all) {
        for (const auto& cs : all) {
          const Partition pc{c, k};
          const Partition ps{cs, k};
          const double ref_nmi = oracle::nmi(c, cs);
          if (std::isnan(ref_nmi)) {
            // Both sides are a single cluster.
            CHECK(nmi(pc, ps) == 1.0);
          } else {
            CHECK(std::abs(nmi(pc, ps) - ref_nmi) <= 1e-12);
          }
          CHECK(std::abs(error_rate(pc, ps) - oracle::error_rate(c, cs)) <= 1e-12);
          if (!has_empty_class(cs)) {
            CHECK(std::abs(naive_precision(pc, part(cs)) - oracle::naive_precision(c, cs)) <= 1e-12);
          }
          ++compared;
        }
      }
    }
  }
  CHECK(compared > 500000);
}

TEST_CASE("metric invariants") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 12;
    std::vector<int> a(n), b(n);
    for (int s = 0; s < n; ++s) {
      a[s] = int(rng() % 4);
      b[s] = int(rng() % 3);
    }
    // Relabel a by a fixed permutation of ids.
    std::vector<int> a_perm(n);
    for (int s = 0; s < n; ++s) a_perm[s] = (a[s] * 3 + 1) % 4;
    const Partition pa = part(a), pb = part(b), pp = part(a_perm);
    CHECK(nmi(pa, pb) == doctest::Approx(nmi(pp, pb)).epsilon(1e-13));
    CHECK(error_rate(pa, pb) == doctest::Approx(error_rate(pp, pb)).epsilon(1e-13));
    CHECK(naive_precision(pa, pb) == doctest::Approx(naive_precision(pp, pb)).epsilon(1e-13));
    CHECK(nmi(pa, pb) == doctest::Approx(nmi(pb, pa)).epsilon(1e-13));
    CHECK(error_rate(pa, pb) == error_rate(pb, pa));
    const double v = nmi(pa, pb);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (pa.n_clusters >= 2) {
      CHECK(nmi(pa, pa) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(error_rate(pa, pa) == 0.0);
      CHECK(naive_precision(pa, pa) == 1.0);
    }
  }
}

TEST_CASE("NMI does not depend on the log base") {
  const std::vector<int> c{0, 1, 1, 2, 2, 0, 1}, cs{0, 0, 1, 1, 2, 2, 2};
  const double e = oracle::nmi(c, cs);
  CHECK(oracle::nmi(c, cs, 2.0) == doctest::Approx(e).epsilon(1e-13));
  CHECK(oracle::nmi(c, cs, 10.0) == doctest::Approx(e).epsilon(1e-13));
  CHECK(nmi(part(c), part(cs)) == doctest::Approx(e).epsilon(1e-13));
}

TEST_CASE("NP is not symmetric") {
  const Partition a = part({0, 0, 0, 0, 1, 1});
  const Partition b = part({0, 0, 1, 1, 2, 2});
  CHECK(naive_precision(a, b) == 1.0);
  CHECK(naive_precision(b, a) == doctest::Approx(0.75));
}

TEST_CASE("kmeans on well separated 1-D points") {
  DenseMatrix d(1, 4);
  d << 0, 0.1, 10, 10.1;
  const KMeansResult r = kmeans(d, 2, 5, 1);
  CHECK(r.partition.labels[0] == r.partition.labels[1]);
  CHECK(r.partition.labels[2] == r.partition.labels[3]);
  CHECK(r.partition.labels[0] != r.partition.labels[2]);
  CHECK(r.wcss == doctest::Approx(0.01));
}

TEST_CASE("kmeans with one cluster per sample") {
  const DenseMatrix d = oracle::random_matrix(3, 7, 2);
  const KMeansResult r = kmeans(d, 7, 3, 9);
  CHECK(r.wcss == 0.0);
  CHECK(std::set<int>(r.partition.labels.begin(), r.partition.labels.end()).size() == 7);
}

TEST_CASE("kmeans recovers seeded blobs") {
  const int per = 25, k = 4;
  const double sigma = 1.0;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, sigma);
  DenseMatrix d(5, per * k);
  std::vector<int> truth;
  for (int c = 0; c < k; ++c) {
    for (int s = 0; s < per; ++s) {
      const int col = c * per + s;
      for (Index f = 0; f < d.rows(); ++f) d(f, col) = noise(rng);
      d(c, col) += 10.0 * sigma;
      truth.push_back(c);
    }
  }
  const KMeansResult r = kmeans(d, k, 10, 4);
  CHECK(nmi(r.partition, part(truth)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kmeans is deterministic and keeps the best restart") {
  const DenseMatrix d = oracle::random_matrix(4, 60, 8);
  const KMeansResult a = kmeans(d, 5, 6, 77);
  const KMeansResult b = kmeans(d, 5, 6, 77);
  CHECK(a.partition.labels == b.partition.labels);
  CHECK(a.wcss == b.wcss);
  for (int r = 1; r <= 6; ++r) CHECK(a.wcss <= kmeans(d, 5, r, 77).wcss);
}

TEST_CASE("kmeans errors") {
  const DenseMatrix d = oracle::random_matrix(2, 3, 1);
  CHECK_THROWS_AS(kmeans(d, 4, 1, 0), InvalidInput);
  CHECK_THROWS_AS(kmeans(d, 0, 1, 0), InvalidInput);
  CHECK_THROWS_AS(kmeans(d, 2, 0, 0), InvalidInput);
  DenseMatrix bad = d;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(kmeans(bad, 2, 1, 0), InvalidInput);
}
