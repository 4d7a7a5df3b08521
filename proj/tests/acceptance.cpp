// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
#include "deepnmf/apg.hpp"
#include "deepnmf/error.hpp"
#include "deepnmf/experiment.hpp"
#include "deepnmf/metrics.hpp"
#include "deepnmf/model.hpp"
#include "deepnmf/nnsvd.hpp"
#include "deepnmf/nonlinear.hpp"
#include "deepnmf/trainer.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace deepnmf;
namespace fs = std::filesystem;

namespace {

const Variant kVariants[] = {Variant::DNMF, Variant::SDNMF_L, Variant::SDNMF_R,
                             Variant::SDNMF_RL1, Variant::SDNMF_RL2};

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::vector<DenseMatrix> mats(const std::vector<NonnegMatrix>& v) {
  std::vector<DenseMatrix> out;
  for (const auto& m : v) out.push_back(m.mat());
  return out;
}

FactorStack random_stack(const std::vector<Index>& layers, Index m, Index n, std::uint64_t seed,
                         double lo = 0.1, double hi = 1.0) {
  FactorStack s;
  Index rows = m;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    s.w.push_back(oracle::random_nonneg(rows, layers[l], seed + 10 * l, lo, hi));
    s.h.push_back(oracle::random_nonneg(layers[l], n, seed + 10 * l + 5, lo, hi));
    rows = layers[l];
  }
  return s;
}

double residual(const DenseMatrix& g, const DenseMatrix& x) {
  double s = 0.0;
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j) {
      const double v = x(i, j) > 0.0 ? g(i, j) : std::min(g(i, j), 0.0);
      s += v * v;
    }
  return std::sqrt(s);
}

// The H-block of plain NMF: min_H 1/2 ||X - W H||^2, H >= 0.
struct HBlock {
  DenseMatrix x, w, wtw, wtx, h0;
  double lc = 0.0;
  ApgProblem problem;
};

HBlock h_block_instance(std::uint64_t seed) {
  HBlock b;
  b.x = oracle::random_matrix(20, 15, 1000 + seed, 0.0, 1.0);
  b.w = oracle::random_matrix(20, 5, 2000 + seed, 0.0, 1.0);
  b.h0 = oracle::random_matrix(5, 15, 3000 + seed, 0.0, 1.0);
  b.wtw = b.w.transpose() * b.w;
  b.wtx = b.w.transpose() * b.x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(b.wtw)};
  b.lc = es.eigenvalues().maxCoeff();
  const DenseMatrix wtw = b.wtw, wtx = b.wtx, x = b.x, w = b.w;
  b.problem.grad = [wtw, wtx](const DenseMatrix& h) -> DenseMatrix { return wtw * h - wtx; };
  b.problem.objective = [x, w](const DenseMatrix& h) { return 0.5 * (x - w * h).squaredNorm(); };
  b.problem.lipschitz = b.lc;
  b.problem.rows = 5;
  b.problem.cols = 15;
  return b;
}

double h_objective(const HBlock& b, const DenseMatrix& h) {
  return 0.5 * oracle::naive_frobenius_sq(b.x - b.w * h);
}

// Plain projected gradient with step 1/lc for up to max_iters iterations.
// Stops early only once an iterate repeats exactly, after which every further
// iteration would reproduce it.
DenseMatrix plain_pg(const HBlock& b, long max_iters) {
  DenseMatrix h = b.h0, g(5, 15), next(5, 15);
  for (long it = 0; it < max_iters; ++it) {
    g.noalias() = b.wtw * h;
    g -= b.wtx;
    next = (h - g / b.lc).cwiseMax(0.0);
    if (next == h) break;
    h.swap(next);
  }
  return h;
}

// ---- criteria

Outcome solver_oracle() {
  Clock clock;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const HBlock b = h_block_instance(s);
    const DenseMatrix ref = plain_pg(b, 1'000'000);
    const ApgResult r = apg_solve(NonnegMatrix(b.h0), b.problem, {100'000, 1e-6});
    worst = std::max(worst, oracle::rel_diff(h_objective(b, r.solution.mat()), h_objective(b, ref)));
  }
  const double t = clock.seconds();
  return {worst <= 1e-6 && t < 5.0,
          fmt("max rel objective gap %.2e (tol 1e-6), %.2f s (limit 5 s)", worst, t)};
}

Outcome acceleration() {
  int worse = 0;
  long apg_total = 0, pg_total = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const HBlock b = h_block_instance(s);
    const ApgResult r = apg_solve(NonnegMatrix(b.h0), b.problem, {1'000'000, 1e-6});
    const oracle::PgRun pg = oracle::slow_pg(b.problem.grad, b.lc, b.h0, 1'000'000, 1e-6);
    apg_total += r.iterations;
    pg_total += pg.iterations;
    if (!r.converged || r.iterations > pg.iterations) ++worse;
  }
  return {worse == 0, fmt("APG %ld vs PG %ld total iterations to tol 1e-6, %d instance(s) slower",
                          apg_total, pg_total, worse)};
}

Outcome kkt() {
  int solves = 0, converged = 0, violations = 0;
  double worst = 0.0;
  auto certify = [&](const NonnegMatrix& start, const ApgProblem& p) {
    const ApgResult r = apg_solve(start, p, StopRule{});
    ++solves;
    if (!r.converged) return;
    ++converged;
    const double r0 = residual(p.grad(start.mat()), start.mat());
    const double r1 = residual(p.grad(r.solution.mat()), r.solution.mat());
    const double ratio = r0 > 0.0 ? r1 / r0 : 0.0;
    const bool feasible = r.solution.mat().minCoeff() >= 0.0;
    worst = std::max(worst, ratio);
    if (ratio > 1e-4 || !feasible) ++violations;
  };
  for (std::uint64_t s = 0; s < 10; ++s) {
    const HBlock b = h_block_instance(s);
    certify(NonnegMatrix(b.h0), b.problem);
  }
  for (Variant v : kVariants) {
    const ModelSpec spec = make_spec(v, {6, 3}, 0.2, 0.3);
    const NonnegMatrix x = oracle::random_nonneg(12, 16, 5);
    FactorStack st = random_stack({6, 3}, 12, 16, 7);
    st.refresh_psi();
    for (std::size_t l = 0; l < 2; ++l) {
      const DenseMatrix& input = l == 0 ? x.mat() : st.h[0].mat();
      for (Role role : {Role::W, Role::H}) {
        const NonnegMatrix& start = role == Role::W ? st.w[l] : st.h[l];
        certify(start, pretrain_problem(spec, l, role, input, st.w[l], st.h[l]));
        certify(start, finetune_problem(spec, l, role, x, st));
      }
    }
  }
  return {violations == 0 && converged > 0,
          fmt("%d/%d solves converged, worst residual ratio %.2e (tol 1e-4)", converged, solves,
              worst)};
}

Outcome gradients() {
  Clock clock;
  double worst = 0.0;
  int checks = 0;
  auto record = [&](const DenseMatrix& g, const DenseMatrix& fd) {
    worst = std::max(worst, oracle::rel_diff(g, fd));
    ++checks;
  };
  const std::vector<Index> layers{4, 3};
  const Index m = 6, n = 5;
  for (int point = 0; point < 20; ++point) {
    const std::uint64_t seed = 100 + 37 * std::uint64_t(point);
    const NonnegMatrix x = oracle::random_nonneg(m, n, seed, 0.1, 1.0);
    FactorStack st = random_stack(layers, m, n, seed + 1);
    st.refresh_psi();
    for (Variant v : kVariants) {
      const ModelSpec spec = make_spec(v, layers, 0.3, 0.7);
      // Pretraining blocks.
      for (std::size_t l = 0; l < 2; ++l) {
        const DenseMatrix& input = l == 0 ? x.mat() : st.h[0].mat();
        const DenseMatrix& w = st.w[l].mat();
        const DenseMatrix& h = st.h[l].mat();
        record(pretrain_problem(spec, l, Role::W, input, st.w[l], st.h[l]).grad(w),
               oracle::fd_gradient([&](const DenseMatrix& z) {
                 return oracle::pretrain_block_objective(spec, l, input, z, h);
               }, w));
        record(pretrain_problem(spec, l, Role::H, input, st.w[l], st.h[l]).grad(h),
               oracle::fd_gradient([&](const DenseMatrix& z) {
                 return oracle::pretrain_block_objective(spec, l, input, w, z);
               }, h));
      }
      // Fine-tuning blocks.
      auto full = [&](const ModelSpec& sp, const FactorStack& t) {
        return oracle::objective(sp, x.mat(), mats(t.w), mats(t.h));
      };
      for (std::size_t l = 0; l < 2; ++l) {
        record(finetune_problem(spec, l, Role::W, x, st).grad(st.w[l].mat()),
               oracle::fd_gradient([&](const DenseMatrix& z) {
                 FactorStack t = st;
                 t.w[l] = NonnegMatrix::adopt(z);
                 return full(spec, t);
               }, st.w[l].mat()));
      }
      record(finetune_problem(spec, 0, Role::H, x, st).grad(st.h[0].mat()),
             oracle::fd_gradient([&](const DenseMatrix& z) {
               return oracle::hidden_h_objective(x.mat(), mats(st.w), 0, z);
             }, st.h[0].mat()));
      record(finetune_problem(spec, 1, Role::H, x, st).grad(st.h[1].mat()),
             oracle::fd_gradient([&](const DenseMatrix& z) {
               FactorStack t = st;
               t.h[1] = NonnegMatrix::adopt(z);
               return full(spec, t);
             }, st.h[1].mat()));
      // Nonlinear chain-rule gradients.
      for (ActivationKind act : {ActivationKind::root, ActivationKind::softplus}) {
        ModelSpec nl = spec;
        nl.activation = act;
        nl.projection = ProjectionMode::square1;
        const NonlinearGradients g = nonlinear_gradients(nl, x, st);
        for (std::size_t l = 0; l < 2; ++l) {
          record(g.w[l], oracle::fd_gradient([&](const DenseMatrix& z) {
                   FactorStack t = st;
                   t.w[l] = NonnegMatrix::adopt(z);
                   return full(nl, t);
                 }, st.w[l].mat()));
        }
        record(g.h_top, oracle::fd_gradient([&](const DenseMatrix& z) {
                 FactorStack t = st;
                 t.h[1] = NonnegMatrix::adopt(z);
                 return full(nl, t);
               }, st.h[1].mat()));
      }
    }
  }
  const double t = clock.seconds();
  return {worst <= 1e-5 && t < 30.0,
          fmt("%d gradient checks, worst rel error %.2e (tol 1e-5), %.2f s (limit 30 s)", checks,
              worst, t)};
}

Outcome monotone() {
  int problems = 0, bad = 0;
  double worst_rise = 0.0;
  for (Variant v : kVariants) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const NonnegMatrix x = oracle::random_nonneg(20, 30, 500 + s);
      TrainConfig cfg;
      cfg.seed = s;
      const TrainResult r = train(make_spec(v, {8, 4}, 0.1, 0.1), x, cfg);
      ++problems;
      bool ok = r.report.final_objective <= r.pretrain_objective;
      const auto& tr = r.report.objective_trace;
      for (std::size_t t = 1; t < tr.size(); ++t) {
        worst_rise = std::max(worst_rise, (tr[t] - tr[t - 1]) / tr[t - 1]);
        if (tr[t] > tr[t - 1] * (1 + 1e-10)) ok = false;
      }
      if (!ok) ++bad;
    }
  }
  return {bad == 0, fmt("%d problems, %d violations, largest relative rise %.2e (slack 1e-10)",
                        problems, bad, worst_rise)};
}

Outcome planted_recovery() {
  Clock clock;
  ExperimentConfig cfg;
  cfg.data.synth_kind = SynthKind::planted_linear;
  cfg.data.synth.features = 50;
  cfg.data.synth.samples = 200;
  cfg.data.synth.layer_sizes = {20, 8};
  cfg.data.synth.classes = 8;
  cfg.data.synth.sigma = 0.01;
  cfg.model.variant = Variant::SDNMF_L;
  cfg.model.layers = {20, 8};
  cfg.eval.model_reps = 3;
  cfg.eval.kmeans_reps = 5;
  const ExperimentResult r = run_experiment(cfg, load_dataset(cfg.data));
  const PointSummary& s = r.summaries.at(0);
  const double t = clock.seconds();
  return {s.failed_runs == 0 && s.nmi.n == 15 && s.nmi.mean >= 0.9 && s.np.mean >= 0.85 && t < 60.0,
          fmt("mean NMI %.4f (>= 0.9), mean NP %.4f (>= 0.85) over %d scores, %.2f s (limit 60 s)",
              s.nmi.mean, s.np.mean, s.nmi.n, t)};
}

Outcome sparsity() {
  // Dense planted W: zeros in W1 can only come from the penalty. With the
  // default density the fraction settles on the planted support once mu > 0
  // and then drifts by about 0.02 either way.
  ExperimentConfig cfg;
  cfg.data.synth.density = 1.0;
  cfg.model.variant = Variant::SDNMF_L;
  cfg.sweep.mu = {0.0, 0.1, 1.0};
  cfg.eval.model_reps = 1;
  cfg.eval.kmeans_reps = 1;
  cfg.data.synth_seed = 11;
  cfg.train.seed = 11;
  const ExperimentResult r = run_experiment(cfg, load_dataset(cfg.data));
  std::vector<double> frac;
  for (const RunRecord& rec : r.records) frac.push_back(rec.ok() ? rec.w1_sparsity : -1.0);
  const bool ok = frac.size() == 3 && frac[0] >= 0.0 && frac[0] <= frac[1] && frac[1] <= frac[2];
  return {ok, fmt("W1 near-zero fraction %.4f, %.4f, %.4f for mu 0, 0.1, 1", frac.at(0),
                  frac.at(1), frac.at(2))};
}

Outcome metrics() {
  long compared = 0, mismatches = 0;
  for (int n = 1; n <= 6; ++n) {
    for (int k = 1; k <= 3; ++k) {
      const auto all = oracle::all_labelings(n, k);
      for (const auto& c : all) {
        for (const auto& cs : all) {
          const Partition pc{c, k}, ps{cs, k};
          const double ref = oracle::nmi(c, cs);
          const double got = nmi(pc, ps);
          if (std::isnan(ref) ? got != 1.0 : std::abs(got - ref) > 1e-12) ++mismatches;
          if (std::abs(error_rate(pc, ps) - oracle::error_rate(c, cs)) > 1e-12) ++mismatches;
          const Partition truth = Partition::from_labels(cs);
          if (std::abs(naive_precision(pc, truth) - oracle::naive_precision(c, cs)) > 1e-12) {
            ++mismatches;
          }
          ++compared;
        }
      }
    }
  }
  const std::vector<int> c{1, 2, 2, 2}, cs{1, 1, 2, 2};
  const Partition pc = Partition::from_labels(c), ps = Partition::from_labels(cs);
  const double v_nmi = nmi(pc, ps), v_er = error_rate(pc, ps), v_np = naive_precision(pc, ps);
  const bool examples = std::abs(v_nmi - oracle::nmi(c, cs)) <= 1e-12 &&
                        std::abs(v_er - std::pow(6.0, 0.25)) <= 1e-12 && v_np == 0.75;
  return {mismatches == 0 && examples,
          fmt("%ld partition pairs, %ld mismatches; example NMI %.6f, ER %.6f (6^(1/4)), NP %.2f",
              compared, mismatches, v_nmi, v_er, v_np)};
}

Outcome lipschitz() {
  std::mt19937_64 rng(77);
  long pairs = 0, violations = 0;
  double worst = 0.0;
  for (Variant v : kVariants) {
    const ModelSpec spec = make_spec(v, {6, 3}, 0.5, 0.9);
    const NonnegMatrix x = oracle::random_nonneg(10, 12, 3);
    FactorStack st = random_stack({6, 3}, 10, 12, 4);
    st.refresh_psi();
    std::vector<ApgProblem> blocks;
    for (std::size_t l = 0; l < 2; ++l) {
      const DenseMatrix& input = l == 0 ? x.mat() : st.h[0].mat();
      for (Role r : {Role::W, Role::H}) {
        blocks.push_back(pretrain_problem(spec, l, r, input, st.w[l], st.h[l]));
        blocks.push_back(finetune_problem(spec, l, r, x, st));
      }
    }
    for (const ApgProblem& p : blocks) {
      for (int i = 0; i < 100; ++i) {
        const DenseMatrix a = oracle::random_matrix(p.rows, p.cols, rng(), 0.0, 2.0);
        const DenseMatrix b = oracle::random_matrix(p.rows, p.cols, rng(), 0.0, 2.0);
        const double lhs = (p.grad(a) - p.grad(b)).norm();
        const double rhs = p.lipschitz * (a - b).norm();
        worst = std::max(worst, lhs / rhs);
        if (lhs > rhs) ++violations;
        ++pairs;
      }
    }
  }
  return {violations == 0,
          fmt("%ld pairs, %ld violations, max ratio %.4f (<= 1)", pairs, violations, worst)};
}

Outcome reductions() {
  double nenmf_gap = 0.0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const NonnegMatrix x = oracle::random_nonneg(12, 15, s);
    TrainConfig cfg;
    cfg.inner = {5000, 1e-12};
    cfg.outer = {20000, 1e-15};
    const TrainResult r = train(make_spec(Variant::DNMF, {4}, 0.0, 0.0), x, cfg);
    const InitPair init = nnsvd_init(x, 4);
    const oracle::NenmfRun ref =
        oracle::nenmf(x.mat(), init.w.mat(), init.h.mat(), 40000, 1e-15, cfg.inner);
    nenmf_gap = std::max(nenmf_gap, oracle::rel_diff(r.report.final_objective, ref.objective));
  }
  double id_gap = 0.0;
  const std::vector<Index> layers{5, 4, 3};
  for (Variant v : kVariants) {
    const NonnegMatrix x = oracle::random_nonneg(8, 9, 2);
    FactorStack st = random_stack(layers, 8, 9, 21);
    st.refresh_psi();
    const ModelSpec lin = make_spec(v, layers, 0.3, 0.4);
    ModelSpec id = lin;
    id.activation = ActivationKind::identity;
    id.projection = ProjectionMode::square1;
    const NonlinearGradients g = nonlinear_gradients(id, x, st);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      id_gap = std::max(id_gap, oracle::rel_diff(g.w[l], finetune_problem(lin, l, Role::W, x, st)
                                                             .grad(st.w[l].mat())));
    }
    id_gap = std::max(id_gap, oracle::rel_diff(g.h_top, finetune_problem(lin, 2, Role::H, x, st)
                                                            .grad(st.h[2].mat())));
  }
  return {nenmf_gap <= 1e-8 && id_gap <= 1e-12,
          fmt("NeNMF objective gap %.2e (tol 1e-8), identity gradient gap %.2e (tol 1e-12)",
              nenmf_gap, id_gap)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("deepnmf_accept_" + std::to_string(::getpid()));
  ExperimentConfig cfg;
  cfg.data.synth.features = 30;
  cfg.data.synth.samples = 60;
  cfg.data.synth.layer_sizes = {10, 4};
  cfg.data.synth.classes = 4;
  cfg.data.synth_seed = 5;
  cfg.model.layers = {10, 4};
  cfg.sweep.mu = {0.0, 0.1};
  cfg.sweep.lambda = {0.1, 1.0};
  cfg.eval.model_reps = 2;
  cfg.eval.kmeans_reps = 2;
  cfg.train.seed = 3;
  cfg.eval.seed = 4;
  const char* runs[][2] = {{"1", "a"}, {"1", "b"}, {"4", "c"}, {"4", "d"}};
  std::vector<std::string> outputs;
  for (const auto& run : runs) {
    ::setenv("DEEPNMF_THREADS", run[0], 1);
    cfg.output.dir = root / run[1];
    run_experiment(cfg);
    outputs.push_back(slurp(cfg.output.dir / "runs.csv") + slurp(cfg.output.dir / "summary.csv") +
                      slurp(cfg.output.dir / "summary.json"));
  }
  ::unsetenv("DEEPNMF_THREADS");
  fs::remove_all(root);
  int differing = 0;
  for (const auto& o : outputs) differing += o != outputs.front();
  return {differing == 0 && !outputs.front().empty(),
          fmt("%zu runs (threads 1,1,4,4), %d differ from the first, %zu bytes each",
              outputs.size(), differing, outputs.front().size())};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "solver-oracle equivalence", solver_oracle},
      {2, "acceleration", acceleration},
      {3, "KKT certification", kkt},
      {4, "gradient correctness", gradients},
      {5, "monotone descent", monotone},
      {6, "planted recovery", planted_recovery},
      {7, "sparsity effect", sparsity},
      {8, "metric correctness", metrics},
      {9, "Lipschitz validity", lipschitz},
      {10, "reductions", reductions},
      {11, "determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", int(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
