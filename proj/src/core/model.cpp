#include "deepnmf/model.hpp"

#include "deepnmf/error.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace deepnmf {

Variant parse_variant(std::string_view name) {
  std::string s(name);
  for (auto& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  for (auto& c : s) if (c == '/' || c == '-') c = '_';
  if (s == "dnmf") return Variant::DNMF;
  if (s == "sdnmf_l") return Variant::SDNMF_L;
  if (s == "sdnmf_r") return Variant::SDNMF_R;
  if (s == "sdnmf_rl1") return Variant::SDNMF_RL1;
  if (s == "sdnmf_rl2") return Variant::SDNMF_RL2;
  throw InvalidInput("unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::DNMF: return "dnmf";
    case Variant::SDNMF_L: return "sdnmf_l";
    case Variant::SDNMF_R: return "sdnmf_r";
    case Variant::SDNMF_RL1: return "sdnmf_rl1";
    case Variant::SDNMF_RL2: return "sdnmf_rl2";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (layer_sizes.empty()) throw InvalidInput("model: no layers");
  for (Index k : layer_sizes) {
    if (k < 1) throw InvalidInput("model: layer sizes must be positive");
  }
  if (mu.size() != depth() || lambda.size() != depth()) {
    throw InvalidInput("model: mu and lambda need one entry per layer (" +
                       std::to_string(depth()) + ")");
  }
  for (std::size_t l = 0; l < depth(); ++l) {
    if (!(mu[l] >= 0.0) || !std::isfinite(mu[l]) || !(lambda[l] >= 0.0) ||
        !std::isfinite(lambda[l])) {
      throw InvalidInput("model: penalties must be finite and >= 0");
    }
  }
  if (is_nonlinear() && projection == ProjectionMode::none) {
    throw InvalidInput("model: a nonlinear activation needs projection square1 or square2");
  }
  if (!is_nonlinear() && projection != ProjectionMode::none) {
    throw InvalidInput("model: projection mode requires a nonlinear activation");
  }
}

std::vector<std::string> ModelSpec::warnings() const {
  std::vector<std::string> out;
  for (std::size_t l = 1; l < layer_sizes.size(); ++l) {
    if (layer_sizes[l] > layer_sizes[l - 1]) {
      out.push_back("layer " + std::to_string(l + 1) + " (" +
                    std::to_string(layer_sizes[l]) + ") is wider than layer " +
                    std::to_string(l) + " (" +
                    std::to_string(layer_sizes[l - 1]) + ")");
    }
  }
  return out;
}

double ModelSpec::w_penalty(std::size_t layer) const {
  switch (variant) {
    case Variant::SDNMF_L:
    case Variant::SDNMF_RL1:
    case Variant::SDNMF_RL2:
      return mu.at(layer);
    case Variant::DNMF:
    case Variant::SDNMF_R:
      return 0.0;
  }
  return 0.0;
}

HPenalty ModelSpec::h_penalty(std::size_t layer, Phase phase) const {
  const bool top = layer + 1 == depth();
  switch (variant) {
    case Variant::SDNMF_R:
      // Fine-tuning only penalizes the free block H_L.
      if (top || phase == Phase::pretrain) return {HPenalty::Kind::ones, lambda.at(layer)};
      break;
    case Variant::SDNMF_RL1:
      if (top) return {HPenalty::Kind::ones, lambda.at(layer)};
      break;
    case Variant::SDNMF_RL2:
      if (top) return {HPenalty::Kind::identity, lambda.at(layer)};
      break;
    case Variant::DNMF:
    case Variant::SDNMF_L:
      break;
  }
  return {};
}

ModelSpec make_spec(Variant variant, std::vector<Index> layer_sizes, double mu,
                    double lambda) {
  ModelSpec spec;
  spec.variant = variant;
  spec.mu.assign(layer_sizes.size(), mu);
  spec.lambda.assign(layer_sizes.size(), lambda);
  spec.layer_sizes = std::move(layer_sizes);
  return spec;
}

// ---------------------------------------------------------------------------
// FactorStack

DenseMatrix FactorStack::cumulative_basis(std::size_t layer) const {
  DenseMatrix p = w.at(0).mat();
  for (std::size_t l = 1; l <= layer; ++l) p = p * w.at(l).mat();
  return p;
}

void FactorStack::refresh_psi() {
  psi.clear();
  psi.reserve(depth());
  for (std::size_t l = 0; l < depth(); ++l) {
    psi.push_back(l == 0 ? w[0].mat() : DenseMatrix(psi.back() * w[l].mat()));
  }
}

bool FactorStack::psi_valid(double rel_tol) const {
  if (psi.size() != depth()) return false;
  for (std::size_t l = 0; l < depth(); ++l) {
    const DenseMatrix fresh = cumulative_basis(l);
    if (fresh.rows() != psi[l].rows() || fresh.cols() != psi[l].cols()) {
      return false;
    }
    if ((fresh - psi[l]).norm() > rel_tol * std::max(fresh.norm(), 1e-300)) {
      return false;
    }
  }
  return true;
}

DenseMatrix FactorStack::h_tilde(std::size_t layer) const {
  DenseMatrix r = h.back().mat();
  for (std::size_t l = depth() - 1; l > layer; --l) r = w[l].mat() * r;
  return r;
}

void FactorStack::check(const ModelSpec& spec, Index m, Index n) const {
  if (w.size() != spec.depth() || h.size() != spec.depth()) {
    throw InvalidInput("factor stack depth does not match the model");
  }
  Index rows = m;
  for (std::size_t l = 0; l < depth(); ++l) {
    const Index k = spec.layer_sizes[l];
    if (w[l].rows() != rows || w[l].cols() != k || h[l].rows() != k ||
        h[l].cols() != n) {
      throw InvalidInput("factor shapes do not chain at layer " +
                         std::to_string(l + 1));
    }
    rows = k;
  }
}

// ---------------------------------------------------------------------------
// Penalties and objectives

double ones_penalty(const DenseMatrix& m) noexcept {
  return 0.5 * m.colwise().sum().squaredNorm();
}

DenseMatrix ones_gram_times(const DenseMatrix& m) {
  return m.colwise().sum().replicate(m.rows(), 1);
}

double h_penalty_value(const HPenalty& pen, const DenseMatrix& h) {
  switch (pen.kind) {
    case HPenalty::Kind::none: return 0.0;
    case HPenalty::Kind::ones: return pen.weight * ones_penalty(h);
    case HPenalty::Kind::identity: return 0.5 * pen.weight * h.squaredNorm();
  }
  return 0.0;
}

namespace {

DenseMatrix h_penalty_grad(const HPenalty& pen, const DenseMatrix& h) {
  switch (pen.kind) {
    case HPenalty::Kind::ones: return pen.weight * ones_gram_times(h);
    case HPenalty::Kind::identity: return pen.weight * h;
    case HPenalty::Kind::none: break;
  }
  return DenseMatrix::Zero(h.rows(), h.cols());
}

double h_penalty_lipschitz(const HPenalty& pen, Index rows) {
  switch (pen.kind) {
    case HPenalty::Kind::ones: return pen.weight * ones_gram_norm(rows);
    case HPenalty::Kind::identity: return pen.weight;
    case HPenalty::Kind::none: break;
  }
  return 0.0;
}

// Lipschitz constants of exactly-zero blocks (e.g. an all-zero basis with no
// penalty) leave a constant, zero gradient; any positive step is then safe.
constexpr double kMinLipschitz = 1e-12;

}  // namespace

DenseMatrix reconstruct(const ModelSpec& spec, const FactorStack& stack) {
  const std::size_t depth = stack.depth();
  if (!spec.is_nonlinear()) {
    return stack.cumulative_basis(depth - 1) * stack.h.back().mat();
  }
  const Activation act(spec.activation);
  DenseMatrix a = stack.h.back().mat();
  for (std::size_t l = depth - 1; l > 0; --l) {
    a = act.inverse(DenseMatrix(stack.w[l].mat() * a));
  }
  return stack.w[0].mat() * a;
}

double objective(const ModelSpec& spec, const NonnegMatrix& x,
                 const FactorStack& stack) {
  stack.check(spec, x.rows(), x.cols());
  double value = 0.5 * (x.mat() - reconstruct(spec, stack)).squaredNorm();
  for (std::size_t l = 0; l < stack.depth(); ++l) {
    const double mu = spec.w_penalty(l);
    if (mu != 0.0) value += mu * ones_penalty(stack.w[l].mat());
  }
  const std::size_t top = stack.depth() - 1;
  value += h_penalty_value(spec.h_penalty(top, Phase::finetune),
                           stack.h[top].mat());
  return value;
}

double layer_objective(const ModelSpec& spec, std::size_t layer,
                       const DenseMatrix& input, const DenseMatrix& w,
                       const DenseMatrix& h) {
  double value = 0.5 * (input - w * h).squaredNorm();
  const double mu = spec.w_penalty(layer);
  if (mu != 0.0) value += mu * ones_penalty(w);
  value += h_penalty_value(spec.h_penalty(layer, Phase::pretrain), h);
  return value;
}

// ---------------------------------------------------------------------------
// Block problems

ApgProblem w_block_problem(const DenseMatrix& target, const DenseMatrix* left,
                           const DenseMatrix& right, double mu) {
  struct Data {
    DenseMatrix target, left, right;
    bool has_left;
    DenseMatrix lhs_gram;  // left^T left
    DenseMatrix rhs_gram;  // right right^T
    DenseMatrix cross;     // left^T target right^T
    double mu;
  };
  auto d = std::make_shared<Data>();
  d->target = target;
  d->has_left = left != nullptr;
  d->right = right;
  d->mu = mu;
  d->rhs_gram = right * right.transpose();
  if (d->has_left) {
    d->left = *left;
    d->lhs_gram = left->transpose() * *left;
    d->cross = left->transpose() * (target * right.transpose());
  } else {
    d->cross = target * right.transpose();
  }

  ApgProblem p;
  p.rows = d->has_left ? left->cols() : target.rows();
  p.cols = right.rows();
  const double lhs_norm = d->has_left ? gram_norm(*left) : 1.0;
  p.lipschitz = std::max(lhs_norm * gram_norm(right) +
                             (mu != 0.0 ? mu * ones_gram_norm(p.rows) : 0.0),
                         kMinLipschitz);
  p.grad = [d](const DenseMatrix& w) -> DenseMatrix {
    DenseMatrix g = d->has_left ? DenseMatrix(d->lhs_gram * (w * d->rhs_gram))
                                : DenseMatrix(w * d->rhs_gram);
    g -= d->cross;
    if (d->mu != 0.0) g += d->mu * ones_gram_times(w);
    return g;
  };
  p.objective = [d](const DenseMatrix& w) -> double {
    const DenseMatrix inner = w * d->right;
    const DenseMatrix approx =
        d->has_left ? DenseMatrix(d->left * inner) : inner;
    double v = 0.5 * (d->target - approx).squaredNorm();
    if (d->mu != 0.0) v += d->mu * ones_penalty(w);
    return v;
  };
  return p;
}

ApgProblem h_block_problem(const DenseMatrix& target, const DenseMatrix& left,
                           const HPenalty& penalty) {
  struct Data {
    DenseMatrix target, left, gram, cross;
    HPenalty penalty;
  };
  auto d = std::make_shared<Data>();
  d->target = target;
  d->left = left;
  d->gram = left.transpose() * left;
  d->cross = left.transpose() * target;
  d->penalty = penalty;

  ApgProblem p;
  p.rows = left.cols();
  p.cols = target.cols();
  p.lipschitz = std::max(
      gram_norm(left) + h_penalty_lipschitz(penalty, p.rows), kMinLipschitz);
  p.grad = [d](const DenseMatrix& h) -> DenseMatrix {
    DenseMatrix g = d->gram * h - d->cross;
    if (d->penalty.kind != HPenalty::Kind::none) {
      g += h_penalty_grad(d->penalty, h);
    }
    return g;
  };
  p.objective = [d](const DenseMatrix& h) -> double {
    return 0.5 * (d->target - d->left * h).squaredNorm() +
           h_penalty_value(d->penalty, h);
  };
  return p;
}

ApgProblem pretrain_problem(const ModelSpec& spec, std::size_t layer, Role role,
                            const DenseMatrix& input, const NonnegMatrix& w_cur,
                            const NonnegMatrix& h_cur) {
  if (layer >= spec.depth()) throw InvalidInput("pretrain_problem: bad layer");
  if (input.size() == 0 || w_cur.mat().size() == 0 || h_cur.mat().size() == 0) {
    throw InvalidInput("pretrain_problem: zero-size block");
  }
  if (w_cur.rows() != input.rows() || h_cur.cols() != input.cols() ||
      w_cur.cols() != h_cur.rows()) {
    throw InvalidInput("pretrain_problem: shapes do not conform");
  }
  if (role == Role::H) {
    return h_block_problem(input, w_cur.mat(),
                           spec.h_penalty(layer, Phase::pretrain));
  }
  return w_block_problem(input, nullptr, h_cur.mat(), spec.w_penalty(layer));
}

ApgProblem finetune_problem(const ModelSpec& spec, std::size_t layer, Role role,
                            const NonnegMatrix& x, const FactorStack& stack) {
  if (layer >= spec.depth()) throw InvalidInput("finetune_problem: bad layer");
  stack.check(spec, x.rows(), x.cols());
  if (!stack.psi.empty() && !stack.psi_valid()) {
    throw InternalError("finetune_problem: stale psi cache");
  }
  auto psi = [&](std::size_t l) -> DenseMatrix {
    return stack.psi.empty() ? stack.cumulative_basis(l) : stack.psi[l];
  };

  if (role == Role::W) {
    const DenseMatrix h_tilde = stack.h_tilde(layer);
    if (layer == 0) {
      return w_block_problem(x.mat(), nullptr, h_tilde, spec.w_penalty(0));
    }
    const DenseMatrix left = psi(layer - 1);
    return w_block_problem(x.mat(), &left, h_tilde, spec.w_penalty(layer));
  }
  return h_block_problem(x.mat(), psi(layer),
                         spec.h_penalty(layer, Phase::finetune));
}

}  // namespace deepnmf
