#include "mpadp/adp_conventional.hpp"

#include <cmath>
#include <sstream>

#include "mpadp/error.hpp"

namespace mpadp {

namespace {

void check_weights(const Vector& weights, Eigen::Index n) {
  if (weights.size() != n) throw InvalidArgument("projection weights: length mismatch");
  if (!(weights.array() > 0.0).all()) {
    throw InvalidArgument("projection weights must be strictly positive");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) {
    throw InvalidArgument("projection weights must sum to 1");
  }
}

// Factorization of the D-weighted Gram matrix, reused across APE sweeps.
class WeightedProjector {
 public:
  WeightedProjector(const LsBasis& basis, const Vector& weights)
      : phi_(basis.matrix()), weighted_phi_t_((phi_.array().colwise() * weights.array()).matrix().transpose()) {
    const Matrix gram = weighted_phi_t_ * phi_;
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success) {
      throw RankDeficiency("Phi^T D Phi is not positive definite");
    }
  }

  // (Phi^T D Phi)^{-1} Phi^T D x.
  Vector coefficients(const Vector& x) const { return llt_.solve(weighted_phi_t_ * x); }

 private:
  const Matrix& phi_;
  Matrix weighted_phi_t_;
  Eigen::LLT<Matrix> llt_;
};

}  // namespace

LsBasis::LsBasis(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) throw InvalidArgument("LsBasis: empty matrix");
  if (matrix_.cols() > matrix_.rows()) {
    throw RankDeficiency("LsBasis: more columns than rows");
  }
  if (!matrix_.allFinite()) throw InvalidArgument("LsBasis: entries must be finite");
  Eigen::ColPivHouseholderQR<Matrix> qr(matrix_);
  qr.setThreshold(1e-10);
  if (qr.rank() < matrix_.cols()) {
    throw RankDeficiency("LsBasis: rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(matrix_.cols()) + " columns");
  }
}

double weighted_norm(const Vector& x, const Vector& weights) {
  if (x.size() != weights.size()) throw InvalidArgument("weighted_norm: length mismatch");
  return std::sqrt((x.array().square() * weights.array()).sum());
}

Vector ls_project(const LsBasis& basis, const Vector& weights, const Vector& x) {
  if (x.size() != basis.rows()) throw InvalidArgument("ls_project: length mismatch");
  check_weights(weights, basis.rows());
  const WeightedProjector projector(basis, weights);
  return basis.matrix() * projector.coefficients(x);
}

ApeResult ape_weighted(const Mdp& mdp, const Policy& u, const LsBasis& basis, const Vector& weights,
                       double tol, int max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("ape: tol must be positive");
  if (basis.rows() != mdp.num_states()) throw InvalidArgument("ape: basis must have n rows");
  check_weights(weights, basis.rows());

  const WeightedProjector projector(basis, weights);
  const Matrix& phi = basis.matrix();
  const Matrix P = mdp.policy_kernel(u);
  const Vector g = mdp.policy_rewards(u);
  const double alpha = mdp.discount();
  const double threshold = tol * (1.0 - alpha);

  Vector r = Vector::Zero(basis.cols());
  Vector v = Vector::Zero(basis.rows());
  std::vector<double> trace;
  for (int it = 1; it <= max_iter; ++it) {
    Vector r_next = projector.coefficients(g + alpha * (P * v));
    Vector v_next = phi * r_next;
    const double residual = weighted_norm(v_next - v, weights);
    trace.push_back(residual);
    r = std::move(r_next);
    v = std::move(v_next);
    if (residual <= threshold) return ApeResult{r, v, it, residual};
  }
  throw ConvergenceFailure("ape: no convergence in " + std::to_string(max_iter) + " iterations",
                           std::vector<double>(v.data(), v.data() + v.size()), std::move(trace));
}

ApeResult ape(const Mdp& mdp, const Policy& u, const LsBasis& basis, const ApeOptions& options) {
  Vector weights;
  if (options.weighting == ApeWeighting::stationary) {
    StationaryOptions so;
    so.regularization = options.regularization;
    weights = stationary_distribution(mdp, u, so);
    if (!(weights.array() > 0.0).all()) {
      throw NumericError(
          "ape: stationary distribution has zero entries; retry with regularization > 0");
    }
  } else {
    weights = Vector::Constant(mdp.num_states(), 1.0 / mdp.num_states());
  }
  return ape_weighted(mdp, u, basis, weights, options.tol, options.max_iter);
}

bool has_policy_cycle(const std::vector<Policy>& policies) {
  for (std::size_t i = 0; i < policies.size(); ++i) {
    for (std::size_t j = i + 2; j < policies.size(); ++j) {
      if (policies[i] == policies[j]) return true;
    }
  }
  return false;
}

ApiResult api(const Mdp& mdp, const LsBasis& basis, int outer_iters, const ApeOptions& options) {
  if (outer_iters < 1) throw InvalidArgument("api: outer_iters must be >= 1");
  ApiResult result;
  Policy u(mdp.num_states(), 0);
  for (int i = 0; i < outer_iters; ++i) {
    result.policies.push_back(u);
    result.evaluations.push_back(ape(mdp, u, basis, options));
    Policy next = greedy_policy(mdp, result.evaluations.back().value_approx);
    if (next == u) {
      result.converged = true;
      break;
    }
    u = std::move(next);
  }
  result.chattering = has_policy_cycle(result.policies);
  return result;
}

std::uint64_t policy_hash(const Policy& u) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const int a : u) {
    h ^= static_cast<std::uint64_t>(a);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string api_log_csv(const ApiResult& result) {
  std::ostringstream out;
  out << "iteration,policy_hash,changed_states\n";
  for (std::size_t i = 0; i < result.policies.size(); ++i) {
    int changed = 0;
    if (i > 0) {
      for (std::size_t s = 0; s < result.policies[i].size(); ++s) {
        changed += result.policies[i][s] != result.policies[i - 1][s];
      }
    }
    out << i << ',' << std::hex << policy_hash(result.policies[i]) << std::dec << ',' << changed
        << '\n';
  }
  return out.str();
}

}  // namespace mpadp
