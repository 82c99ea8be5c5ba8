#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpadp/mdp.hpp"

namespace mpadp {

// Ordinary n x k basis for least-squares value approximation. Must have full
// column rank (checked by a rank-revealing QR at threshold 1e-10).
class LsBasis {
 public:
  explicit LsBasis(Matrix matrix);

  const Matrix& matrix() const { return matrix_; }
  Eigen::Index rows() const { return matrix_.rows(); }
  Eigen::Index cols() const { return matrix_.cols(); }

 private:
  Matrix matrix_;
};

// ||x||_D = sqrt(x^T D x).
double weighted_norm(const Vector& x, const Vector& weights);

// D-weighted least-squares projection Phi (Phi^T D Phi)^{-1} Phi^T D x.
// weights must be strictly positive and sum to 1.
Vector ls_project(const LsBasis& basis, const Vector& weights, const Vector& x);

struct ApeResult {
  Vector weights;
  ValueFunction value_approx;  // basis * weights
  int iterations = 0;
  double final_residual = 0.0;  // D-norm of the last step
};

enum class ApeWeighting {
  stationary,  // D = stationary distribution of P_u
  uniform,     // D = 1/n, no convergence guarantee
};

struct ApeOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  ApeWeighting weighting = ApeWeighting::stationary;
  // Forwarded to stationary_distribution.
  double regularization = 0.0;
};

// Approximate policy evaluation: Phi r_{k+1} = Pi T_u Phi r_k from r_0 = 0,
// stopping once the D-norm step is <= tol (1 - alpha).
ApeResult ape(const Mdp& mdp, const Policy& u, const LsBasis& basis, const ApeOptions& options = {});

// Same, with D supplied by the caller.
ApeResult ape_weighted(const Mdp& mdp, const Policy& u, const LsBasis& basis, const Vector& weights,
                       double tol, int max_iter);

struct ApiResult {
  std::vector<Policy> policies;  // u_0, u_1, ...
  std::vector<ApeResult> evaluations;  // evaluations[i] evaluates policies[i]
  bool chattering = false;
  bool converged = false;  // last improvement reproduced the policy
};

// Approximate policy iteration from the all-zero-action policy: APE, then
// greedy improvement w.r.t. the approximate values. Runs at most
// outer_iters evaluations and stops early once the policy repeats itself.
ApiResult api(const Mdp& mdp, const LsBasis& basis, int outer_iters, const ApeOptions& options = {});

// True iff some policy recurs at distance >= 2 in the sequence, i.e. a cycle
// of length >= 2 other than a final fixed point.
bool has_policy_cycle(const std::vector<Policy>& policies);

// FNV-1a over the action indices.
std::uint64_t policy_hash(const Policy& u);

// "iteration,policy_hash,changed_states" then one line per policy.
std::string api_log_csv(const ApiResult& result);

}  // namespace mpadp
