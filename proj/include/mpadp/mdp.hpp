#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mpadp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// J(s) for every state.
using ValueFunction = Vector;

// Stationary deterministic policy: one action index per state.
using Policy = std::vector<int>;

// Finite discounted-reward MDP with n states and d actions, every action
// feasible in every state.
//
// rewards:      n x d, element (s, a) is g_a(s).
// transitions:  d matrices of size n x n, transitions[a](s, s') = p_a(s, s').
// discount:     alpha in [0, 1).
class Mdp {
 public:
  Mdp(Matrix rewards, std::vector<Matrix> transitions, double discount);

  int num_states() const { return static_cast<int>(rewards_.rows()); }
  int num_actions() const { return static_cast<int>(rewards_.cols()); }
  double discount() const { return discount_; }

  double reward(int s, int a) const { return rewards_(s, a); }
  const Matrix& rewards() const { return rewards_; }
  const Matrix& transition(int a) const { return transitions_[a]; }
  const std::vector<Matrix>& transitions() const { return transitions_; }

  // Throws InvalidArgument unless u has one valid action per state.
  void check_policy(const Policy& u) const;

  // P_u with row s taken from p_{u(s)}(s, .).
  Matrix policy_kernel(const Policy& u) const;
  // g_u(s) = g_{u(s)}(s).
  Vector policy_rewards(const Policy& u) const;

  // Rewards flattened in (s, a) order, matching QFunction::index.
  Vector flat_rewards() const;

 private:
  Matrix rewards_;
  std::vector<Matrix> transitions_;
  double discount_;
};

// Q(s, a) stored flat with index(s, a) = s * d + a.
class QFunction {
 public:
  QFunction(int num_states, int num_actions);
  QFunction(int num_states, int num_actions, Vector flat);

  static std::size_t index(int s, int a, int num_actions) {
    return static_cast<std::size_t>(s) * num_actions + a;
  }

  int num_states() const { return n_; }
  int num_actions() const { return d_; }

  double operator()(int s, int a) const { return flat_[index(s, a, d_)]; }
  double& operator()(int s, int a) { return flat_[index(s, a, d_)]; }

  const Vector& flat() const { return flat_; }
  Vector& flat() { return flat_; }

  // max_a Q(s, a) per state.
  ValueFunction state_max() const;

 private:
  int n_;
  int d_;
  Vector flat_;
};

double sup_norm(const Vector& x);
double sup_distance(const Vector& x, const Vector& y);

// (TJ)(s) = max_a [g_a(s) + alpha * sum_s' p_a(s, s') J(s')].
ValueFunction bellman_T(const Mdp& mdp, const ValueFunction& J);

// (T_u J)(s) = g_{u(s)}(s) + alpha * sum_s' p_{u(s)}(s, s') J(s').
ValueFunction bellman_T_u(const Mdp& mdp, const Policy& u, const ValueFunction& J);

// (HQ)(s, a) = g_a(s) + alpha * sum_s' p_a(s, s') max_a' Q(s', a').
QFunction bellman_H(const Mdp& mdp, const QFunction& Q);

// Value iteration from J = 0. The returned J satisfies
// ||J - TJ|| <= tol (1 - alpha) / (2 alpha), hence ||J - J*|| <= tol.
// With alpha = 0 a single sweep is exact.
ValueFunction value_iteration(const Mdp& mdp, double tol, int max_iter);

// Q iteration from Q = 0 with the same stopping rule as value_iteration.
QFunction q_value_iteration(const Mdp& mdp, double tol, int max_iter);

// Solves (I - alpha P_u) J = g_u.
ValueFunction policy_evaluation_exact(const Mdp& mdp, const Policy& u);

struct PolicyIterationResult {
  Policy policy;
  ValueFunction values;
  int iterations = 0;
};

// Howard policy iteration from the all-zero-action policy; stops when the
// greedy improvement reproduces the current policy.
PolicyIterationResult policy_iteration(const Mdp& mdp);

// Greedy one-step lookahead w.r.t. J, lowest action index on ties.
Policy greedy_policy(const Mdp& mdp, const ValueFunction& J);

// Row-wise argmax of Q, lowest action index on ties.
Policy greedy_from_q(const QFunction& Q);

struct StationaryOptions {
  // Mixes the chain toward uniform: (1 - lambda) P_u + lambda / n.
  double regularization = 0.0;
  double tol = 1e-13;
  int max_iter = 200000;
};

// Stationary distribution of P_u (or its regularized variant) by power
// iteration from the uniform distribution.
Vector stationary_distribution(const Mdp& mdp, const Policy& u,
                               const StationaryOptions& options = {});

}  // namespace mpadp
