#include "mpadp/mdp.hpp"

#include <cmath>
#include <string>

#include "mpadp/error.hpp"

namespace mpadp {

namespace {

constexpr double kRowSumTolerance = 1e-12;

void require_length(const Vector& v, int expected, const char* what) {
  if (v.size() != expected) {
    throw InvalidArgument(std::string(what) + ": expected length " +
                          std::to_string(expected) + ", got " +
                          std::to_string(v.size()));
  }
}

void require_shape(const QFunction& Q, const Mdp& mdp) {
  if (Q.num_states() != mdp.num_states() || Q.num_actions() != mdp.num_actions()) {
    throw InvalidArgument("Q-function shape does not match the MDP");
  }
}

// Contraction stopping threshold on ||x_{k+1} - x_k||.
double stopping_threshold(double tol, double alpha) {
  return tol * (1.0 - alpha) / (2.0 * alpha);
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Mdp::Mdp(Matrix rewards, std::vector<Matrix> transitions, double discount)
    : rewards_(std::move(rewards)),
      transitions_(std::move(transitions)),
      discount_(discount) {
  const auto n = rewards_.rows();
  const auto d = rewards_.cols();
  if (n < 1 || d < 1) {
    throw InvalidArgument("MDP needs at least one state and one action");
  }
  if (!(discount_ >= 0.0 && discount_ < 1.0)) {
    throw InvalidArgument("discount must lie in [0, 1), got " + std::to_string(discount_));
  }
  if (!rewards_.allFinite()) {
    throw InvalidArgument("rewards must be finite");
  }
  if (static_cast<Eigen::Index>(transitions_.size()) != d) {
    throw InvalidArgument("expected one transition matrix per action");
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    const Matrix& P = transitions_[a];
    if (P.rows() != n || P.cols() != n) {
      throw InvalidArgument("transition matrix for action " + std::to_string(a) +
                            " is not " + std::to_string(n) + "x" + std::to_string(n));
    }
    for (Eigen::Index s = 0; s < n; ++s) {
      double sum = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) {
        const double p = P(s, t);
        if (!(p >= 0.0) || !std::isfinite(p)) {
          throw InvalidArgument("negative or non-finite probability in action " +
                                std::to_string(a) + ", row " + std::to_string(s));
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw InvalidArgument("transition row " + std::to_string(s) + " of action " +
                              std::to_string(a) + " sums to " + std::to_string(sum));
      }
    }
  }
}

void Mdp::check_policy(const Policy& u) const {
  if (static_cast<int>(u.size()) != num_states()) {
    throw InvalidArgument("policy length " + std::to_string(u.size()) +
                          " does not match " + std::to_string(num_states()) + " states");
  }
  for (std::size_t s = 0; s < u.size(); ++s) {
    if (u[s] < 0 || u[s] >= num_actions()) {
      throw InvalidArgument("policy action " + std::to_string(u[s]) + " at state " +
                            std::to_string(s) + " is out of range");
    }
  }
}

Matrix Mdp::policy_kernel(const Policy& u) const {
  check_policy(u);
  const int n = num_states();
  Matrix P(n, n);
  for (int s = 0; s < n; ++s) P.row(s) = transitions_[u[s]].row(s);
  return P;
}

Vector Mdp::policy_rewards(const Policy& u) const {
  check_policy(u);
  Vector g(num_states());
  for (int s = 0; s < num_states(); ++s) g[s] = rewards_(s, u[s]);
  return g;
}

Vector Mdp::flat_rewards() const {
  const int n = num_states();
  const int d = num_actions();
  Vector g(static_cast<Eigen::Index>(n) * d);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < d; ++a) g[QFunction::index(s, a, d)] = rewards_(s, a);
  return g;
}

QFunction::QFunction(int num_states, int num_actions)
    : QFunction(num_states, num_actions,
                Vector::Zero(static_cast<Eigen::Index>(num_states) * num_actions)) {}

QFunction::QFunction(int num_states, int num_actions, Vector flat)
    : n_(num_states), d_(num_actions), flat_(std::move(flat)) {
  if (n_ < 1 || d_ < 1) throw InvalidArgument("Q-function needs n, d >= 1");
  if (flat_.size() != static_cast<Eigen::Index>(n_) * d_) {
    throw InvalidArgument("Q-function storage must have n*d entries");
  }
}

ValueFunction QFunction::state_max() const {
  ValueFunction J(n_);
  for (int s = 0; s < n_; ++s) J[s] = flat_.segment(static_cast<Eigen::Index>(s) * d_, d_).maxCoeff();
  return J;
}

double sup_norm(const Vector& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

double sup_distance(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw InvalidArgument("sup_distance: length mismatch");
  return sup_norm(x - y);
}

ValueFunction bellman_T(const Mdp& mdp, const ValueFunction& J) {
  require_length(J, mdp.num_states(), "bellman_T");
  const double alpha = mdp.discount();
  ValueFunction out = mdp.rewards().col(0) + alpha * (mdp.transition(0) * J);
  for (int a = 1; a < mdp.num_actions(); ++a) {
    out = out.cwiseMax(mdp.rewards().col(a) + alpha * (mdp.transition(a) * J));
  }
  return out;
}

ValueFunction bellman_T_u(const Mdp& mdp, const Policy& u, const ValueFunction& J) {
  require_length(J, mdp.num_states(), "bellman_T_u");
  mdp.check_policy(u);
  const double alpha = mdp.discount();
  ValueFunction out(mdp.num_states());
  for (int s = 0; s < mdp.num_states(); ++s) {
    out[s] = mdp.reward(s, u[s]) + alpha * mdp.transition(u[s]).row(s).dot(J);
  }
  return out;
}

QFunction bellman_H(const Mdp& mdp, const QFunction& Q) {
  require_shape(Q, mdp);
  const ValueFunction J = Q.state_max();
  const double alpha = mdp.discount();
  QFunction out(mdp.num_states(), mdp.num_actions());
  for (int a = 0; a < mdp.num_actions(); ++a) {
    const Vector col = mdp.rewards().col(a) + alpha * (mdp.transition(a) * J);
    for (int s = 0; s < mdp.num_states(); ++s) out(s, a) = col[s];
  }
  return out;
}

ValueFunction value_iteration(const Mdp& mdp, double tol, int max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("value_iteration: tol must be positive");
  ValueFunction J = ValueFunction::Zero(mdp.num_states());
  if (mdp.discount() == 0.0) return bellman_T(mdp, J);

  const double threshold = stopping_threshold(tol, mdp.discount());
  std::vector<double> trace;
  for (int it = 0; it < max_iter; ++it) {
    ValueFunction next = bellman_T(mdp, J);
    const double residual = sup_distance(next, J);
    trace.push_back(residual);
    J = std::move(next);
    // J is now T J_prev, so ||J - T J|| <= alpha * residual as well.
    if (residual <= threshold) return J;
  }
  throw ConvergenceFailure("value_iteration: no convergence in " + std::to_string(max_iter) +
                               " iterations",
                           to_std(J), std::move(trace));
}

QFunction q_value_iteration(const Mdp& mdp, double tol, int max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("q_value_iteration: tol must be positive");
  QFunction Q(mdp.num_states(), mdp.num_actions());
  if (mdp.discount() == 0.0) return bellman_H(mdp, Q);

  const double threshold = stopping_threshold(tol, mdp.discount());
  std::vector<double> trace;
  for (int it = 0; it < max_iter; ++it) {
    QFunction next = bellman_H(mdp, Q);
    const double residual = sup_distance(next.flat(), Q.flat());
    trace.push_back(residual);
    Q = std::move(next);
    if (residual <= threshold) return Q;
  }
  throw ConvergenceFailure("q_value_iteration: no convergence in " +
                               std::to_string(max_iter) + " iterations",
                           to_std(Q.flat()), std::move(trace));
}

ValueFunction policy_evaluation_exact(const Mdp& mdp, const Policy& u) {
  const int n = mdp.num_states();
  const Matrix A = Matrix::Identity(n, n) - mdp.discount() * mdp.policy_kernel(u);
  const Vector g = mdp.policy_rewards(u);
  Eigen::PartialPivLU<Matrix> lu(A);
  ValueFunction J = lu.solve(g);
  if (!J.allFinite()) throw NumericError("policy_evaluation_exact: linear solve failed");
  return J;
}

PolicyIterationResult policy_iteration(const Mdp& mdp) {
  const int cap = 10 * mdp.num_states() + 10;
  PolicyIterationResult result;
  result.policy.assign(mdp.num_states(), 0);
  for (int it = 0; it < cap; ++it) {
    result.values = policy_evaluation_exact(mdp, result.policy);
    result.iterations = it + 1;
    Policy improved = greedy_policy(mdp, result.values);
    if (improved == result.policy) return result;
    result.policy = std::move(improved);
  }
  throw ConvergenceFailure("policy_iteration: policy still changing after " +
                               std::to_string(cap) + " improvements",
                           to_std(result.values), {});
}

Policy greedy_policy(const Mdp& mdp, const ValueFunction& J) {
  require_length(J, mdp.num_states(), "greedy_policy");
  const double alpha = mdp.discount();
  Policy u(mdp.num_states(), 0);
  Vector best = mdp.rewards().col(0) + alpha * (mdp.transition(0) * J);
  for (int a = 1; a < mdp.num_actions(); ++a) {
    const Vector value = mdp.rewards().col(a) + alpha * (mdp.transition(a) * J);
    for (int s = 0; s < mdp.num_states(); ++s) {
      if (value[s] > best[s]) {
        best[s] = value[s];
        u[s] = a;
      }
    }
  }
  return u;
}

Policy greedy_from_q(const QFunction& Q) {
  Policy u(Q.num_states(), 0);
  for (int s = 0; s < Q.num_states(); ++s) {
    double best = Q(s, 0);
    for (int a = 1; a < Q.num_actions(); ++a) {
      if (Q(s, a) > best) {
        best = Q(s, a);
        u[s] = a;
      }
    }
  }
  return u;
}

Vector stationary_distribution(const Mdp& mdp, const Policy& u,
                               const StationaryOptions& options) {
  const double lambda = options.regularization;
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidArgument("stationary_distribution: regularization must lie in [0, 1]");
  }
  const int n = mdp.num_states();
  const Matrix P = (1.0 - lambda) * mdp.policy_kernel(u) +
                   Matrix::Constant(n, n, lambda / static_cast<double>(n));
  const Matrix Pt = P.transpose();

  Vector pi = Vector::Constant(n, 1.0 / n);
  for (int it = 0; it < options.max_iter; ++it) {
    Vector next = Pt * pi;
    next /= next.sum();
    const double change = (next - pi).lpNorm<1>();
    pi = std::move(next);
    if (change <= options.tol) break;
  }
  const double residual = sup_norm(Pt * pi - pi);
  if (!(residual <= 1e-10)) {
    throw NumericError(
        "stationary_distribution: power iteration did not converge (residual " +
        std::to_string(residual) +
        "); the chain may be periodic or reducible, retry with regularization > 0");
  }
  return pi;
}

}  // namespace mpadp
