#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpadp/mdp.hpp"
#include "mpadp/minplus.hpp"

namespace mpadp {

// Outcome of approximate Q iteration, exact (AQI) or variational (VAQI).
// q_approx is basis (x) weights reshaped to n x d, bit for bit.
struct AqiResult {
  MinPlusVector weights;
  QFunction q_approx;
  int iterations = 0;
  double final_residual = 0.0;
  // ||v_{k+1} - v_k|| after every sweep.
  std::vector<double> residual_trace;
};

struct AqiOptions {
  double tol = 1e-8;
  int max_iter = 100000;
  // Start from basis (x) initial_weights instead of the projected rewards.
  std::optional<MinPlusVector> initial_weights;
};

// Pi_M H Q and Pi^W_M H Q on flattened Q-functions.
MinPlusVector projected_bellman(const Mdp& mdp, const SpanBasis& basis, const MinPlusVector& q);
MinPlusVector projected_bellman_variational(const Mdp& mdp, const SpanBasis& basis,
                                            const MinPlusMatrix& W, const MinPlusVector& q);

// Iterates v_{k+1} = Pi_M H v_k from v_0 = Pi_M g until
// ||v_{k+1} - v_k|| <= tol (1 - alpha), which puts the final iterate within
// tol of the unique fixed point.
AqiResult aqi(const Mdp& mdp, const SpanBasis& basis, const AqiOptions& options = {});

// Same iteration with the variational projection Pi^W_M.
AqiResult vaqi(const Mdp& mdp, const SpanBasis& basis, const MinPlusMatrix& W,
               const AqiOptions& options = {});

struct BestApproximation {
  MinPlusVector weights;
  double epsilon = 0.0;
};

// Sup-norm best approximation of target in span(basis): the least majorant
// shifted down by half its distance to target.
BestApproximation best_sup_norm_weights(const SpanBasis& basis, const MinPlusVector& target);

// Error of a (V)AQI fixed point against the exact Q*.
//
// bound = (2 epsilon + beta) / (1 - alpha), where epsilon is the best
// sup-norm approximation error of Q* in the span and
// beta = ||v~ - Pi^W_M v~|| at the best approximant v~. This is the constant
// the telescoping argument actually delivers; the tighter-looking
// 2 / (1 + alpha) (epsilon + beta) is reported as stated_bound for
// comparison only and is not enforced.
struct ErrorBoundReport {
  double epsilon = 0.0;
  double beta = 0.0;
  double bound = 0.0;
  double stated_bound = 0.0;
  double measured = 0.0;
};

// Throws InvariantViolation when measured > bound + slack.
ErrorBoundReport error_bound_report(const Mdp& mdp, const SpanBasis& basis,
                                    const MinPlusMatrix& W, const AqiResult& result,
                                    const QFunction& q_star, double slack = 1e-9);

struct GreedyEvaluation {
  Policy policy;
  ValueFunction values;
};

// Greedy policy of q_approx and its exact value function.
GreedyEvaluation greedy_and_evaluate(const Mdp& mdp, const QFunction& q_approx);

nlohmann::json to_json(const AqiResult& result);
nlohmann::json to_json(const ErrorBoundReport& report);
// "iteration,residual" header then one line per sweep, 1-based.
std::string residual_trace_csv(const std::vector<double>& trace);

}  // namespace mpadp
