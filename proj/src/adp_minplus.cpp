#include "mpadp/adp_minplus.hpp"

#include <cstdio>
#include <functional>
#include <sstream>

#include "mpadp/error.hpp"
#include "mpadp/mdp_io.hpp"

namespace mpadp {

namespace {

using WeightMap = std::function<MinPlusVector(const MinPlusVector&)>;

void require_rows(const Mdp& mdp, const SpanBasis& basis) {
  const Eigen::Index rows = static_cast<Eigen::Index>(mdp.num_states()) * mdp.num_actions();
  if (basis.rows() != rows) {
    throw InvalidArgument("basis has " + std::to_string(basis.rows()) +
                          " rows, MDP needs n*d = " + std::to_string(rows));
  }
}

MinPlusVector apply_h(const Mdp& mdp, const MinPlusVector& q) {
  return bellman_H(mdp, QFunction(mdp.num_states(), mdp.num_actions(), q)).flat();
}

void require_finite(const MinPlusVector& v, const char* what) {
  if (!v.allFinite()) throw ProjectionUndefined(std::string(what) + ": iterate left the finite range");
}

// Shared driver: `weights_of` maps a target Q-vector to the projection
// weights, so one sweep is v <- basis (x) weights_of(H v).
AqiResult projected_q_iteration(const Mdp& mdp, const SpanBasis& basis, const WeightMap& weights_of,
                                const AqiOptions& options, const char* name) {
  if (!(options.tol > 0.0)) throw InvalidArgument(std::string(name) + ": tol must be positive");
  const MinPlusMatrix& phi = basis.matrix();

  MinPlusVector v;
  if (options.initial_weights) {
    v = mp_mat_vec(phi, *options.initial_weights);
  } else {
    v = mp_mat_vec(phi, weights_of(mdp.flat_rewards()));
  }
  require_finite(v, name);

  const double threshold = options.tol * (1.0 - mdp.discount());
  std::vector<double> trace;
  for (int it = 1; it <= options.max_iter; ++it) {
    MinPlusVector r = weights_of(apply_h(mdp, v));
    MinPlusVector next = mp_mat_vec(phi, r);
    require_finite(next, name);
    const double residual = sup_distance(next, v);
    trace.push_back(residual);
    v = std::move(next);
    if (residual <= threshold) {
      AqiResult result{std::move(r), QFunction(mdp.num_states(), mdp.num_actions(), v), it,
                       residual, std::move(trace)};
      return result;
    }
  }
  throw ConvergenceFailure(std::string(name) + ": no convergence in " +
                               std::to_string(options.max_iter) + " iterations",
                           std::vector<double>(v.data(), v.data() + v.size()), std::move(trace));
}

}  // namespace

MinPlusVector projected_bellman(const Mdp& mdp, const SpanBasis& basis, const MinPlusVector& q) {
  require_rows(mdp, basis);
  return project(basis, apply_h(mdp, q));
}

MinPlusVector projected_bellman_variational(const Mdp& mdp, const SpanBasis& basis,
                                            const MinPlusMatrix& W, const MinPlusVector& q) {
  require_rows(mdp, basis);
  return project_variational(basis, W, apply_h(mdp, q));
}

AqiResult aqi(const Mdp& mdp, const SpanBasis& basis, const AqiOptions& options) {
  require_rows(mdp, basis);
  const WeightMap weights_of = [&basis](const MinPlusVector& u) {
    return residuate(basis.matrix(), u);
  };
  return projected_q_iteration(mdp, basis, weights_of, options, "aqi");
}

AqiResult vaqi(const Mdp& mdp, const SpanBasis& basis, const MinPlusMatrix& W,
               const AqiOptions& options) {
  require_rows(mdp, basis);
  const WeightMap weights_of = [&basis, &W](const MinPlusVector& u) {
    return variational_weights(basis, W, u);
  };
  return projected_q_iteration(mdp, basis, weights_of, options, "vaqi");
}

BestApproximation best_sup_norm_weights(const SpanBasis& basis, const MinPlusVector& target) {
  MinPlusVector r = residuate(basis.matrix(), target);
  const double delta = sup_distance(mp_mat_vec(basis.matrix(), r), target);
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (r[j] != kInf) r[j] -= delta / 2.0;
  }
  return {std::move(r), delta / 2.0};
}

ErrorBoundReport error_bound_report(const Mdp& mdp, const SpanBasis& basis,
                                    const MinPlusMatrix& W, const AqiResult& result,
                                    const QFunction& q_star, double slack) {
  require_rows(mdp, basis);
  const double alpha = mdp.discount();
  const BestApproximation best = best_sup_norm_weights(basis, q_star.flat());
  const MinPlusVector v_best = mp_mat_vec(basis.matrix(), best.weights);

  ErrorBoundReport report;
  report.epsilon = best.epsilon;
  report.beta = sup_distance(v_best, project_variational(basis, W, v_best));
  report.bound = (2.0 * report.epsilon + report.beta) / (1.0 - alpha);
  report.stated_bound = 2.0 / (1.0 + alpha) * (report.epsilon + report.beta);
  report.measured = sup_distance(q_star.flat(), result.q_approx.flat());
  if (report.measured > report.bound + slack) {
    throw InvariantViolation("error bound violated: measured " + std::to_string(report.measured) +
                             " > (2 eps + beta) / (1 - alpha) = " + std::to_string(report.bound));
  }
  return report;
}

GreedyEvaluation greedy_and_evaluate(const Mdp& mdp, const QFunction& q_approx) {
  if (!q_approx.flat().allFinite()) throw InvalidArgument("greedy_and_evaluate: Q must be finite");
  GreedyEvaluation out;
  out.policy = greedy_from_q(q_approx);
  out.values = policy_evaluation_exact(mdp, out.policy);
  return out;
}

nlohmann::json to_json(const AqiResult& result) {
  return {{"weights", minplus_vector_to_json(result.weights)},
          {"n", result.q_approx.num_states()},
          {"d", result.q_approx.num_actions()},
          {"q_approx", vector_to_json(result.q_approx.flat())},
          {"iterations", result.iterations},
          {"final_residual", result.final_residual}};
}

nlohmann::json to_json(const ErrorBoundReport& report) {
  return {{"epsilon", report.epsilon},
          {"beta", report.beta},
          {"bound", report.bound},
          {"stated_bound", report.stated_bound},
          {"measured", report.measured}};
}

std::string residual_trace_csv(const std::vector<double>& trace) {
  std::ostringstream out;
  out << "iteration,residual\n";
  char buf[40];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", trace[i]);
    out << (i + 1) << ',' << buf << '\n';
  }
  return out.str();
}

}  // namespace mpadp
