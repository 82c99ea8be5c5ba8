#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "mpadp/adp_minplus.hpp"
#include "mpadp/error.hpp"
#include "mpadp/features.hpp"
#include "test_support.hpp"

using namespace mpadp;
using namespace mpadp::testing;

namespace {

// Oracle Q* by plain Q iteration, independent of the (V)AQI drivers.
QFunction q_oracle(const Mdp& mdp) { return q_value_iteration(mdp, 1e-12, 1000000); }

// Sup distance that treats equal infinities as zero and differing
// finiteness as infinite.
double weight_distance(const Vector& a, const Vector& b) {
  double out = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a[j] == inf || b[j] == inf) {
      if (a[j] != b[j]) return inf;
      continue;
    }
    out = std::max(out, std::abs(a[j] - b[j]));
  }
  return out;
}

}  // namespace

TEST_SUITE("aqi") {
  TEST_CASE("full basis reproduces Q*") {
    Gen gen(1);
    for (int trial = 0; trial < 10; ++trial) {
      const Mdp mdp = gen.rough_mdp(gen.integer(1, 8), gen.integer(1, 3), trial % 2 ? 0.9 : 0.5);
      const SpanBasis phi = build_full_basis(mdp.num_states() * mdp.num_actions());
      AqiOptions options;
      options.tol = 1e-9;
      const AqiResult result = aqi(mdp, phi, options);
      CHECK(sup_distance(result.q_approx.flat(), q_oracle(mdp).flat()) <= 1e-9 + 1e-11);
      CHECK(result.final_residual <= options.tol * (1.0 - mdp.discount()));
    }
  }

  TEST_CASE("single state scalar fixed point") {
    const Mdp mdp = single_state(5.0, 0.5);
    const SpanBasis phi(MinPlusMatrix(1, 1, 0.0));
    AqiOptions options;
    options.tol = 1e-12;
    const AqiResult result = aqi(mdp, phi, options);
    CHECK(result.weights[0] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(result.q_approx(0, 0) == result.weights[0]);
  }

  TEST_CASE("q_approx is basis times weights bit for bit") {
    Gen gen(2);
    for (int trial = 0; trial < 10; ++trial) {
      const Mdp mdp = gen.mdp(gen.integer(2, 10), gen.integer(1, 4), 0.9);
      const SpanBasis phi = build_reward_bins(mdp, gen.integer(1, 5));
      const AqiResult result = aqi(mdp, phi);
      CHECK(mp_mat_vec(phi.matrix(), result.weights) == result.q_approx.flat());
    }
  }

  TEST_CASE("fixed point and restart agreement on a 30x4 instance") {
    Gen gen(3);
    const Mdp mdp = gen.mdp(30, 4, 0.9);
    const SpanBasis phi = build_reward_bins(mdp, 5);
    AqiOptions options;
    options.tol = 1e-8;
    const AqiResult first = aqi(mdp, phi, options);
    const Vector v = first.q_approx.flat();
    CHECK(sup_distance(v, projected_bellman(mdp, phi, v)) <= options.tol);

    // Start far away: a projected random vector well above Q*.
    options.initial_weights = residuate(phi.matrix(), gen.vector(120, 500, 900));
    const AqiResult second = aqi(mdp, phi, options);
    const double allowed = 2.0 * options.tol / (1.0 - mdp.discount());
    CHECK(sup_distance(first.q_approx.flat(), second.q_approx.flat()) <= allowed);
    CHECK(weight_distance(first.weights, second.weights) <= allowed);
    CHECK(second.iterations > first.iterations);
  }

  TEST_CASE("residuals decay geometrically") {
    Gen gen(4);
    for (int trial = 0; trial < 20; ++trial) {
      const Mdp mdp = gen.rough_mdp(gen.integer(2, 10), gen.integer(1, 4), gen.uniform(0.3, 0.95));
      const SpanBasis phi(gen.minplus(mdp.num_states() * mdp.num_actions(), gen.integer(1, 5), 0.4));
      const AqiResult result = aqi(mdp, phi);
      const auto& trace = result.residual_trace;
      REQUIRE(static_cast<int>(trace.size()) == result.iterations);
      for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i] <= mdp.discount() * trace[i - 1] + 1e-12);
    }
  }

  TEST_CASE("convergence failure carries the trace") {
    Gen gen(5);
    const Mdp mdp = gen.mdp(10, 3, 0.99);
    const SpanBasis phi = build_reward_bins(mdp, 3);
    AqiOptions options;
    options.max_iter = 5;
    try {
      aqi(mdp, phi, options);
      FAIL("expected ConvergenceFailure");
    } catch (const ConvergenceFailure& e) {
      CHECK(e.residual_trace().size() == 5);
      CHECK(e.last_iterate().size() == 30);
    }
  }

  TEST_CASE("argument checks") {
    Gen gen(6);
    const Mdp mdp = gen.mdp(3, 2, 0.9);
    CHECK_THROWS_AS(aqi(mdp, build_full_basis(5)), InvalidArgument);
    AqiOptions options;
    options.tol = 0.0;
    CHECK_THROWS_AS(aqi(mdp, build_full_basis(6), options), InvalidArgument);
  }
}

TEST_SUITE("vaqi") {
  TEST_CASE("identity test matrix matches aqi exactly") {
    Gen gen(7);
    for (int trial = 0; trial < 15; ++trial) {
      const Mdp mdp = gen.rough_mdp(gen.integer(2, 10), gen.integer(1, 3), 0.8);
      const Eigen::Index rows = mdp.num_states() * mdp.num_actions();
      const SpanBasis phi(gen.minplus(rows, gen.integer(1, 4), 0.3));
      const AqiResult a = aqi(mdp, phi);
      const AqiResult b = vaqi(mdp, phi, MinPlusMatrix::identity(rows));
      CHECK(a.iterations == b.iterations);
      CHECK(a.q_approx.flat() == b.q_approx.flat());
      CHECK(a.residual_trace == b.residual_trace);
    }
  }

  TEST_CASE("features as test vectors converge within the bound") {
    Gen gen(8);
    for (int trial = 0; trial < 10; ++trial) {
      const Mdp mdp = gen.mdp(gen.integer(4, 12), gen.integer(2, 4), 0.9);
      const SpanBasis phi = build_reward_bins(mdp, gen.integer(2, 5));
      const MinPlusMatrix W = build_test_matrix(parse_test_matrix_spec("features"), phi, {}, 0);
      const AqiResult result = vaqi(mdp, phi, W);
      const Vector v = result.q_approx.flat();
      CHECK(sup_distance(v, projected_bellman_variational(mdp, phi, W, v)) <= 1e-8);
      const ErrorBoundReport report = error_bound_report(mdp, phi, W, result, q_oracle(mdp));
      CHECK(report.measured <= report.bound + 1e-9);
    }
  }

  TEST_CASE("single aggregate test vector against a brute-force fixed point") {
    // Two states, one action, identity features, W = one all-zero column.
    Matrix g(2, 1);
    g << 1.0, 3.0;
    Matrix P(2, 2);
    P << 0.3, 0.7, 0.6, 0.4;
    const Mdp mdp(g, {P}, 0.5);
    const SpanBasis phi = build_full_basis(2);
    const MinPlusMatrix W(2, 1, 0.0);
    AqiOptions options;
    options.tol = 1e-10;
    const AqiResult result = vaqi(mdp, phi, W, options);
    const Vector v = result.q_approx.flat();
    CHECK(v[0] == v[1]);

    double best_defect = inf;
    Vector best(2);
    for_each_grid_point(2, 0.0, 0.01, 801, [&](const Vector& r) {
      const Vector candidate = loop_mat_vec(phi.matrix(), r);
      const double defect = sup_distance(candidate, projected_bellman_variational(mdp, phi, W, candidate));
      if (defect < best_defect) {
        best_defect = defect;
        best = candidate;
      }
    });
    // min(g) / (1 - alpha) = 2 sits on the grid.
    CHECK(best_defect <= 1e-12);
    CHECK(sup_distance(best, v) <= 1e-8);
    CHECK(v[0] == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("restart agreement") {
    Gen gen(9);
    const Mdp mdp = gen.mdp(12, 3, 0.85);
    const SpanBasis phi = build_reward_bins(mdp, 4, InfinityMode::with_sentinel(1000.0));
    const MinPlusMatrix W = random_binary_test_matrix(36, 7, 0.3, InfinityMode::with_sentinel(1000.0), 17);
    AqiOptions options;
    const AqiResult a = vaqi(mdp, phi, W, options);
    options.initial_weights = Vector::Constant(4, -50.0);
    const AqiResult b = vaqi(mdp, phi, W, options);
    CHECK(sup_distance(a.q_approx.flat(), b.q_approx.flat()) <= 2.0 * options.tol / (1.0 - mdp.discount()));
  }
}

TEST_SUITE("projected contraction") {
  TEST_CASE("exact projection") {
    Gen gen(10);
    for (int pair = 0; pair < 500; ++pair) {
      const Mdp mdp = gen.rough_mdp(gen.integer(1, 6), gen.integer(1, 3), gen.uniform(0.0, 0.99));
      const Eigen::Index rows = mdp.num_states() * mdp.num_actions();
      const SpanBasis phi(gen.minplus(rows, gen.integer(1, 4), 0.4, -5, 5));
      const Vector q1 = gen.vector(rows, -20, 20);
      const Vector q2 = gen.coin(0.5) ? Vector(q1 + gen.vector(rows, -0.5, 0.5)) : gen.vector(rows, -20, 20);
      const double lhs = sup_distance(projected_bellman(mdp, phi, q1), projected_bellman(mdp, phi, q2));
      CHECK(lhs <= mdp.discount() * sup_distance(q1, q2) + 1e-12);
    }
  }

  TEST_CASE("variational projection") {
    Gen gen(11);
    for (int pair = 0; pair < 500; ++pair) {
      const Mdp mdp = gen.rough_mdp(gen.integer(1, 6), gen.integer(1, 3), gen.uniform(0.0, 0.99));
      const Eigen::Index rows = mdp.num_states() * mdp.num_actions();
      const Eigen::Index m = gen.integer(1, 6);
      // Either the basis or the test matrix is dense so that every weight is finite.
      const bool dense_basis = gen.coin(0.5);
      const SpanBasis phi(gen.minplus(rows, gen.integer(1, 4), dense_basis ? 0.0 : 0.4, -5, 5));
      const MinPlusMatrix W = dense_basis ? gen.minplus(m, rows, 0.6, -2, 2).transpose()
                                          : gen.minplus(rows, m, 0.0, -2, 2);
      const Vector q1 = gen.vector(rows, -20, 20);
      const Vector q2 = gen.coin(0.5) ? Vector(q1 + gen.vector(rows, -0.5, 0.5)) : gen.vector(rows, -20, 20);
      const double lhs = sup_distance(projected_bellman_variational(mdp, phi, W, q1),
                                      projected_bellman_variational(mdp, phi, W, q2));
      CHECK(lhs <= mdp.discount() * sup_distance(q1, q2) + 1e-12);
    }
  }

  TEST_CASE("projection majorizes what it projects") {
    Gen gen(12);
    for (int trial = 0; trial < 100; ++trial) {
      const Mdp mdp = gen.rough_mdp(gen.integer(1, 6), gen.integer(1, 3), 0.9);
      const Eigen::Index rows = mdp.num_states() * mdp.num_actions();
      const SpanBasis phi(gen.minplus(rows, gen.integer(1, 4), 0.4));
      const Vector q = gen.vector(rows, -10, 10);
      const Vector hq = bellman_H(mdp, QFunction(mdp.num_states(), mdp.num_actions(), q)).flat();
      CHECK(all_geq(projected_bellman(mdp, phi, q), hq, 1e-12));
    }
  }
}

TEST_SUITE("best approximation") {
  TEST_CASE("constant basis midpoint") {
    const SpanBasis phi(MinPlusMatrix(2, 1, 0.0));
    Vector target(2);
    target << 1.0, 2.0;
    const BestApproximation best = best_sup_norm_weights(phi, target);
    CHECK(best.weights[0] == 1.5);
    CHECK(best.epsilon == 0.5);
  }

  TEST_CASE("targets in the span have zero error") {
    Gen gen(13);
    for (int trial = 0; trial < 30; ++trial) {
      const SpanBasis phi(gen.minplus(8, 3, 0.3));
      const Vector target = loop_mat_vec(phi.matrix(), gen.vector(3, -4, 4));
      const BestApproximation best = best_sup_norm_weights(phi, target);
      CHECK(best.epsilon <= 1e-12);
      CHECK(sup_distance(mp_mat_vec(phi.matrix(), best.weights), target) <= 1e-12);
    }
  }

  TEST_CASE("achieved error equals epsilon") {
    Gen gen(14);
    for (int trial = 0; trial < 50; ++trial) {
      const SpanBasis phi(gen.minplus(gen.integer(1, 10), gen.integer(1, 4), 0.3));
      const Vector target = gen.vector(phi.rows(), 0, 10);
      const BestApproximation best = best_sup_norm_weights(phi, target);
      CHECK(sup_distance(mp_mat_vec(phi.matrix(), best.weights), target) ==
            doctest::Approx(best.epsilon).epsilon(1e-12));
    }
  }

  TEST_CASE("grid search cannot beat epsilon on 6x2 bases") {
    Gen gen(15);
    for (int trial = 0; trial < 4; ++trial) {
      const SpanBasis phi(gen.minplus(6, 2, 0.3));
      const Vector target = gen.vector(6, 0, 10);
      const BestApproximation best = best_sup_norm_weights(phi, target);

      const auto error_at = [&](const Vector& r) { return sup_distance(loop_mat_vec(phi.matrix(), r), target); };
      double coarse = inf;
      for_each_grid_point(2, -6.0, 0.05, 341, [&](const Vector& r) { coarse = std::min(coarse, error_at(r)); });
      CHECK(coarse >= best.epsilon - 1e-12);

      double fine = inf;
      Vector centre = best.weights;
      for (Eigen::Index j = 0; j < 2; ++j)
        if (centre[j] == inf) centre[j] = 0.0;
      for_each_grid_point(2, 0.0, 1e-3, 1001, [&](const Vector& offset) {
        const Vector r = centre + offset - Vector::Constant(2, 0.5);
        fine = std::min(fine, error_at(r));
      });
      CHECK(fine >= best.epsilon - 1e-12);
      CHECK(fine <= best.epsilon + 1e-3);
    }
  }
}

TEST_SUITE("error bound") {
  TEST_CASE("identity test matrix gives beta zero") {
    Gen gen(16);
    for (int trial = 0; trial < 10; ++trial) {
      const Mdp mdp = gen.mdp(10, gen.integer(2, 4), 0.9);
      const SpanBasis phi = build_reward_bins(mdp, 4);
      const Eigen::Index rows = phi.rows();
      const AqiResult result = aqi(mdp, phi);
      const ErrorBoundReport report = error_bound_report(mdp, phi, MinPlusMatrix::identity(rows), result, q_oracle(mdp));
      CHECK(report.beta == 0.0);
      CHECK(report.bound == 2.0 * report.epsilon / (1.0 - mdp.discount()));
      CHECK(report.measured <= report.bound + 1e-9);
      CHECK(report.stated_bound == doctest::Approx(2.0 / 1.9 * report.epsilon));
    }
  }

  TEST_CASE("Q* in the span") {
    Gen gen(17);
    const Mdp mdp = gen.rough_mdp(4, 2, 0.7);
    const SpanBasis phi = build_full_basis(8);
    AqiOptions options;
    options.tol = 1e-10;
    const AqiResult result = aqi(mdp, phi, options);
    const ErrorBoundReport report = error_bound_report(mdp, phi, MinPlusMatrix::identity(8), result, q_oracle(mdp));
    CHECK(report.epsilon == 0.0);
    CHECK(report.beta == 0.0);
    CHECK(report.measured <= 2e-10);
  }

  TEST_CASE("random test matrices") {
    Gen gen(18);
    const InfinityMode sentinel = InfinityMode::with_sentinel(1000.0);
    for (int trial = 0; trial < 10; ++trial) {
      const Mdp mdp = gen.mdp(gen.integer(5, 15), gen.integer(2, 4), 0.9);
      const SpanBasis phi = build_reward_bins(mdp, gen.integer(2, 5), sentinel);
      const MinPlusMatrix W = random_binary_test_matrix(phi.rows(), gen.integer(1, 8), 0.2, sentinel, gen.seed());
      const AqiResult result = vaqi(mdp, phi, W);
      const ErrorBoundReport report = error_bound_report(mdp, phi, W, result, q_oracle(mdp));
      CHECK(report.beta >= 0.0);
      CHECK(report.measured <= report.bound + 1e-9);
    }
  }

  TEST_CASE("violation is reported") {
    Gen gen(19);
    const Mdp mdp = gen.mdp(5, 2, 0.9);
    const SpanBasis phi = build_reward_bins(mdp, 2);
    AqiResult result = aqi(mdp, phi);
    result.q_approx = QFunction(5, 2, Vector::Constant(10, 1e6));
    CHECK_THROWS_AS(error_bound_report(mdp, phi, MinPlusMatrix::identity(10), result, q_oracle(mdp)),
                    InvariantViolation);
  }
}

TEST_SUITE("greedy policies") {
  TEST_CASE("Q* gives J*") {
    Gen gen(20);
    for (int trial = 0; trial < 10; ++trial) {
      const Mdp mdp = gen.rough_mdp(gen.integer(2, 10), gen.integer(1, 4), 0.9);
      const QFunction q = q_oracle(mdp);
      const GreedyEvaluation out = greedy_and_evaluate(mdp, q);
      CHECK(sup_distance(out.values, q.state_max()) <= 1e-6);
    }
  }

  TEST_CASE("full basis aqi gives J*") {
    Gen gen(21);
    const Mdp mdp = gen.mdp(8, 3, 0.9);
    const AqiResult result = aqi(mdp, build_full_basis(24));
    const GreedyEvaluation out = greedy_and_evaluate(mdp, result.q_approx);
    CHECK(sup_distance(out.values, policy_iteration(mdp).values) <= 1e-7);
  }

  TEST_CASE("constant rows pick the lowest action") {
    Gen gen(22);
    const Mdp mdp = gen.mdp(4, 3, 0.9);
    QFunction q(4, 3);
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 3; ++a) q(s, a) = 7.0 + s;
    CHECK(greedy_and_evaluate(mdp, q).policy == Policy{0, 0, 0, 0});
    q(2, 1) = inf;
    CHECK_THROWS_AS(greedy_and_evaluate(mdp, q), InvalidArgument);
  }

  TEST_CASE("suboptimality chain on aqi fixed points") {
    Gen gen(23);
    for (int trial = 0; trial < 20; ++trial) {
      const Mdp mdp = gen.mdp(gen.integer(5, 20), gen.integer(2, 4), 0.9);
      const SpanBasis phi = build_reward_bins(mdp, gen.integer(2, 6));
      const AqiResult result = aqi(mdp, phi);
      const QFunction q_star = q_oracle(mdp);
      const Vector j_star = q_star.state_max();
      const GreedyEvaluation out = greedy_and_evaluate(mdp, result.q_approx);
      const double factor = 2.0 / (1.0 - mdp.discount());
      CHECK(sup_distance(out.values, j_star) <= factor * sup_distance(result.q_approx.state_max(), j_star) + 1e-9);
      CHECK(sup_distance(out.values, j_star) <= factor * sup_distance(result.q_approx.flat(), q_star.flat()) + 1e-9);
    }
  }
}

TEST_SUITE("serialization") {
  TEST_CASE("result json and residual csv") {
    const Mdp mdp = single_state(5.0, 0.5);
    const SpanBasis phi(MinPlusMatrix(1, 1, 0.0));
    const AqiResult result = aqi(mdp, phi);
    const nlohmann::json doc = to_json(result);
    CHECK(doc.at("iterations").get<int>() == result.iterations);
    CHECK(doc.at("n").get<int>() == 1);
    CHECK(doc.at("weights").size() == 1);

    const std::string csv = residual_trace_csv({0.5, 0.25});
    CHECK(csv == "iteration,residual\n1,0.5\n2,0.25\n");

    ErrorBoundReport report;
    report.epsilon = 1.0;
    report.bound = 20.0;
    const nlohmann::json bound = to_json(report);
    CHECK(bound.at("epsilon").get<double>() == 1.0);
    CHECK(bound.contains("stated_bound"));
  }

  TEST_CASE("weights with empty bins serialize as inf") {
    Matrix g(2, 1);
    g << 1.0, 10.0;
    const Mdp mdp(g, {Matrix::Identity(2, 2)}, 0.5);
    const SpanBasis phi = build_reward_bins(mdp, 3);
    const AqiResult result = aqi(mdp, phi);
    CHECK(result.weights[1] == inf);
    CHECK(to_json(result).at("weights")[1] == "inf");
  }
}
