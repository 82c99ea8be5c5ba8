#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "mpadp/features.hpp"
#include "mpadp/mdp.hpp"
#include "mpadp/rng.hpp"

namespace mpadp {

// Random MDP with integer rewards drawn uniformly from reward_range
// (inclusive) and dense transition rows.
//
// Stream order on one Rng(seed): rewards in (s, a) order, then for every
// action a and state s the n weights of row p_a(s, .), each uniform on
// (0, 1], normalized by their sum. Every policy therefore induces an
// irreducible chain. Changing this order changes every generated instance.
Mdp random_mdp(int n, int d, double alpha, std::pair<int, int> reward_range, std::uint64_t seed);

// Continues an existing stream; random_mdp(..., seed) is this on Rng(seed).
Mdp random_mdp(int n, int d, double alpha, std::pair<int, int> reward_range, Rng& rng);

// One uniformly random action per state.
Policy random_policy(int n, int d, Rng& rng);

struct ExperimentConfig {
  int n = 100;
  int d = 5;
  double alpha = 0.9;
  std::pair<int, int> reward_range{1, 10};
  FeatureSpec features{FeatureSpec::Kind::reward_bins, 5, {}, InfinityMode::with_sentinel(1000.0)};
  std::uint64_t seed = 1;
  // Subset of {"exact", "aqi", "vaqi", "ape", "api"}; the exact oracle always runs.
  std::set<std::string> solvers{"exact", "aqi", "vaqi"};
  TestMatrixSpec test_matrix{TestMatrixSpec::Kind::random_binary, 0, 0.01};
  double exact_tol = 1e-10;
  double approx_tol = 1e-8;
  int max_iter = 100000;
  int api_iters = 50;

  // Throws InvalidArgument on an inconsistent configuration.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
// Missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& doc);

// Curves are per-state vectors keyed by name:
//   J_star, J_tilde_EP, J_tilde_W, J_u_EP, J_u_W, J_u_arbt  (and J_ape_arbt,
//   J_u_api when the conventional baselines run).
// errors[name] = ||J_star - curves[name]||_inf for every other curve.
struct ExperimentReport {
  ExperimentConfig config;
  std::map<std::string, Vector> curves;
  std::map<std::string, Policy> policies;
  std::map<std::string, double> errors;
  // Error-bound quantities (epsilon, beta, bound, measured) per scheme.
  std::map<std::string, std::map<std::string, double>> bounds;
  std::map<std::string, double> scalars;
  std::map<std::string, bool> checks;
  std::map<std::string, double> runtime_seconds;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

// Everything except runtime_seconds is a deterministic function of the config.
nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& doc);

// Writes report.json, one "<curve>.dat" per curve (1-based state index and
// value per line) and errors.csv into dir, creating it if needed.
void emit_outputs(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace mpadp
