// Command-line front end: gen, solve, approx, experiment.
//
// Exit codes: 0 success, 2 invalid input, 3 convergence failure, 4 I/O.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpadp/adp_minplus.hpp"
#include "mpadp/error.hpp"
#include "mpadp/experiment.hpp"
#include "mpadp/features.hpp"
#include "mpadp/mdp.hpp"
#include "mpadp/mdp_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mpadp;

namespace {

enum ExitCode : int { kOk = 0, kInternal = 1, kInvalid = 2, kNoConvergence = 3, kIo = 4 };

struct GenArgs {
  int n = 100;
  int d = 5;
  double alpha = 0.9;
  int reward_min = 1;
  int reward_max = 10;
  std::uint64_t seed = 1;
  std::string out;
};

struct SolveArgs {
  std::string mdp;
  double tol = 1e-10;
  int max_iter = 100000;
  std::string out;
};

struct ApproxArgs {
  std::string mdp;
  std::string features = "bins:5";
  std::string inf = "exact";
  std::string w = "identity";
  double w_density = 0.01;
  std::string solver = "both";
  std::uint64_t seed = 1;
  double tol = 1e-8;
  double exact_tol = 1e-10;
  int max_iter = 100000;
  std::string out;
};

struct ExperimentArgs {
  std::string config;
  int n = 100;
  int d = 5;
  double alpha = 0.9;
  int k = 5;
  std::string features;
  std::uint64_t seed = 1;
  std::string w = "random";
  double w_density = 0.01;
  std::string inf = "sentinel:1000";
  std::string solvers;
  double tol = 1e-8;
  int max_iter = 100000;
  std::string out = "experiment_out";
};

void emit(const json& doc, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_file_atomic(out_file, doc.dump(2) + "\n");
  }
}

int run_gen(const GenArgs& args) {
  const Mdp mdp = random_mdp(args.n, args.d, args.alpha, {args.reward_min, args.reward_max}, args.seed);
  if (args.out.empty()) {
    std::cout << mdp_to_json(mdp).dump(1) << '\n';
  } else {
    save_mdp(mdp, args.out);
  }
  return kOk;
}

int run_solve(const SolveArgs& args) {
  const Mdp mdp = load_mdp(args.mdp);
  const ValueFunction j_vi = value_iteration(mdp, args.tol, args.max_iter);
  const QFunction q_star = q_value_iteration(mdp, args.tol, args.max_iter);
  const PolicyIterationResult pi = policy_iteration(mdp);
  json doc{{"J_star", vector_to_json(pi.values)},
           {"J_star_value_iteration", vector_to_json(j_vi)},
           {"Q_star", vector_to_json(q_star.flat())},
           {"policy", pi.policy},
           {"policy_iterations", pi.iterations},
           {"vi_pi_gap", sup_distance(j_vi, pi.values)}};
  if (args.out.empty()) {
    emit(doc, "");
  } else {
    fs::create_directories(args.out);
    emit(doc, (fs::path(args.out) / "solve.json").string());
  }
  return kOk;
}

int run_approx(const ApproxArgs& args) {
  const Mdp mdp = load_mdp(args.mdp);
  const InfinityMode inf = parse_infinity_mode(args.inf);
  const SpanBasis basis = build_features(mdp, parse_feature_spec(args.features, inf));
  if (args.solver != "aqi" && args.solver != "vaqi" && args.solver != "both") {
    throw InvalidArgument("--solver must be aqi, vaqi or both");
  }

  const QFunction q_star = q_value_iteration(mdp, args.exact_tol, args.max_iter);
  AqiOptions options;
  options.tol = args.tol;
  options.max_iter = args.max_iter;
  const double slack = args.tol + args.exact_tol + 1e-9;

  json summary = json::object();
  const fs::path out_dir = args.out;
  if (!args.out.empty()) fs::create_directories(out_dir);

  const auto record = [&](const std::string& name, const AqiResult& result, const MinPlusMatrix& W) {
    const ErrorBoundReport bound = error_bound_report(mdp, basis, W, result, q_star, slack);
    const GreedyEvaluation greedy = greedy_and_evaluate(mdp, result.q_approx);
    json entry = to_json(result);
    entry["error_bound"] = to_json(bound);
    entry["policy"] = greedy.policy;
    entry["J_u"] = vector_to_json(greedy.values);
    entry["J_tilde"] = vector_to_json(result.q_approx.state_max());
    if (!args.out.empty()) {
      write_file_atomic(out_dir / (name + "_result.json"), entry.dump(2) + "\n");
      write_file_atomic(out_dir / (name + "_residuals.csv"), residual_trace_csv(result.residual_trace));
    }
    summary[name] = {{"iterations", result.iterations},
                     {"final_residual", result.final_residual},
                     {"error_bound", to_json(bound)}};
  };

  if (args.solver == "aqi" || args.solver == "both") {
    record("aqi", aqi(mdp, basis, options), MinPlusMatrix::identity(basis.rows()));
  }
  if (args.solver == "vaqi" || args.solver == "both") {
    TestMatrixSpec wspec = parse_test_matrix_spec(args.w);
    wspec.density = args.w_density;
    const MinPlusMatrix W = build_test_matrix(wspec, basis, inf, args.seed);
    record("vaqi", vaqi(mdp, basis, W, options), W);
  }
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

int run_experiment_cmd(const ExperimentArgs& args, const CLI::App& sub) {
  ExperimentConfig config;
  if (!args.config.empty()) config = config_from_json(json::parse(read_file(args.config)));

  const auto given = [&sub](const char* flag) { return sub.get_option(flag)->count() > 0; };
  const bool no_config = args.config.empty();
  if (no_config || given("--n")) config.n = args.n;
  if (no_config || given("--d")) config.d = args.d;
  if (no_config || given("--alpha")) config.alpha = args.alpha;
  if (no_config || given("--seed")) config.seed = args.seed;
  if (no_config || given("--inf")) config.features.infinity = parse_infinity_mode(args.inf);
  if (!args.features.empty()) {
    config.features = parse_feature_spec(args.features, config.features.infinity);
  } else if (no_config || given("--k")) {
    config.features.kind = FeatureSpec::Kind::reward_bins;
    config.features.k = args.k;
  }
  if (no_config || given("--w")) {
    const double density = config.test_matrix.density;
    config.test_matrix = parse_test_matrix_spec(args.w);
    config.test_matrix.density = density;
  }
  if (no_config || given("--w-density")) config.test_matrix.density = args.w_density;
  if (no_config || given("--tol")) config.approx_tol = args.tol;
  if (no_config || given("--max-iter")) config.max_iter = args.max_iter;
  if (!args.solvers.empty()) {
    config.solvers.clear();
    std::stringstream list(args.solvers);
    for (std::string item; std::getline(list, item, ',');) config.solvers.insert(item);
  }

  const ExperimentReport report = run_experiment(config);
  emit_outputs(report, args.out);
  std::cout << json(report.errors).dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and min-plus approximate dynamic programming for finite MDPs"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a random MDP as JSON");
  gen_cmd->add_option("--n", gen.n, "Number of states")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--d", gen.d, "Number of actions")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--alpha", gen.alpha, "Discount factor in [0, 1)");
  gen_cmd->add_option("--reward-min", gen.reward_min, "Smallest integer reward");
  gen_cmd->add_option("--reward-max", gen.reward_max, "Largest integer reward");
  gen_cmd->add_option("--seed", gen.seed, "PRNG seed");
  gen_cmd->add_option("--out", gen.out, "Output file (default stdout)");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Exact solvers on an MDP file");
  solve_cmd->add_option("--mdp", solve.mdp, "MDP JSON file")->required();
  solve_cmd->add_option("--tol", solve.tol, "Value-iteration tolerance");
  solve_cmd->add_option("--max-iter", solve.max_iter, "Iteration cap");
  solve_cmd->add_option("--out", solve.out, "Output directory (default stdout)");

  ApproxArgs approx;
  auto* approx_cmd = app.add_subcommand("approx", "AQI / VAQI on an MDP file");
  approx_cmd->add_option("--mdp", approx.mdp, "MDP JSON file")->required();
  approx_cmd->add_option("--features", approx.features, "bins:K | full | file:PATH");
  approx_cmd->add_option("--inf", approx.inf, "exact | sentinel:VALUE");
  approx_cmd->add_option("--w", approx.w, "identity | features | random[:M]");
  approx_cmd->add_option("--w-density", approx.w_density, "Zero density of random test matrices");
  approx_cmd->add_option("--solver", approx.solver, "aqi | vaqi | both");
  approx_cmd->add_option("--seed", approx.seed, "Seed for random test matrices");
  approx_cmd->add_option("--tol", approx.tol, "Fixed-point tolerance");
  approx_cmd->add_option("--exact-tol", approx.exact_tol, "Tolerance of the Q* oracle");
  approx_cmd->add_option("--max-iter", approx.max_iter, "Iteration cap");
  approx_cmd->add_option("--out", approx.out, "Output directory for results and residual traces");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Random-MDP study: exact, AQI, VAQI and baselines");
  exp_cmd->add_option("--config", exp.config, "JSON config; explicit flags override it");
  exp_cmd->add_option("--n", exp.n, "Number of states");
  exp_cmd->add_option("--d", exp.d, "Number of actions");
  exp_cmd->add_option("--alpha", exp.alpha, "Discount factor");
  exp_cmd->add_option("--k", exp.k, "Number of reward bins");
  exp_cmd->add_option("--features", exp.features, "bins:K | full | file:PATH (overrides --k)");
  exp_cmd->add_option("--seed", exp.seed, "PRNG seed");
  exp_cmd->add_option("--w", exp.w, "identity | features | random[:M]");
  exp_cmd->add_option("--w-density", exp.w_density, "Zero density of random test matrices");
  exp_cmd->add_option("--inf", exp.inf, "exact | sentinel:VALUE");
  exp_cmd->add_option("--solvers", exp.solvers, "Comma list from exact,aqi,vaqi,ape,api");
  exp_cmd->add_option("--tol", exp.tol, "AQI/VAQI tolerance");
  exp_cmd->add_option("--max-iter", exp.max_iter, "Iteration cap");
  exp_cmd->add_option("--out", exp.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*solve_cmd) return run_solve(solve);
    if (*approx_cmd) return run_approx(approx);
    if (*exp_cmd) return run_experiment_cmd(exp, *exp_cmd);
  } catch (const ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return kNoConvergence;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ProjectionUndefined& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
