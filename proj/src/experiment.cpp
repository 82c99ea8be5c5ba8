#include "mpadp/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "mpadp/adp_conventional.hpp"
#include "mpadp/adp_minplus.hpp"
#include "mpadp/error.hpp"
#include "mpadp/mdp_io.hpp"

namespace mpadp {

using nlohmann::json;

namespace {

// Independent streams for the pieces generated after the MDP.
constexpr std::uint64_t kTestMatrixStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kLsBasisStream = 0xD1B54A32D192ED03ULL;

const std::set<std::string> kKnownSolvers{"exact", "aqi", "vaqi", "ape", "api"};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Constant column plus seeded uniform columns, for the least-squares baselines.
LsBasis conventional_basis(int n, int k, std::uint64_t seed) {
  Rng rng(seed);
  Matrix phi(n, k);
  phi.col(0).setOnes();
  for (int j = 1; j < k; ++j)
    for (int s = 0; s < n; ++s) phi(s, j) = rng.uniform();
  return LsBasis(std::move(phi));
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json policy_to_json(const Policy& u) { return json(u); }

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 1 || d < 1) throw InvalidArgument("experiment: n and d must be >= 1");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidArgument("experiment: alpha must lie in [0, 1)");
  if (reward_range.first > reward_range.second) throw InvalidArgument("experiment: empty reward range");
  if (features.kind == FeatureSpec::Kind::reward_bins && features.k < 1) {
    throw InvalidArgument("experiment: k must be >= 1");
  }
  if (!(exact_tol > 0.0) || !(approx_tol > 0.0)) throw InvalidArgument("experiment: tolerances must be positive");
  if (max_iter < 1 || api_iters < 1) throw InvalidArgument("experiment: iteration caps must be >= 1");
  for (const auto& s : solvers) {
    if (!kKnownSolvers.count(s)) throw InvalidArgument("experiment: unknown solver '" + s + "'");
  }
  if (!(test_matrix.density > 0.0 && test_matrix.density <= 1.0)) {
    throw InvalidArgument("experiment: test matrix density must lie in (0, 1]");
  }
}

json to_json(const ExperimentConfig& c) {
  return {{"n", c.n},
          {"d", c.d},
          {"alpha", c.alpha},
          {"reward_range", {c.reward_range.first, c.reward_range.second}},
          {"features", c.features.to_string()},
          {"k", c.features.k},
          {"infinity", c.features.infinity.to_string()},
          {"seed", c.seed},
          {"solvers", c.solvers},
          {"w", c.test_matrix.to_string()},
          {"w_density", c.test_matrix.density},
          {"exact_tol", c.exact_tol},
          {"approx_tol", c.approx_tol},
          {"max_iter", c.max_iter},
          {"api_iters", c.api_iters}};
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    c.n = doc.value("n", c.n);
    c.d = doc.value("d", c.d);
    c.alpha = doc.value("alpha", c.alpha);
    if (doc.contains("reward_range")) {
      const auto& rr = doc.at("reward_range");
      if (!rr.is_array() || rr.size() != 2) throw InvalidArgument("reward_range must be [lo, hi]");
      c.reward_range = {rr[0].get<int>(), rr[1].get<int>()};
    }
    const InfinityMode inf =
        doc.contains("infinity") ? parse_infinity_mode(doc.at("infinity").get<std::string>())
                                 : c.features.infinity;
    if (doc.contains("features")) {
      c.features = parse_feature_spec(doc.at("features").get<std::string>(), inf);
    } else {
      c.features.infinity = inf;
      if (doc.contains("k")) c.features.k = doc.at("k").get<int>();
    }
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("solvers")) c.solvers = doc.at("solvers").get<std::set<std::string>>();
    if (doc.contains("w")) {
      const double density = c.test_matrix.density;
      c.test_matrix = parse_test_matrix_spec(doc.at("w").get<std::string>());
      c.test_matrix.density = density;
    }
    c.test_matrix.density = doc.value("w_density", c.test_matrix.density);
    c.exact_tol = doc.value("exact_tol", c.exact_tol);
    c.approx_tol = doc.value("approx_tol", c.approx_tol);
    c.max_iter = doc.value("max_iter", c.max_iter);
    c.api_iters = doc.value("api_iters", c.api_iters);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  const double alpha = config.alpha;

  Rng rng(config.seed);
  const Mdp mdp = random_mdp(config.n, config.d, alpha, config.reward_range, rng);
  const Policy u_arbt = random_policy(config.n, config.d, rng);

  Stopwatch exact_clock;
  const QFunction q_star = q_value_iteration(mdp, config.exact_tol, config.max_iter);
  const ValueFunction j_star = q_star.state_max();
  report.curves["J_star"] = j_star;
  if (config.solvers.count("exact")) {
    const PolicyIterationResult pi = policy_iteration(mdp);
    report.scalars["exact_vi_pi_gap"] = sup_distance(pi.values, j_star);
    report.policies["u_star"] = pi.policy;
  }
  report.runtime_seconds["exact"] = exact_clock.seconds();

  const SpanBasis basis = build_features(mdp, config.features);
  const InfinityMode inf = config.features.infinity;
  AqiOptions options;
  options.tol = config.approx_tol;
  options.max_iter = config.max_iter;
  // Q* and the fixed point are each only known to within their tolerances.
  const double bound_slack = config.exact_tol + config.approx_tol + 1e-9;

  const auto run_scheme = [&](const std::string& tag, const AqiResult& result, const MinPlusMatrix& W) {
    const ValueFunction j_tilde = result.q_approx.state_max();
    const GreedyEvaluation greedy = greedy_and_evaluate(mdp, result.q_approx);
    report.curves["J_tilde_" + tag] = j_tilde;
    report.curves["J_u_" + tag] = greedy.values;
    report.policies["u_" + tag] = greedy.policy;
    const ErrorBoundReport bound = error_bound_report(mdp, basis, W, result, q_star, bound_slack);
    report.bounds[tag] = {{"epsilon", bound.epsilon},
                          {"beta", bound.beta},
                          {"bound", bound.bound},
                          {"stated_bound", bound.stated_bound},
                          {"measured", bound.measured}};
    report.scalars["iterations_" + tag] = result.iterations;
    const double approx_err = sup_distance(j_star, j_tilde);
    const double policy_err = sup_distance(j_star, greedy.values);
    report.checks["greedy_bound_" + tag] = policy_err <= 2.0 / (1.0 - alpha) * approx_err + 1e-6;
    // Not a proven property; recorded for inspection only.
    report.checks["soft_upper_" + tag] =
        (j_tilde.array() >= j_star.array() - 2.0 * config.approx_tol).all();
  };

  if (config.solvers.count("aqi")) {
    Stopwatch clock;
    const AqiResult result = aqi(mdp, basis, options);
    run_scheme("EP", result, MinPlusMatrix::identity(basis.rows()));
    report.runtime_seconds["aqi"] = clock.seconds();
  }
  if (config.solvers.count("vaqi")) {
    Stopwatch clock;
    const MinPlusMatrix W =
        build_test_matrix(config.test_matrix, basis, inf, config.seed ^ kTestMatrixStream);
    report.scalars["w_columns"] = static_cast<double>(W.cols());
    const AqiResult result = vaqi(mdp, basis, W, options);
    run_scheme("W", result, W);
    report.runtime_seconds["vaqi"] = clock.seconds();
  }

  report.curves["J_u_arbt"] = policy_evaluation_exact(mdp, u_arbt);
  report.policies["u_arbt"] = u_arbt;

  if (config.solvers.count("ape") || config.solvers.count("api")) {
    const int k = std::min(config.n, config.features.kind == FeatureSpec::Kind::reward_bins
                                         ? config.features.k
                                         : 5);
    const LsBasis ls = conventional_basis(config.n, k, config.seed ^ kLsBasisStream);
    ApeOptions ape_options;
    ape_options.tol = config.exact_tol;
    ape_options.max_iter = config.max_iter;
    if (config.solvers.count("ape")) {
      Stopwatch clock;
      const ApeResult ev = ape(mdp, u_arbt, ls, ape_options);
      report.curves["J_ape_arbt"] = ev.value_approx;
      report.scalars["ape_error_vs_J_u_arbt"] = sup_distance(ev.value_approx, report.curves["J_u_arbt"]);
      report.runtime_seconds["ape"] = clock.seconds();
    }
    if (config.solvers.count("api")) {
      Stopwatch clock;
      const ApiResult run = api(mdp, ls, config.api_iters, ape_options);
      report.policies["u_api"] = run.policies.back();
      report.curves["J_u_api"] = policy_evaluation_exact(mdp, run.policies.back());
      report.checks["api_chattering"] = run.chattering;
      report.checks["api_converged"] = run.converged;
      report.scalars["api_policies"] = static_cast<double>(run.policies.size());
      report.runtime_seconds["api"] = clock.seconds();
    }
  }

  for (const auto& [name, curve] : report.curves) {
    if (name != "J_star") report.errors[name] = sup_distance(j_star, curve);
  }
  return report;
}

json to_json(const ExperimentReport& report) {
  json curves = json::object();
  for (const auto& [name, v] : report.curves) curves[name] = vector_to_json(v);
  json policies = json::object();
  for (const auto& [name, u] : report.policies) policies[name] = policy_to_json(u);
  return {{"config", to_json(report.config)},
          {"curves", std::move(curves)},
          {"policies", std::move(policies)},
          {"errors", report.errors},
          {"bounds", report.bounds},
          {"scalars", report.scalars},
          {"checks", report.checks},
          {"runtime_seconds", report.runtime_seconds}};
}

ExperimentReport report_from_json(const json& doc) {
  ExperimentReport report;
  try {
    report.config = config_from_json(doc.at("config"));
    for (const auto& [name, v] : doc.at("curves").items()) report.curves[name] = vector_from_json(v);
    for (const auto& [name, u] : doc.at("policies").items()) report.policies[name] = u.get<Policy>();
    report.errors = doc.at("errors").get<std::map<std::string, double>>();
    report.bounds = doc.at("bounds").get<std::map<std::string, std::map<std::string, double>>>();
    report.scalars = doc.at("scalars").get<std::map<std::string, double>>();
    report.checks = doc.at("checks").get<std::map<std::string, bool>>();
    report.runtime_seconds = doc.value("runtime_seconds", std::map<std::string, double>{});
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("experiment report: ") + e.what());
  }
  return report;
}

void emit_outputs(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  write_file_atomic(dir / "report.json", to_json(report).dump(2) + "\n");

  for (const auto& [name, v] : report.curves) {
    std::ostringstream out;
    char line[64];
    for (Eigen::Index s = 0; s < v.size(); ++s) {
      std::snprintf(line, sizeof line, "%lld %.12g\n", static_cast<long long>(s + 1), v[s]);
      out << line;
    }
    write_file_atomic(dir / (name + ".dat"), out.str());
  }

  std::ostringstream csv;
  csv << "curve,sup_norm_error\n";
  for (const auto& [name, err] : report.errors) csv << name << ',' << format_value(err) << '\n';
  write_file_atomic(dir / "errors.csv", csv.str());
}

}  // namespace mpadp
