#include "mpadp/features.hpp"

#include <cstdio>
#include <vector>

#include "mpadp/error.hpp"
#include "mpadp/mdp_io.hpp"
#include "mpadp/rng.hpp"

namespace mpadp {

namespace {

bool starts_with(const std::string& text, const std::string& prefix) {
  return text.compare(0, prefix.size(), prefix) == 0;
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(context + ": cannot parse number '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(context + ": cannot parse integer '" + text + "'");
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

InfinityMode InfinityMode::with_sentinel(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument("sentinel value must be positive and finite");
  }
  return InfinityMode{true, value};
}

std::string InfinityMode::to_string() const {
  return use_sentinel ? "sentinel:" + format_number(sentinel) : "exact";
}

InfinityMode parse_infinity_mode(const std::string& text) {
  if (text == "exact") return InfinityMode::exact();
  if (text == "sentinel") return InfinityMode::with_sentinel(1000.0);
  if (starts_with(text, "sentinel:")) {
    return InfinityMode::with_sentinel(parse_double(text.substr(9), "--inf"));
  }
  throw InvalidArgument("--inf must be 'exact' or 'sentinel:VALUE', got '" + text + "'");
}

std::string FeatureSpec::to_string() const {
  switch (kind) {
    case Kind::reward_bins: return "bins:" + std::to_string(k);
    case Kind::full_basis: return "full";
    case Kind::custom_file: return "file:" + path.string();
  }
  return {};
}

FeatureSpec parse_feature_spec(const std::string& text, InfinityMode infinity) {
  FeatureSpec spec;
  spec.infinity = infinity;
  if (text == "full") {
    spec.kind = FeatureSpec::Kind::full_basis;
  } else if (starts_with(text, "bins:")) {
    spec.kind = FeatureSpec::Kind::reward_bins;
    spec.k = parse_int(text.substr(5), "--features");
    if (spec.k < 1) throw InvalidArgument("--features bins:K needs K >= 1");
  } else if (starts_with(text, "file:")) {
    spec.kind = FeatureSpec::Kind::custom_file;
    spec.path = text.substr(5);
  } else {
    throw InvalidArgument("--features must be bins:K, full or file:PATH, got '" + text + "'");
  }
  return spec;
}

SpanBasis build_reward_bins(const Mdp& mdp, int k, InfinityMode mode) {
  if (k < 1) throw InvalidArgument("build_reward_bins: k must be >= 1");
  const int n = mdp.num_states();
  const int d = mdp.num_actions();
  const double g_min = mdp.rewards().minCoeff();
  const double g_max = mdp.rewards().maxCoeff();
  const double span = g_max - g_min;

  MinPlusMatrix phi(static_cast<Eigen::Index>(n) * d, k, mode.infinity());
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < d; ++a) {
      const auto row = static_cast<Eigen::Index>(QFunction::index(s, a, d));
      const double g = mdp.reward(s, a);
      if (span == 0.0) {
        phi.set(row, 0, 0.0);
        continue;
      }
      for (int i = 1; i <= k; ++i) {
        const double lo = i == 1 ? g_min : g_min + ((i - 1) * span) / k;
        const double hi = i == k ? g_max : g_min + (i * span) / k;
        if (g >= lo && g <= hi) phi.set(row, i - 1, 0.0);
      }
    }
  }
  return SpanBasis(std::move(phi));
}

SpanBasis build_full_basis(int size) {
  if (size < 1) throw InvalidArgument("build_full_basis: size must be >= 1");
  return SpanBasis(MinPlusMatrix::identity(size));
}

SpanBasis build_features(const Mdp& mdp, const FeatureSpec& spec) {
  const int rows = mdp.num_states() * mdp.num_actions();
  switch (spec.kind) {
    case FeatureSpec::Kind::reward_bins:
      return build_reward_bins(mdp, spec.k, spec.infinity);
    case FeatureSpec::Kind::full_basis:
      return build_full_basis(rows);
    case FeatureSpec::Kind::custom_file: {
      SpanBasis basis = load_features(spec.path);
      if (basis.rows() != rows) {
        throw InvalidArgument(spec.path.string() + ": feature matrix has " +
                              std::to_string(basis.rows()) + " rows, MDP needs n*d = " +
                              std::to_string(rows));
      }
      return basis;
    }
  }
  throw InvalidArgument("unknown feature kind");
}

SpanBasis load_features(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  try {
    return SpanBasis(minplus_from_json(doc));
  } catch (const Error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void save_features(const SpanBasis& basis, const std::filesystem::path& path) {
  write_file_atomic(path, minplus_to_json(basis.matrix()).dump() + "\n");
}

std::string TestMatrixSpec::to_string() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::features: return "features";
    case Kind::random_binary: return columns > 0 ? "random:" + std::to_string(columns) : "random";
  }
  return {};
}

TestMatrixSpec parse_test_matrix_spec(const std::string& text) {
  TestMatrixSpec spec;
  if (text == "identity") {
    spec.kind = TestMatrixSpec::Kind::identity;
  } else if (text == "features") {
    spec.kind = TestMatrixSpec::Kind::features;
  } else if (text == "random") {
    spec.kind = TestMatrixSpec::Kind::random_binary;
  } else if (starts_with(text, "random:")) {
    spec.kind = TestMatrixSpec::Kind::random_binary;
    spec.columns = parse_int(text.substr(7), "--w");
    if (spec.columns < 1) throw InvalidArgument("--w random:M needs M >= 1");
  } else {
    throw InvalidArgument("--w must be identity, features or random:M, got '" + text + "'");
  }
  return spec;
}

MinPlusMatrix random_binary_test_matrix(Eigen::Index rows, Eigen::Index columns, double density,
                                        InfinityMode mode, std::uint64_t seed) {
  if (rows < 1 || columns < 1) throw InvalidArgument("test matrix needs rows, columns >= 1");
  if (!(density > 0.0 && density <= 1.0)) throw InvalidArgument("test matrix density must lie in (0, 1]");
  Rng rng(seed);
  MinPlusMatrix W(rows, columns, mode.infinity());
  for (Eigen::Index m = 0; m < columns; ++m) {
    bool any = false;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (rng.uniform() < density) {
        W.set(i, m, 0.0);
        any = true;
      }
    }
    if (!any) W.set(rng.uniform_int(0, rows - 1), m, 0.0);
  }
  return W;
}

MinPlusMatrix build_test_matrix(const TestMatrixSpec& spec, const SpanBasis& basis,
                                InfinityMode mode, std::uint64_t seed) {
  switch (spec.kind) {
    case TestMatrixSpec::Kind::identity:
      return MinPlusMatrix::identity(basis.rows());
    case TestMatrixSpec::Kind::features: {
      // An all-infinite column (an empty reward bin) is a vacuous test vector.
      const MinPlusMatrix& phi = basis.matrix();
      std::vector<Eigen::Index> keep;
      for (Eigen::Index j = 0; j < phi.cols(); ++j) {
        if ((phi.entries().col(j).array() != kInf).any()) keep.push_back(j);
      }
      MinPlusMatrix W(phi.rows(), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t c = 0; c < keep.size(); ++c) {
        for (Eigen::Index i = 0; i < phi.rows(); ++i) W.set(i, static_cast<Eigen::Index>(c), phi(i, keep[c]));
      }
      return W;
    }
    case TestMatrixSpec::Kind::random_binary: {
      const Eigen::Index columns =
          spec.columns > 0 ? spec.columns : std::max<Eigen::Index>(1, basis.rows() / 5);
      return random_binary_test_matrix(basis.rows(), columns, spec.density, mode, seed);
    }
  }
  throw InvalidArgument("unknown test matrix kind");
}

}  // namespace mpadp
