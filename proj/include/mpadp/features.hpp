#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mpadp/mdp.hpp"
#include "mpadp/minplus.hpp"

namespace mpadp {

// How "no membership" is written into a feature or test matrix: true +inf,
// or a large finite sentinel (1000 by default).
struct InfinityMode {
  bool use_sentinel = false;
  double sentinel = 1000.0;

  static InfinityMode exact() { return {}; }
  static InfinityMode with_sentinel(double value);

  double infinity() const { return use_sentinel ? sentinel : kInf; }
  // "exact" or "sentinel:VALUE".
  std::string to_string() const;
};

// Parses "exact" or "sentinel:VALUE" (bare "sentinel" means 1000).
InfinityMode parse_infinity_mode(const std::string& text);

struct FeatureSpec {
  enum class Kind { reward_bins, full_basis, custom_file };

  Kind kind = Kind::reward_bins;
  int k = 1;
  std::filesystem::path path;
  InfinityMode infinity;

  // "bins:K", "full" or "file:PATH".
  std::string to_string() const;
};

FeatureSpec parse_feature_spec(const std::string& text, InfinityMode infinity = {});

// Row (s, a) holds 0 in every bin i whose closed interval
// [g_min + (i-1) L / k, g_min + i L / k] contains g_a(s), and the mode's
// infinity elsewhere; L = g_max - g_min. With constant rewards only bin 1 is
// active.
SpanBasis build_reward_bins(const Mdp& mdp, int k, InfinityMode mode = {});

// Min-plus identity of the given size; its span is the whole semimodule.
SpanBasis build_full_basis(int size);

SpanBasis build_features(const Mdp& mdp, const FeatureSpec& spec);

SpanBasis load_features(const std::filesystem::path& path);
void save_features(const SpanBasis& basis, const std::filesystem::path& path);

// Test matrices W for the variational projection.
struct TestMatrixSpec {
  enum class Kind { identity, features, random_binary };

  Kind kind = Kind::identity;
  // random_binary: column count (0 picks max(1, rows / 5)) and the
  // probability that an entry is 0.
  int columns = 0;
  double density = 0.01;

  // "identity", "features", "random" or "random:M".
  std::string to_string() const;
};

TestMatrixSpec parse_test_matrix_spec(const std::string& text);

// Random 0 / infinity matrix in which every column has at least one 0.
MinPlusMatrix random_binary_test_matrix(Eigen::Index rows, Eigen::Index columns, double density,
                                        InfinityMode mode, std::uint64_t seed);

MinPlusMatrix build_test_matrix(const TestMatrixSpec& spec, const SpanBasis& basis,
                                InfinityMode mode, std::uint64_t seed);

}  // namespace mpadp
