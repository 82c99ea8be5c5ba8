#include "mpadp/error.hpp"
#include "mpadp/experiment.hpp"

namespace mpadp {

Mdp random_mdp(int n, int d, double alpha, std::pair<int, int> reward_range, Rng& rng) {
  if (n < 1 || d < 1) throw InvalidArgument("random_mdp: n and d must be >= 1");
  if (reward_range.first > reward_range.second) throw InvalidArgument("random_mdp: empty reward range");

  Matrix rewards(n, d);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < d; ++a)
      rewards(s, a) = static_cast<double>(rng.uniform_int(reward_range.first, reward_range.second));

  std::vector<Matrix> kernels(d, Matrix(n, n));
  for (int a = 0; a < d; ++a) {
    for (int s = 0; s < n; ++s) {
      double total = 0.0;
      for (int t = 0; t < n; ++t) {
        kernels[a](s, t) = rng.uniform_open_closed();
        total += kernels[a](s, t);
      }
      kernels[a].row(s) /= total;
    }
  }
  return Mdp(std::move(rewards), std::move(kernels), alpha);
}

Mdp random_mdp(int n, int d, double alpha, std::pair<int, int> reward_range, std::uint64_t seed) {
  Rng rng(seed);
  return random_mdp(n, d, alpha, reward_range, rng);
}

Policy random_policy(int n, int d, Rng& rng) {
  Policy u(n);
  for (int s = 0; s < n; ++s) u[s] = static_cast<int>(rng.uniform_int(0, d - 1));
  return u;
}

}  // namespace mpadp
