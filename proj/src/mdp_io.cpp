#include "mpadp/mdp_io.hpp"

#include <fstream>
#include <sstream>

#include "mpadp/error.hpp"

namespace mpadp {

using nlohmann::json;

nlohmann::json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw InvalidArgument("expected a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw InvalidArgument("expected a number at index " + std::to_string(i));
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

json mdp_to_json(const Mdp& mdp) {
  const int n = mdp.num_states();
  const int d = mdp.num_actions();
  json rewards = json::array();
  for (int s = 0; s < n; ++s) {
    json row = json::array();
    for (int a = 0; a < d; ++a) row.push_back(mdp.reward(s, a));
    rewards.push_back(std::move(row));
  }
  json transitions = json::array();
  for (int a = 0; a < d; ++a) {
    json kernel = json::array();
    for (int s = 0; s < n; ++s) kernel.push_back(vector_to_json(mdp.transition(a).row(s).transpose()));
    transitions.push_back(std::move(kernel));
  }
  return json{{"n", n}, {"d", d}, {"alpha", mdp.discount()},
              {"rewards", std::move(rewards)}, {"transitions", std::move(transitions)}};
}

Mdp mdp_from_json(const json& doc) {
  try {
    const int n = doc.at("n").get<int>();
    const int d = doc.at("d").get<int>();
    const double alpha = doc.at("alpha").get<double>();
    if (n < 1 || d < 1) throw InvalidArgument("MDP document: n and d must be positive");

    const json& rewards = doc.at("rewards");
    if (!rewards.is_array() || rewards.size() != static_cast<std::size_t>(n)) {
      throw InvalidArgument("MDP document: rewards must have n rows");
    }
    Matrix g(n, d);
    for (int s = 0; s < n; ++s) {
      const Vector row = vector_from_json(rewards[s]);
      if (row.size() != d) throw InvalidArgument("MDP document: reward row " + std::to_string(s) + " must have d entries");
      g.row(s) = row.transpose();
    }

    const json& transitions = doc.at("transitions");
    if (!transitions.is_array() || transitions.size() != static_cast<std::size_t>(d)) {
      throw InvalidArgument("MDP document: transitions must have d kernels");
    }
    std::vector<Matrix> kernels;
    kernels.reserve(d);
    for (int a = 0; a < d; ++a) {
      const json& kernel = transitions[a];
      if (!kernel.is_array() || kernel.size() != static_cast<std::size_t>(n)) {
        throw InvalidArgument("MDP document: kernel " + std::to_string(a) + " must have n rows");
      }
      Matrix P(n, n);
      for (int s = 0; s < n; ++s) {
        const Vector row = vector_from_json(kernel[s]);
        if (row.size() != n) throw InvalidArgument("MDP document: kernel row must have n entries");
        P.row(s) = row.transpose();
      }
      kernels.push_back(std::move(P));
    }
    return Mdp(std::move(g), std::move(kernels), alpha);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("MDP document: ") + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void save_mdp(const Mdp& mdp, const std::filesystem::path& path) {
  write_file_atomic(path, mdp_to_json(mdp).dump(1) + "\n");
}

Mdp load_mdp(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return mdp_from_json(doc);
}

}  // namespace mpadp
