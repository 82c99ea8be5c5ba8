#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mpadp/mdp.hpp"

namespace mpadp {

// {"n", "d", "alpha", "rewards": [s][a], "transitions": [a][s][s']}.
// Doubles are written in shortest round-trip form.
nlohmann::json mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const nlohmann::json& doc);

void save_mdp(const Mdp& mdp, const std::filesystem::path& path);
Mdp load_mdp(const std::filesystem::path& path);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& arr);

// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace mpadp
