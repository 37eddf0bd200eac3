#pragma once

// JSON encodings. Player and resource labels are 1-based in every file.
//
// Game file: {"payoffs": [mu_1, ..., mu_K], "weights": [[w_11, ..., w_1K], ...]}

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ppa/game.hpp"

namespace ppa {

using nlohmann::json;

class FileNotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed JSON whose content does not fit the expected schema.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError("cannot open '" + path.string() + "'");
  return json::parse(in);  // json::parse_error on malformed input
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

// Shortest decimal that round-trips.
inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

inline json profile_to_json(const Profile& p) { return p.to_one_based(); }

inline Profile profile_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("profile must be an array of 1-based resource labels");
  std::vector<int> labels;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ConfigError("profile entries must be integers");
    labels.push_back(v.get<int>());
  }
  return Profile::from_one_based(labels);
}

inline json profiles_to_json(const std::vector<Profile>& ps) {
  json arr = json::array();
  for (const auto& p : ps) arr.push_back(profile_to_json(p));
  return arr;
}

inline json game_to_json(const GameConfig& g) {
  return {{"payoffs", std::vector<double>(g.payoffs().begin(), g.payoffs().end())},
          {"weights", g.weights().to_rows()}};
}

inline GameConfig game_from_json(const json& j) {
  if (!j.is_object() || !j.contains("payoffs") || !j.contains("weights"))
    throw ConfigError("game needs \"payoffs\" and \"weights\"");
  try {
    auto payoffs = j.at("payoffs").get<std::vector<double>>();
    auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
    return GameConfig(std::move(payoffs), weights);
  } catch (const json::type_error& e) {
    throw ConfigError(std::string("game arrays must hold numbers: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid game: ") + e.what());
  }
}

inline GameConfig load_game(const std::filesystem::path& path) {
  return game_from_json(read_json_file(path));
}

inline json gaps_to_json(const GapReport& r) {
  json out;
  out["has_pne"] = r.has_pne;
  out["delta_ne"] = r.delta_ne ? json(*r.delta_ne) : json(nullptr);
  out["delta_none"] = r.delta_none ? json(*r.delta_none) : json(nullptr);
  out["delta"] = r.delta;
  out["binding_ne"] = r.binding_ne ? profile_to_json(*r.binding_ne) : json(nullptr);
  out["binding_none"] = r.binding_none ? profile_to_json(*r.binding_none) : json(nullptr);
  return out;
}

inline json scenario_to_json(const ScenarioFlags& f) {
  return {{"longtail", f.longtail},
          {"partially_heterogeneous", f.partially_heterogeneous},
          {"homogeneous_players", f.homogeneous_players},
          {"homogeneous_resources", f.homogeneous_resources},
          {"n0", f.n0},
          {"eps0", f.eps0},
          {"existence_guaranteed", f.existence_guaranteed()}};
}

}  // namespace ppa
