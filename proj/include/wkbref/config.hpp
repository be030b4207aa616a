#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wkbref/error.hpp"
#include "wkbref/oracle.hpp"
#include "wkbref/potentials.hpp"
#include "wkbref/tabulated.hpp"

namespace wkbref {

/// Malformed or inconsistent configuration document.
class ConfigError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Parsed potential document. Keys:
///   kind: "tanh2" | "harmonic" | "pade" | "tabulated"     (required)
///   beta: number                                           (required)
///   tanh2:     U, p, perturbation (optional)
///   harmonic:  k
///   pade:      k, b, g and one of c or U
///   tabulated: grid_file (two-column CSV, relative to the document), U (optional)
///   optional for all kinds: name, emax, oracle {halfwidth, points}
struct PotentialSpec {
  std::string name;
  std::string kind;
  double beta = 1.0;
  std::optional<double> U, p, k, c, b, g, perturbation, emax;
  std::string grid_file;
  std::optional<double> oracle_halfwidth;
  std::optional<int> oracle_points;
  std::filesystem::path base_dir;
};

namespace detail {

inline double number_at(const nlohmann::json& doc, const std::string& key, const std::string& where) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(where + ": key '/" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace detail

inline PotentialSpec parse_potential_spec(const nlohmann::json& doc, const std::string& where,
                                          const std::filesystem::path& base_dir = {}) {
  if (!doc.is_object()) throw ConfigError(where + ": top level must be a JSON object");
  PotentialSpec spec;
  spec.base_dir = base_dir;
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw ConfigError(where + ": missing string key '/kind'");
  spec.kind = doc["kind"].get<std::string>();

  std::set<std::string> allowed{"kind", "beta", "name", "emax", "oracle"};
  if (spec.kind == "tanh2") {
    allowed.insert({"U", "p", "perturbation"});
  } else if (spec.kind == "harmonic") {
    allowed.insert("k");
  } else if (spec.kind == "pade") {
    allowed.insert({"k", "c", "U", "b", "g"});
  } else if (spec.kind == "tabulated") {
    allowed.insert({"grid_file", "U"});
  } else {
    throw ConfigError(where + ": key '/kind' has unknown value '" + spec.kind + "'");
  }
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key))
      throw ConfigError(where + ": unknown key '/" + key + "' for kind '" + spec.kind + "'");
  }

  if (!doc.contains("beta")) throw ConfigError(where + ": missing key '/beta'");
  spec.beta = detail::number_at(doc, "beta", where);
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ConfigError(where + ": key '/name' must be a string");
    spec.name = doc["name"].get<std::string>();
  }
  auto opt_number = [&](const char* key) -> std::optional<double> {
    if (!doc.contains(key)) return std::nullopt;
    return detail::number_at(doc, key, where);
  };
  spec.U = opt_number("U");
  spec.p = opt_number("p");
  spec.k = opt_number("k");
  spec.c = opt_number("c");
  spec.b = opt_number("b");
  spec.g = opt_number("g");
  spec.perturbation = opt_number("perturbation");
  spec.emax = opt_number("emax");
  if (doc.contains("grid_file")) {
    if (!doc["grid_file"].is_string()) throw ConfigError(where + ": key '/grid_file' must be a string");
    spec.grid_file = doc["grid_file"].get<std::string>();
  }
  if (doc.contains("oracle")) {
    const auto& o = doc["oracle"];
    if (!o.is_object()) throw ConfigError(where + ": key '/oracle' must be an object");
    for (const auto& [key, value] : o.items()) {
      if (key == "halfwidth") {
        if (!value.is_number()) throw ConfigError(where + ": key '/oracle/halfwidth' must be a number");
        spec.oracle_halfwidth = value.get<double>();
      } else if (key == "points") {
        if (!value.is_number_integer()) throw ConfigError(where + ": key '/oracle/points' must be an integer");
        spec.oracle_points = value.get<int>();
      } else {
        throw ConfigError(where + ": unknown key '/oracle/" + key + "'");
      }
    }
  }

  auto need = [&](const std::optional<double>& v, const char* key) {
    if (!v) throw ConfigError(where + ": kind '" + spec.kind + "' requires key '/" + key + "'");
  };
  if (spec.kind == "tanh2") {
    need(spec.U, "U");
    need(spec.p, "p");
  } else if (spec.kind == "harmonic") {
    need(spec.k, "k");
  } else if (spec.kind == "pade") {
    need(spec.k, "k");
    if (spec.c.has_value() == spec.U.has_value())
      throw ConfigError(where + ": kind 'pade' requires exactly one of '/c' or '/U'");
  } else if (spec.kind == "tabulated" && spec.grid_file.empty()) {
    throw ConfigError(where + ": kind 'tabulated' requires key '/grid_file'");
  }
  return spec;
}

inline PotentialSpec load_potential_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open configuration");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_potential_spec(doc, path.string(), path.parent_path());
}

inline PotentialModel build_model(const PotentialSpec& spec) {
  if (spec.kind == "tanh2") return make_tanh2_well(*spec.U, *spec.p, spec.beta, spec.perturbation.value_or(0.0));
  if (spec.kind == "harmonic") return make_harmonic(*spec.k, spec.beta);
  if (spec.kind == "pade") {
    PadeParams params;
    params.k = *spec.k;
    params.c = spec.c ? *spec.c : 1.0 / *spec.U;
    params.b = spec.b.value_or(0.0);
    params.g = spec.g.value_or(0.0);
    return generate_from_pade(params, spec.beta);
  }
  std::filesystem::path grid = spec.grid_file;
  if (grid.is_relative()) grid = spec.base_dir / grid;
  auto [xs, vs] = read_xy_csv(grid.string());
  return make_tabulated(std::move(xs), std::move(vs), spec.beta, spec.U);
}

inline nlohmann::json to_json(const PotentialSpec& spec) {
  nlohmann::json doc;
  if (!spec.name.empty()) doc["name"] = spec.name;
  doc["kind"] = spec.kind;
  doc["beta"] = spec.beta;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) doc[key] = *v;
  };
  put("U", spec.U);
  put("p", spec.p);
  put("k", spec.k);
  put("c", spec.c);
  put("b", spec.b);
  put("g", spec.g);
  put("perturbation", spec.perturbation);
  put("emax", spec.emax);
  if (!spec.grid_file.empty()) doc["grid_file"] = spec.grid_file;
  if (spec.oracle_halfwidth || spec.oracle_points) {
    nlohmann::json o;
    if (spec.oracle_halfwidth) o["halfwidth"] = *spec.oracle_halfwidth;
    if (spec.oracle_points) o["points"] = *spec.oracle_points;
    doc["oracle"] = o;
  }
  return doc;
}

/// Oracle settings from the document, defaulting to a 15-unit box with 4001 points.
inline OracleConfig oracle_config(const PotentialSpec& spec, const PotentialModel& model) {
  OracleConfig cfg;
  cfg.halfwidth = spec.oracle_halfwidth.value_or(15.0);
  cfg.grid_points = spec.oracle_points.value_or(4001);
  if (!model.finite()) {
    if (!spec.emax) throw ConfigError("oracle: unbounded wells need 'emax' in the configuration or --emax");
    cfg.energy_cutoff = *spec.emax;
  }
  return cfg;
}

}  // namespace wkbref
