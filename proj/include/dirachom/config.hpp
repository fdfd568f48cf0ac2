#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dirachom/study.hpp"

namespace dirachom {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ValidateSettings {
  int functions = 200;   // trig polynomials for the lemma suite
  int max_freq = 8;
  int spinors = 20;      // BCLS corpus
  int pairs = 100;       // form and graph corpora
  int scheme_trials = 1000;
  int scheme_max_dim = 20;
  // Effective mass for the graph-norm check; 0 means lattice m_star.
  double graph_m_star = 0.0;
};

struct ConstantsSettings {
  double h = 0.1;
  int robin_samples = 10;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out = "out";
  int workers = 1;

  LatticeConfig lattice;  // center_offset = offset_fraction * epsilon
  Vec2 offset_fraction = Vec2::Zero();
  bool degenerate = false;

  SolverOptions solver;
  double truncation_tolerance = 0.05;

  std::vector<double> epsilons{0.5, 0.25, 0.125, 0.0625};
  bool nrc = true;
  bool gap = true;

  ConstantsSettings constants;
  ValidateSettings validate;
};

// INI text with sections [run] [lattice] [solver] [study] [constants] [validate].
// Unknown sections or keys, malformed numbers and out-of-range values throw ConfigError.
RunConfig parse_config(const std::string& ini_text);
RunConfig load_config(const std::string& path);

nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

SweepSpec sweep_spec(const RunConfig& config, const TemplateConstants& constants, const std::string& provenance);

}  // namespace dirachom
