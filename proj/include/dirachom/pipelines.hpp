#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dirachom/config.hpp"
#include "dirachom/estimates.hpp"
#include "dirachom/shape_constants.hpp"
#include "dirachom/study.hpp"

namespace dirachom {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitAssumption = 4,
  kExitReplay = 5,
};

class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineContext {
  std::string out;           // output directory
  bool exploratory = false;  // run even when the standing assumptions fail
  std::ostream* log = nullptr;
  std::string command_line;
};

// Throws AssumptionError when some epsilon of the config fails the standing
// assumptions or lies in the exploratory regime, unless `exploratory` is set.
void assumption_gate(const RunConfig& config, const std::vector<double>& epsilons,
                     const TemplateConstants& constants, bool exploratory);

// Template constants for the assumption checks (rho, trace constant, Neumann gap).
std::pair<TemplateConstants, std::string> template_constants(const RunConfig& config);

// ---- constants ----
nlohmann::ordered_json constants_json(const ShapeConstants& constants);
std::string constants_csv(const ShapeConstants& constants);

// Test shapes for the shape-bound suite.
std::vector<std::pair<std::string, Shape>> bound_corpus();
// Payne-Weinberger (convex only), Bramble-Payne, Steklov-type and weak Robin rows.
CheckReport shape_bound_checks(const SpectralConstants& constants);
CheckReport shape_bound_suite(double h, int robin_count, int workers);

struct ConstantsRun {
  ShapeConstants constants;
  CheckReport bounds;
};
ConstantsRun constants_pipeline(const RunConfig& config, const PipelineContext& context);

// ---- validate ----
struct ValidateRun {
  CheckReport lemmas;
  CheckReport bcls;
  CheckReport form;
  CheckReport graph;
  CheckReport scheme;
  EstimateConstants constants;
  EstimateConstants graph_constants;

  CheckReport combined() const;
};
ValidateRun validate_pipeline(const RunConfig& config, const PipelineContext& context);

// ---- bands ----
BandStructure bands_pipeline(const RunConfig& config, const PipelineContext& context);

// ---- sweep ----
struct SweepRun {
  std::vector<ConvergenceRecord> records;
  std::optional<RateFit> fit;
  SweepSpec spec;
};
SweepRun sweep_pipeline(const RunConfig& config, const PipelineContext& context);

// Recomputes the command recorded in a manifest and compares its CSV outputs
// byte for byte (wall-clock columns are taken from the original).
ReplayResult replay_pipeline(const std::string& manifest_path, const PipelineContext& context);

}  // namespace dirachom
