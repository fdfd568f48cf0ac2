#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dirachom/bloch.hpp"
#include "dirachom/lattice.hpp"

namespace dirachom {

struct ConvergenceRecord {
  double epsilon = 0.0;
  double d = 0.0;
  double eta = 0.0;
  double nrc = std::numeric_limits<double>::quiet_NaN();
  double gap_lower = std::numeric_limits<double>::quiet_NaN();
  double gap_upper = std::numeric_limits<double>::quiet_NaN();
  double hausdorff = std::numeric_limits<double>::quiet_NaN();
  int cutoff = 0;
  int grid = 0;
  double truncation = 0.0;
  double wall_ms = 0.0;
  bool assumptions_ok = true;
  bool exploratory = false;
  std::string flags;  // failed assumption ids, ';'-separated

  // |gap_upper - m| + |gap_lower + m|
  double gap_deviation(double m_star) const;
};

// Everything needed to recompute a sweep.
struct SweepSpec {
  LatticeConfig lattice;  // epsilon and center_offset are set per record
  Vec2 offset_fraction = Vec2::Zero();  // inclusion offset in units of eps
  std::vector<double> epsilons{0.5, 0.25, 0.125, 0.0625};
  SolverOptions solver;
  bool nrc = true;
  bool gap = true;
  // Inclusion replaced by the whole cell (mass identical to m_star).
  bool degenerate = false;
  TemplateConstants constants{1.0, 0.0, 0.0};
  std::string constants_provenance;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const nlohmann::json& j);

class SweepError : public std::runtime_error {
 public:
  SweepError(const std::string& what, std::vector<ConvergenceRecord> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<ConvergenceRecord>& partial() const { return partial_; }

 private:
  std::vector<ConvergenceRecord> partial_;
};

// One record per epsilon, sorted by decreasing epsilon.
std::vector<ConvergenceRecord> run_sweep(const SweepSpec& spec, int workers = 1);

enum class FitTarget { nrc, gap, hausdorff };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;   // root mean square of the log residuals
  double ratio_max = 0.0;  // max value / eta
  double ratio_min = 0.0;
  int used = 0;
  int excluded = 0;  // zero or non-finite values left out of the log fit
};

class FitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double fit_value(const ConvergenceRecord& record, FitTarget target, double m_star);
// Least-squares ln(value) against ln(eps); throws FitError below three usable records.
RateFit fit_rate(const std::vector<ConvergenceRecord>& records, FitTarget target = FitTarget::nrc,
                 double m_star = 1.0);

std::string records_csv(const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> parse_records_csv(const std::string& text);

struct PersistOptions {
  std::string command = "sweep";
  std::optional<RateFit> fit;
  nlohmann::ordered_json constants;  // table with provenance
  nlohmann::ordered_json extra;
};

// Writes records.csv (when non-empty) and manifest.json into `directory`.
void persist(const std::vector<ConvergenceRecord>& records, const SweepSpec& spec, const std::string& directory,
             const PersistOptions& options = {});

struct ReplayResult {
  bool identical = false;
  std::string csv_path;
  std::string message;
};

// Recomputes the records of a manifest and compares the CSV byte for byte.
// Fresh timings go to replay_timing.csv next to the written CSV.
ReplayResult replay(const std::string& manifest_path, const std::string& output_directory, int workers = 1);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace dirachom
