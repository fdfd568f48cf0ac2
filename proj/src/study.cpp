#include "dirachom/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gsl/gsl_fit.h>

#include "dirachom/parallel.hpp"
#include "dirachom/version.hpp"

namespace dirachom {
namespace fs = std::filesystem;

namespace {

const char* const kCsvHeader = "eps,d_eps,eta,nrc,gap_lo,gap_hi,haus,N,grid,trunc,wall_ms";

std::string method_name(ResolventMethod m) {
  switch (m) {
    case ResolventMethod::dense:
      return "dense";
    case ResolventMethod::iterative:
      return "iterative";
    default:
      return "automatic";
  }
}

ResolventMethod method_from(const std::string& s) {
  if (s == "dense") return ResolventMethod::dense;
  if (s == "iterative") return ResolventMethod::iterative;
  if (s == "automatic") return ResolventMethod::automatic;
  throw std::invalid_argument("unknown resolvent method '" + s + "'");
}

ConvergenceRecord run_one(const SweepSpec& spec, double eps, int workers) {
  const auto start = std::chrono::steady_clock::now();
  LatticeConfig cfg = spec.degenerate ? full_cell_lattice(eps, spec.lattice.m_star) : spec.lattice;
  cfg.epsilon = eps;
  if (!spec.degenerate) cfg.center_offset = spec.offset_fraction * eps;
  cfg.epsilon0 = spec.lattice.epsilon0;

  ConvergenceRecord r;
  r.epsilon = eps;
  r.d = cfg.d();
  r.eta = eta(eps, r.d);
  r.cutoff = spec.solver.cutoff;
  r.grid = spec.solver.grid;
  const AssumptionReport report = check_assumptions(cfg, spec.constants);
  r.exploratory = report.exploratory_regime;
  r.assumptions_ok = report.standing_ok();
  for (const AssumptionCheck& c : report.checks)
    if (!c.pass) r.flags += (r.flags.empty() ? "" : ";") + c.id;

  SolverOptions solver = spec.solver;
  solver.workers = workers;
  const PeriodicMass mass_eps = PeriodicMass::from_field(calibrate_mass(cfg));
  const double m = spec.lattice.m_star;
  if (spec.nrc) {
    const NrcResult n = nrc_estimate(mass_eps, PeriodicMass::constant(eps, m), solver);
    r.nrc = n.value;
    r.truncation = std::max(r.truncation, n.truncation_indicator);
  }
  if (spec.gap) {
    const BandStructure b = bands(mass_eps, solver);
    r.gap_lower = b.gap_lower;
    r.gap_upper = b.gap_upper;
    r.truncation = std::max(r.truncation, b.truncation_indicator);
    if (b.has_gap())
      r.hausdorff = hausdorff_gap_check(b, m);
    else
      r.flags += (r.flags.empty() ? "" : ";") + std::string("no_gap");
  }
  const auto stop = std::chrono::steady_clock::now();
  r.wall_ms = std::round(std::chrono::duration<double, std::milli>(stop - start).count());
  return r;
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

}  // namespace

double ConvergenceRecord::gap_deviation(double m_star) const {
  return std::abs(gap_upper - m_star) + std::abs(gap_lower + m_star);
}

nlohmann::ordered_json to_json(const SweepSpec& spec) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json shape;
  for (const auto& [k, v] : shape_to_fields(spec.lattice.shape)) shape[k] = v;
  j["lattice"] = {{"m_star", spec.lattice.m_star},
                  {"c", spec.lattice.d_rule.c},
                  {"kappa", spec.lattice.d_rule.kappa},
                  {"offset_x", spec.offset_fraction.x()},
                  {"offset_y", spec.offset_fraction.y()},
                  {"epsilon0", spec.lattice.epsilon0},
                  {"shape", shape}};
  j["epsilons"] = spec.epsilons;
  j["solver"] = {{"cutoff", spec.solver.cutoff},
                 {"grid", spec.solver.grid},
                 {"refine", spec.solver.refine},
                 {"truncation_check", spec.solver.truncation_check},
                 {"use_symmetry", spec.solver.use_symmetry},
                 {"method", method_name(spec.solver.method)}};
  j["observables"] = {{"nrc", spec.nrc}, {"gap", spec.gap}};
  j["degenerate"] = spec.degenerate;
  j["template_constants"] = {{"rho", spec.constants.rho},
                             {"c_tr", spec.constants.c_tr},
                             {"lambda_N", spec.constants.lambda_N},
                             {"provenance", spec.constants_provenance}};
  j["seed"] = spec.seed;
  return j;
}

SweepSpec sweep_spec_from_json(const nlohmann::json& j) {
  SweepSpec s;
  const auto& l = j.at("lattice");
  std::map<std::string, std::string> shape;
  for (const auto& [k, v] : l.at("shape").items()) shape[k] = v.get<std::string>();
  s.lattice = make_lattice(0.25, l.at("m_star").get<double>(), shape_from_fields(shape),
                           DRule{l.at("c").get<double>(), l.at("kappa").get<double>()});
  s.offset_fraction = Vec2(l.at("offset_x").get<double>(), l.at("offset_y").get<double>());
  s.lattice.epsilon0 = l.at("epsilon0").get<double>();
  s.epsilons = j.at("epsilons").get<std::vector<double>>();
  const auto& o = j.at("solver");
  s.solver.cutoff = o.at("cutoff").get<int>();
  s.solver.grid = o.at("grid").get<int>();
  s.solver.refine = o.at("refine").get<bool>();
  s.solver.truncation_check = o.at("truncation_check").get<bool>();
  s.solver.use_symmetry = o.at("use_symmetry").get<bool>();
  s.solver.method = method_from(o.at("method").get<std::string>());
  s.nrc = j.at("observables").at("nrc").get<bool>();
  s.gap = j.at("observables").at("gap").get<bool>();
  s.degenerate = j.at("degenerate").get<bool>();
  const auto& t = j.at("template_constants");
  s.constants = {t.at("rho").get<double>(), t.at("c_tr").get<double>(), t.at("lambda_N").get<double>()};
  s.constants_provenance = t.at("provenance").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

std::vector<ConvergenceRecord> run_sweep(const SweepSpec& spec, int workers) {
  std::vector<double> eps = spec.epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  const int count = static_cast<int>(eps.size());
  const int outer = std::max(1, std::min(workers, count));
  const int inner = std::max(1, workers / outer);
  std::vector<std::optional<ConvergenceRecord>> slots(count);
  std::vector<std::string> errors(count);
  parallel_for(count, outer, [&](int i) {
    try {
      slots[i] = run_one(spec, eps[i], inner);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<ConvergenceRecord> out;
  for (int i = 0; i < count; ++i) {
    if (!slots[i]) {
      std::ostringstream msg;
      msg << "sweep failed at eps = " << format_double(eps[i]) << ": " << errors[i];
      throw SweepError(msg.str(), out);
    }
    out.push_back(*slots[i]);
  }
  return out;
}

double fit_value(const ConvergenceRecord& r, FitTarget target, double m_star) {
  switch (target) {
    case FitTarget::nrc:
      return r.nrc;
    case FitTarget::gap:
      return r.gap_deviation(m_star);
    case FitTarget::hausdorff:
      return r.hausdorff;
  }
  return r.nrc;
}

RateFit fit_rate(const std::vector<ConvergenceRecord>& records, FitTarget target, double m_star) {
  std::vector<double> x, y;
  RateFit fit;
  fit.ratio_min = std::numeric_limits<double>::infinity();
  for (const ConvergenceRecord& r : records) {
    const double v = fit_value(r, target, m_star);
    if (!(std::isfinite(v) && v > 0.0 && r.epsilon > 0.0)) {
      ++fit.excluded;
      continue;
    }
    x.push_back(std::log(r.epsilon));
    y.push_back(std::log(v));
    fit.ratio_max = std::max(fit.ratio_max, v / r.eta);
    fit.ratio_min = std::min(fit.ratio_min, v / r.eta);
  }
  fit.used = static_cast<int>(x.size());
  if (fit.used < 3) throw FitError("rate fit needs at least 3 records with positive values");
  double cov00, cov01, cov11, sumsq;
  gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &fit.intercept, &fit.slope, &cov00, &cov01, &cov11, &sumsq);
  fit.residual = std::sqrt(sumsq / fit.used);
  return fit;
}

std::string records_csv(const std::vector<ConvergenceRecord>& records) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const ConvergenceRecord& r : records)
    out << csv_number(r.epsilon) << ',' << csv_number(r.d) << ',' << csv_number(r.eta) << ',' << csv_number(r.nrc)
        << ',' << csv_number(r.gap_lower) << ',' << csv_number(r.gap_upper) << ',' << csv_number(r.hausdorff) << ','
        << r.cutoff << ',' << r.grid << ',' << csv_number(r.truncation) << ',' << csv_number(r.wall_ms) << '\n';
  return out.str();
}

std::vector<ConvergenceRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("records CSV header mismatch");
  std::vector<ConvergenceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) throw std::invalid_argument("records CSV row has wrong arity: " + line);
    auto num = [](const std::string& s) {
      return s == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(s);
    };
    ConvergenceRecord r;
    r.epsilon = num(cells[0]);
    r.d = num(cells[1]);
    r.eta = num(cells[2]);
    r.nrc = num(cells[3]);
    r.gap_lower = num(cells[4]);
    r.gap_upper = num(cells[5]);
    r.hausdorff = num(cells[6]);
    r.cutoff = std::stoi(cells[7]);
    r.grid = std::stoi(cells[8]);
    r.truncation = num(cells[9]);
    r.wall_ms = num(cells[10]);
    out.push_back(r);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << contents;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void persist(const std::vector<ConvergenceRecord>& records, const SweepSpec& spec, const std::string& directory,
             const PersistOptions& options) {
  nlohmann::ordered_json m;
  m["format"] = 1;
  m["command"] = options.command;
  m["sweep"] = to_json(spec);
  m["seed"] = spec.seed;
  m["versions"] = version_info();
  if (!options.constants.is_null()) m["constants"] = options.constants;
  if (!records.empty()) {
    m["records_csv"] = "records.csv";
    write_file((fs::path(directory) / "records.csv").string(), records_csv(records));
  }
  std::vector<double> wall;
  nlohmann::ordered_json meta = nlohmann::ordered_json::array();
  for (const ConvergenceRecord& r : records) {
    wall.push_back(r.wall_ms);
    meta.push_back({{"eps", r.epsilon},
                    {"assumptions_ok", r.assumptions_ok},
                    {"exploratory", r.exploratory},
                    {"flags", r.flags}});
  }
  m["wall_ms"] = wall;
  m["records"] = meta;
  if (options.fit)
    m["fit"] = {{"slope", options.fit->slope},         {"intercept", options.fit->intercept},
                {"residual", options.fit->residual},   {"ratio_max", options.fit->ratio_max},
                {"ratio_min", options.fit->ratio_min}, {"used", options.fit->used},
                {"excluded", options.fit->excluded}};
  if (!options.extra.is_null())
    for (const auto& [k, v] : options.extra.items()) m[k] = v;
  write_file((fs::path(directory) / "manifest.json").string(), m.dump(2) + "\n");
}

ReplayResult replay(const std::string& manifest_path, const std::string& output_directory, int workers) {
  const nlohmann::json m = nlohmann::json::parse(read_file(manifest_path));
  const SweepSpec spec = sweep_spec_from_json(m.at("sweep"));
  const std::vector<double> wall = m.at("wall_ms").get<std::vector<double>>();
  std::optional<std::string> original;
  if (m.contains("records_csv"))
    original = read_file((fs::path(manifest_path).parent_path() / m.at("records_csv").get<std::string>()).string());

  std::vector<ConvergenceRecord> records = spec.epsilons.empty() ? std::vector<ConvergenceRecord>{}
                                                                 : run_sweep(spec, workers);
  ReplayResult result;
  if (records.size() != wall.size()) {
    result.message = "record count differs from the manifest";
    return result;
  }
  std::ostringstream timing;
  timing << "eps,wall_ms\n";
  for (size_t i = 0; i < records.size(); ++i) {
    timing << csv_number(records[i].epsilon) << ',' << csv_number(records[i].wall_ms) << '\n';
    records[i].wall_ms = wall[i];
  }
  const std::string csv = records_csv(records);
  if (records.empty()) {
    result.identical = !original.has_value();
    result.message = result.identical ? "no records" : "manifest lists records but replay produced none";
    return result;
  }
  result.csv_path = (fs::path(output_directory) / "records.csv").string();
  write_file(result.csv_path, csv);
  write_file((fs::path(output_directory) / "replay_timing.csv").string(), timing.str());
  result.identical = original && *original == csv;
  result.message = result.identical ? "byte-identical" : "records differ from the manifest CSV";
  return result;
}

}  // namespace dirachom
