#include "dirachom/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include "dirachom/version.hpp"

namespace dirachom {
namespace fs = std::filesystem;

namespace {

using ojson = nlohmann::ordered_json;

void log_line(const PipelineContext& ctx, const std::string& line) {
  if (ctx.log) *ctx.log << line << std::endl;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

LatticeConfig lattice_at(const RunConfig& config, double eps) {
  LatticeConfig cfg = config.degenerate ? full_cell_lattice(eps, config.lattice.m_star) : config.lattice;
  cfg.epsilon = eps;
  if (!config.degenerate) cfg.center_offset = config.offset_fraction * eps;
  cfg.epsilon0 = config.lattice.epsilon0;
  return cfg;
}

ojson estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"coarse", e.coarse}, {"fine", e.fine}, {"error", e.error}};
}

ojson spectral_json(const SpectralConstants& sc) {
  ojson j;
  j["label"] = sc.label;
  ojson shape;
  for (const auto& [k, v] : shape_to_fields(sc.shape)) shape[k] = v;
  j["shape"] = shape;
  j["h"] = sc.h;
  j["vertices_fine"] = sc.vertices_fine;
  j["area"] = sc.area;
  j["perimeter"] = sc.perimeter;
  j["lambda_N"] = estimate_json(sc.lambda_N);
  j["lambda_S"] = estimate_json(sc.lambda_S);
  j["c_tr"] = estimate_json(sc.c_tr);
  ojson robin = ojson::array();
  for (const auto& [gamma, e] : sc.lambda_R) {
    ojson r = estimate_json(e);
    r["gamma"] = gamma;
    robin.push_back(r);
  }
  j["lambda_R"] = robin;
  j["refinement_error"] = sc.refinement_error();
  return j;
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string csv_value(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }

void write_manifest(const std::string& dir, const std::string& command, const RunConfig& config,
                    const PipelineContext& ctx, const std::vector<std::string>& outputs, const ojson& extra = {}) {
  ojson m;
  m["format"] = 1;
  m["command"] = command;
  m["command_line"] = ctx.command_line;
  m["config"] = to_json(config);
  m["exploratory"] = ctx.exploratory;
  m["seed"] = config.seed;
  m["versions"] = version_info();
  m["outputs"] = outputs;
  if (!extra.is_null())
    for (const auto& [k, v] : extra.items()) m[k] = v;
  write_file(path_in(dir, "manifest.json"), m.dump(2) + "\n");
}

ojson estimate_constants_json(const EstimateConstants& c) {
  return {{"lambda_N_disk", c.lambda_N_disk}, {"c_tr_disk", c.c_tr_disk}, {"lambda_N_square", c.lambda_N_square},
          {"lambda_N", c.lambda_N},           {"rho", c.rho},             {"m_star", c.m_star},
          {"c1", c.c1},                       {"c2", c.c2},               {"c3", c.c3},
          {"c4", optional_json(c.c4)}};
}

}  // namespace

std::pair<TemplateConstants, std::string> template_constants(const RunConfig& config) {
  const Shape shape = config.degenerate ? full_cell_lattice(0.25, 1.0).shape : config.lattice.shape;
  const InnerRadius inner = inner_radius(shape);
  SpectralOptions so;
  so.h = std::min(config.constants.h, 0.5 * inner.radius);
  const SpectralConstants sc = compute_spectral_constants(shape, "template", so);
  std::ostringstream prov;
  prov << "P1 finite elements at h=" << format_double(so.h)
       << " and h/2 with Richardson extrapolation; refinement error " << format_double(sc.refinement_error());
  return {{inner.radius, sc.c_tr.value, sc.lambda_N.value}, prov.str()};
}

void assumption_gate(const RunConfig& config, const std::vector<double>& epsilons,
                     const TemplateConstants& constants, bool exploratory) {
  std::string failures;
  for (double eps : epsilons) {
    const AssumptionReport r = check_assumptions(lattice_at(config, eps), constants);
    std::string ids;
    for (const AssumptionCheck& c : r.checks)
      if (!c.pass && c.id != "eta:bound") ids += (ids.empty() ? "" : ";") + c.id;
    if (r.exploratory_regime) ids += (ids.empty() ? "" : ";") + std::string("exploratory_regime");
    if (!ids.empty()) failures += "eps=" + format_double(eps) + ": " + ids + "\n";
  }
  if (!failures.empty() && !exploratory)
    throw AssumptionError("standing assumptions not met (pass --exploratory to run anyway)\n" + failures);
}

// ---------------------------------------------------------------- constants

nlohmann::ordered_json constants_json(const ShapeConstants& c) {
  ojson j;
  j["m_star"] = c.m_star;
  j["md_max"] = c.md_max;
  j["inner_radius"] = {{"radius", c.inner.radius}, {"center_x", c.inner.center.x()}, {"center_y", c.inner.center.y()}};
  j["unit_disk"] = spectral_json(c.disk);
  j["unit_square"] = spectral_json(c.square);
  j["template"] = spectral_json(c.inclusion);
  const DerivedConstants& d = c.derived;
  j["derived"] = {{"c1", d.c1},
                  {"c2", d.c2},
                  {"c3", d.c3},
                  {"alpha", optional_json(d.alpha)},
                  {"c4", optional_json(d.c4)},
                  {"c_final", optional_json(d.c_final)},
                  {"alpha_feasible", d.alpha.has_value()},
                  {"alpha_rhs", d.alpha_rhs},
                  {"alpha_limit", d.alpha_limit},
                  {"c4_limit", d.c4_limit},
                  {"c_final_limit", d.c_final_limit}};
  j["provenance"] = {{"method", "P1 finite elements, Richardson extrapolation from h and h/2"},
                     {"h", c.inclusion.h},
                     {"refinement_error",
                      std::max({c.disk.refinement_error(), c.square.refinement_error(),
                                c.inclusion.refinement_error()})}};
  return j;
}

std::string constants_csv(const ShapeConstants& c) {
  std::ostringstream out;
  out << "name,value,coarse,fine,error\n";
  auto est = [&](const std::string& name, const Estimate& e) {
    out << name << ',' << format_double(e.value) << ',' << format_double(e.coarse) << ',' << format_double(e.fine)
        << ',' << format_double(e.error) << '\n';
  };
  auto plain = [&](const std::string& name, const std::string& v) { out << name << ',' << v << ",,,\n"; };
  est("lambda_N_disk", c.disk.lambda_N);
  est("c_tr_disk", c.disk.c_tr);
  est("lambda_R1_disk", c.disk.lambda_R.at(1.0));
  est("lambda_N_square", c.square.lambda_N);
  est("lambda_N", c.inclusion.lambda_N);
  est("lambda_S", c.inclusion.lambda_S);
  est("c_tr", c.inclusion.c_tr);
  plain("rho", format_double(c.inner.radius));
  plain("m_star", format_double(c.m_star));
  plain("md_max", format_double(c.md_max));
  plain("c1", format_double(c.derived.c1));
  plain("c2", format_double(c.derived.c2));
  plain("c3", format_double(c.derived.c3));
  plain("alpha", csv_value(c.derived.alpha));
  plain("c4", csv_value(c.derived.c4));
  plain("c_final", csv_value(c.derived.c_final));
  plain("alpha_limit", format_double(c.derived.alpha_limit));
  plain("c4_limit", format_double(c.derived.c4_limit));
  plain("c_final_limit", format_double(c.derived.c_final_limit));
  return out.str();
}

std::vector<std::pair<std::string, Shape>> bound_corpus() {
  return {{"disk", Shape::disk(1.0)},
          {"ellipse_0.6", Shape::ellipse(1.0, 0.6)},
          {"ellipse_0.35", Shape::ellipse(1.0, 0.35)},
          {"square", Shape::regular_polygon(4, 1.0, 0.25 * kPi)},
          {"hexagon", Shape::regular_polygon(6, 1.0)},
          {"star_3", Shape::star_radial(1.0, 0.3, 3)}};
}

CheckReport shape_bound_checks(const SpectralConstants& sc) {
  CheckReport report;
  const std::string& label = sc.label;
  auto add = [&](CheckRow row, const std::string& note) {
    row.note = label + (note.empty() ? "" : " " + note);
    report.rows.push_back(row);
  };

  if (is_convex(sc.shape)) {
    const double pw = payne_weinberger_bound(sc.shape);
    add(inequality_row("payne_weinberger", 0, pw, sc.lambda_N.value, sc.lambda_N.error), "");
    add(inequality_row("payne_weinberger.fine", 0, pw, sc.lambda_N.fine, 0.0), "");
  } else {
    report.rows.push_back(skipped_row("payne_weinberger", 0, label + " not convex"));
  }

  try {
    const double bp = bramble_payne_bound(sc.shape, sc.shape.center());
    add(inequality_row("bramble_payne", 0, bp, sc.lambda_N.value, sc.lambda_N.error), "");
    add(inequality_row("bramble_payne.fine", 0, bp, sc.lambda_N.fine, 0.0), "");
  } catch (const std::exception& e) {
    report.rows.push_back(skipped_row("bramble_payne", 0, label + " " + e.what()));
  }

  const double st = steklov_lower_bound(sc.c_tr.value, sc.lambda_N.value);
  const double st_fine = steklov_lower_bound(sc.c_tr.fine, sc.lambda_N.fine);
  add(inequality_row("steklov", 0, st, sc.lambda_S.value, std::abs(st - st_fine) + sc.lambda_S.error), "");
  add(inequality_row("steklov.fine", 0, st_fine, sc.lambda_S.fine, 0.0), "");

  std::uint64_t k = 0;
  for (const auto& [gamma, e] : sc.lambda_R) {
    ++k;
    if (!(gamma < 0.0 && gamma > -sc.lambda_S.value)) continue;
    const std::string note = "gamma=" + format_double(gamma);
    const double rw = robin_weak_bound(gamma, sc.perimeter, sc.area, sc.lambda_S.value);
    const double rw_fine = robin_weak_bound(gamma, sc.mesh_perimeter, sc.mesh_area, sc.lambda_S.fine);
    add(inequality_row("robin_weak", k, rw, e.value, std::abs(rw - rw_fine) + e.error), note);
    add(inequality_row("robin_weak.fine", k, rw_fine, e.fine, 0.0), note);
  }
  return report;
}

CheckReport shape_bound_suite(double h, int robin_count, int workers) {
  const auto corpus = bound_corpus();
  std::vector<SpectralConstants> results(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    SpectralOptions so;
    so.h = std::min(h, 0.5 * inner_radius(corpus[i].second).radius);
    results[i] = compute_spectral_constants(corpus[i].second, corpus[i].first, so);
    add_robin_samples(results[i], robin_count, workers);
  }
  CheckReport report;
  for (const SpectralConstants& sc : results) report.append(shape_bound_checks(sc));
  return report;
}

ConstantsRun constants_pipeline(const RunConfig& config, const PipelineContext& ctx) {
  ConstantsRun run;
  const double md = md_max_for(config.lattice, config.epsilons);
  ConstantsOptions options{config.constants.h, config.constants.robin_samples, config.workers};
  log_line(ctx, "computing template constants (h=" + format_double(options.h) + ")");
  run.constants = compute_shape_constants(config.lattice.shape, config.lattice.m_star, md, options);
  log_line(ctx, "checking shape bounds on " + std::to_string(bound_corpus().size()) + " test shapes");
  run.bounds = shape_bound_suite(config.constants.h, config.constants.robin_samples, config.workers);
  run.bounds.append(shape_bound_checks(run.constants.inclusion));

  write_file(path_in(ctx.out, "constants.json"), constants_json(run.constants).dump(2) + "\n");
  write_file(path_in(ctx.out, "constants.csv"), constants_csv(run.constants));
  write_file(path_in(ctx.out, "bounds.csv"), run.bounds.to_csv());
  write_file(path_in(ctx.out, "bounds_summary.json"), run.bounds.summary_json());
  write_manifest(ctx.out, "constants", config, ctx, {"constants.csv", "bounds.csv"});
  return run;
}

// ---------------------------------------------------------------- validate

CheckReport ValidateRun::combined() const {
  CheckReport all;
  for (const CheckReport* r : {&lemmas, &bcls, &form, &graph, &scheme}) all.append(*r);
  return all;
}

ValidateRun validate_pipeline(const RunConfig& config, const PipelineContext& ctx) {
  ValidateRun run;
  const double eps = config.lattice.epsilon;
  const LatticeConfig lattice = lattice_at(config, eps);
  ConstantsOptions options{config.constants.h, config.constants.robin_samples, config.workers};
  log_line(ctx, "computing constants");
  const ShapeConstants sc =
      compute_shape_constants(lattice.shape, lattice.m_star, md_max_for(lattice, {eps}), options);
  assumption_gate(config, {eps}, sc.template_constants(), ctx.exploratory);
  run.constants = estimate_constants(sc);

  const MassField field = calibrate_mass(lattice);
  const CellGeometry geometry = CellGeometry::from_field(field);
  const CellPatch patch = make_patch(field);
  const ValidateSettings& v = config.validate;

  log_line(ctx, "lemma suite: " + std::to_string(v.functions) + " functions");
  LemmaSuiteOptions lo;
  lo.functions = v.functions;
  lo.seed = config.seed;
  lo.max_freq = v.max_freq;
  lo.workers = config.workers;
  run.lemmas = run_lemma_suite(geometry, run.constants, lo);

  SpinorSuiteOptions so;
  so.seed = config.seed;
  so.workers = config.workers;
  so.spinors = v.spinors;
  log_line(ctx, "boundary identity: " + std::to_string(v.spinors) + " spinors");
  run.bcls = run_bcls_suite(patch, so);
  so.spinors = v.pairs;
  log_line(ctx, "form bound: " + std::to_string(v.pairs) + " pairs");
  run.form = run_form_suite(patch, run.constants, so);

  const double gm = v.graph_m_star > 0.0 ? v.graph_m_star : lattice.m_star;
  run.graph_constants = run.constants;
  CellPatch graph_patch = patch;
  if (gm != lattice.m_star) {
    LatticeConfig graph_lattice = lattice;
    graph_lattice.m_star = gm;
    ConstantInputs in = sc.inputs;
    in.m_star = gm;
    in.md_max = md_max_for(graph_lattice, {eps});
    run.graph_constants = estimate_constants(in, assemble_constants(in));
    graph_patch = make_patch(calibrate_mass(graph_lattice));
  }
  log_line(ctx, "graph bounds: " + std::to_string(v.pairs) + " pairs at m_star=" + format_double(gm));
  run.graph = run_graph_suite(graph_patch, run.graph_constants, so);

  log_line(ctx, "abstract scheme: " + std::to_string(v.scheme_trials) + " trials");
  run.scheme = abstract_scheme_check(v.scheme_trials, config.seed, v.scheme_max_dim);

  const std::vector<std::pair<std::string, const CheckReport*>> parts = {
      {"lemmas", &run.lemmas}, {"bcls", &run.bcls}, {"form", &run.form}, {"graph", &run.graph},
      {"scheme", &run.scheme}};
  std::vector<std::string> outputs;
  ojson summary;
  for (const auto& [name, report] : parts) {
    const std::string file = "validate_" + name + ".csv";
    write_file(path_in(ctx.out, file), report->to_csv());
    outputs.push_back(file);
    summary[name] = ojson::parse(report->summary_json());
  }
  const CheckReport all = run.combined();
  summary["total"] = {{"checked", all.checked()}, {"violations", all.violations()}};
  summary["constants"] = estimate_constants_json(run.constants);
  summary["graph_constants"] = estimate_constants_json(run.graph_constants);
  write_file(path_in(ctx.out, "validate_summary.json"), summary.dump(2) + "\n");
  write_manifest(ctx.out, "validate", config, ctx, outputs);
  return run;
}

// ---------------------------------------------------------------- bands

BandStructure bands_pipeline(const RunConfig& config, const PipelineContext& ctx) {
  const double eps = config.lattice.epsilon;
  const auto [tc, provenance] = template_constants(config);
  assumption_gate(config, {eps}, tc, ctx.exploratory);
  const LatticeConfig lattice = lattice_at(config, eps);
  SolverOptions solver = config.solver;
  solver.workers = config.workers;
  log_line(ctx, "bands at eps=" + format_double(eps) + " N=" + std::to_string(solver.cutoff));
  const BandStructure b = bands(PeriodicMass::from_field(calibrate_mass(lattice)), solver);

  // Four bands on each side of zero.
  constexpr int kSide = 4;
  std::ostringstream csv;
  csv << "theta_x,theta_y,band,value\n";
  for (size_t t = 0; t < b.thetas.size(); ++t) {
    const RVector& ev = b.eigenvalues[t];
    const long first_positive = std::upper_bound(ev.data(), ev.data() + ev.size(), 0.0) - ev.data();
    for (int k = -kSide; k <= kSide; ++k) {
      if (k == 0) continue;
      const long idx = k < 0 ? first_positive + k : first_positive + k - 1;
      if (idx < 0 || idx >= ev.size()) continue;
      csv << format_double(b.thetas[t].x()) << ',' << format_double(b.thetas[t].y()) << ',' << k << ','
          << format_double(ev[idx]) << '\n';
    }
  }
  write_file(path_in(ctx.out, "bands.csv"), csv.str());

  const double m = lattice.m_star;
  ojson gap = {{"epsilon", eps},
               {"d", lattice.d()},
               {"eta", eta(lattice)},
               {"m_star", m},
               {"gap_lower", b.gap_lower},
               {"gap_upper", b.gap_upper},
               {"has_gap", b.has_gap()},
               {"gap_deviation", std::abs(b.gap_upper - m) + std::abs(b.gap_lower + m)},
               {"hausdorff", b.has_gap() ? ojson(hausdorff_gap_check(b, m)) : ojson(nullptr)},
               {"cutoff", b.cutoff},
               {"grid", b.grid},
               {"truncation_indicator", b.truncation_indicator},
               {"template_constants_provenance", provenance}};
  write_file(path_in(ctx.out, "gap.json"), gap.dump(2) + "\n");
  if (b.truncation_indicator > config.truncation_tolerance)
    log_line(ctx, "warning: truncation indicator " + format_double(b.truncation_indicator) + " exceeds " +
                      format_double(config.truncation_tolerance));
  write_manifest(ctx.out, "bands", config, ctx, {"bands.csv"});
  return b;
}

// ---------------------------------------------------------------- sweep

SweepRun sweep_pipeline(const RunConfig& config, const PipelineContext& ctx) {
  SweepRun run;
  log_line(ctx, "template constants");
  const auto [tc, provenance] = template_constants(config);
  assumption_gate(config, config.epsilons, tc, ctx.exploratory);
  run.spec = sweep_spec(config, tc, provenance);

  PersistOptions po;
  po.command = "sweep";
  po.constants = {{"rho", tc.rho}, {"c_tr", tc.c_tr}, {"lambda_N", tc.lambda_N}, {"provenance", provenance}};
  po.extra = {{"command_line", ctx.command_line},
              {"config", to_json(config)},
              {"exploratory", ctx.exploratory},
              {"outputs", {"records.csv"}}};
  log_line(ctx, "sweep over " + std::to_string(config.epsilons.size()) + " periods");
  try {
    run.records = run_sweep(run.spec, config.workers);
  } catch (const SweepError& e) {
    po.extra["error"] = e.what();
    persist(e.partial(), run.spec, ctx.out, po);
    throw;
  }
  for (const ConvergenceRecord& r : run.records)
    if (r.truncation > config.truncation_tolerance)
      log_line(ctx, "warning: eps=" + format_double(r.epsilon) + " truncation indicator " +
                        format_double(r.truncation) + " exceeds " + format_double(config.truncation_tolerance));
  if (run.records.size() >= 3) {
    try {
      run.fit = fit_rate(run.records, run.spec.nrc ? FitTarget::nrc : FitTarget::gap, config.lattice.m_star);
    } catch (const FitError& e) {
      log_line(ctx, std::string("rate fit skipped: ") + e.what());
    }
  }
  po.fit = run.fit;
  persist(run.records, run.spec, ctx.out, po);
  return run;
}

// ---------------------------------------------------------------- replay

ReplayResult replay_pipeline(const std::string& manifest_path, const PipelineContext& ctx) {
  const nlohmann::json m = nlohmann::json::parse(read_file(manifest_path));
  const std::string command = m.at("command").get<std::string>();
  if (command == "sweep") {
    const int workers = m.contains("config") ? run_config_from_json(m.at("config")).workers : 1;
    return replay(manifest_path, ctx.out, workers);
  }

  const fs::path source = fs::path(manifest_path).parent_path();
  const std::vector<std::string> outputs = m.at("outputs").get<std::vector<std::string>>();
  std::map<std::string, std::string> originals;
  for (const std::string& name : outputs) originals[name] = read_file((source / name).string());

  RunConfig config = run_config_from_json(m.at("config"));
  PipelineContext replay_ctx = ctx;
  replay_ctx.exploratory = ctx.exploratory || m.value("exploratory", false);
  if (command == "constants")
    constants_pipeline(config, replay_ctx);
  else if (command == "validate")
    validate_pipeline(config, replay_ctx);
  else if (command == "bands")
    bands_pipeline(config, replay_ctx);
  else
    throw std::invalid_argument("manifest has unknown command '" + command + "'");

  ReplayResult result;
  result.identical = true;
  std::string differing;
  for (const std::string& name : outputs) {
    if (read_file(path_in(ctx.out, name)) != originals[name]) {
      result.identical = false;
      differing += (differing.empty() ? "" : ", ") + name;
    }
  }
  result.csv_path = outputs.empty() ? "" : path_in(ctx.out, outputs.front());
  result.message = result.identical ? "byte-identical" : "outputs differ: " + differing;
  return result;
}

}  // namespace dirachom
