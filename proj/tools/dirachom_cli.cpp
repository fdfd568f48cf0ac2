// Command-line entry point: constants, validate, bands, sweep, replay.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dirachom/pipelines.hpp"
#include "dirachom/version.hpp"

namespace {

using namespace dirachom;

struct Flags {
  std::string config;
  std::string manifest;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool exploratory = false;
  bool quiet = false;
};

const char* const kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  2  configuration error (unreadable file, unknown key, bad value, empty corpus)\n"
    "  3  solver or numerical failure\n"
    "  4  standing assumptions violated and --exploratory not given\n"
    "  5  replay produced different outputs\n"
    "\n"
    "Environment:\n"
    "  OUT_DIR  output directory; overrides [run] out, overridden by --out\n";

std::string output_directory(const Flags& f, const std::string& fallback) {
  if (f.out) return *f.out;
  if (const char* env = std::getenv("OUT_DIR"); env && *env) return env;
  return fallback;
}

RunConfig load(const Flags& f) {
  RunConfig config = load_config(f.config);
  if (f.seed) config.seed = *f.seed;
  if (f.workers) {
    if (*f.workers < 1) throw ConfigError("--workers must be at least 1");
    config.workers = *f.workers;
  }
  config.out = output_directory(f, config.out);
  return config;
}

void print_report(const std::string& title, const CheckReport& report) {
  std::cout << title << ": " << report.checked() << " checked, " << report.violations() << " violations\n";
}

int run(const std::string& command, const Flags& f, const std::string& command_line) {
  PipelineContext ctx;
  ctx.exploratory = f.exploratory;
  ctx.log = f.quiet ? nullptr : &std::cerr;
  ctx.command_line = command_line;

  if (command == "replay") {
    const std::string fallback = (std::filesystem::path(f.manifest).parent_path() / "replay").string();
    ctx.out = output_directory(f, fallback);
    const ReplayResult r = replay_pipeline(f.manifest, ctx);
    std::cout << "replay: " << r.message << " (" << ctx.out << ")\n";
    return r.identical ? kExitOk : kExitReplay;
  }

  const RunConfig config = load(f);
  ctx.out = config.out;
  if (command == "constants") {
    const ConstantsRun r = constants_pipeline(config, ctx);
    const DerivedConstants& d = r.constants.derived;
    std::cout << "Lambda_N(unit disk)   " << format_double(r.constants.disk.lambda_N.value) << '\n'
              << "Lambda_N(unit square) " << format_double(r.constants.square.lambda_N.value) << '\n'
              << "Lambda_N(template)    " << format_double(r.constants.inclusion.lambda_N.value) << '\n'
              << "C1 " << format_double(d.c1) << "  C2 " << format_double(d.c2) << "  C3 " << format_double(d.c3)
              << '\n'
              << "C4 " << (d.c4 ? format_double(*d.c4) : std::string("undefined (alpha condition infeasible)"))
              << '\n';
    print_report("shape bounds", r.bounds);
  } else if (command == "validate") {
    const ValidateRun r = validate_pipeline(config, ctx);
    print_report("lemmas", r.lemmas);
    print_report("boundary identity", r.bcls);
    print_report("form bound", r.form);
    print_report("graph bounds", r.graph);
    print_report("abstract scheme", r.scheme);
  } else if (command == "bands") {
    const BandStructure b = bands_pipeline(config, ctx);
    std::cout << "gap [" << format_double(b.gap_lower) << ", " << format_double(b.gap_upper) << "]"
              << (b.has_gap() ? "" : " (no gap)") << ", truncation " << format_double(b.truncation_indicator)
              << '\n';
  } else if (command == "sweep") {
    const SweepRun r = sweep_pipeline(config, ctx);
    std::cout << "eps,nrc,eta\n";
    for (const ConvergenceRecord& rec : r.records)
      std::cout << format_double(rec.epsilon) << ',' << format_double(rec.nrc) << ',' << format_double(rec.eta)
                << '\n';
    if (r.fit) std::cout << "slope " << format_double(r.fit->slope) << '\n';
  }
  std::cout << "wrote " << ctx.out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for homogenization of the 2D Dirac operator with piecewise-constant mass"};
  app.footer(kExitCodes);
  app.set_version_flag("--version", std::string(dirachom::kVersion));
  app.require_subcommand(1);

  Flags f;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) sub->add_option("--config", f.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory (overrides OUT_DIR and [run] out)");
    sub->add_option("--workers", f.workers, "worker threads for the library pipelines");
    sub->add_flag("--exploratory", f.exploratory, "run even when the standing assumptions fail");
    sub->add_flag("-q,--quiet", f.quiet, "no progress lines on stderr");
  };
  std::string command;
  for (const auto& [name, help] : std::initializer_list<std::pair<const char*, const char*>>{
           {"constants", "shape constants report and bound checks"},
           {"validate", "estimate validators on random corpora"},
           {"bands", "band structure near the mass gap"},
           {"sweep", "convergence sweep over periods"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, true);
    sub->add_option("--seed", f.seed, "random seed (overrides [run] seed)");
    sub->callback([&command, n = std::string(name)] { command = n; });
  }
  CLI::App* replay = app.add_subcommand("replay", "recompute a manifest and compare outputs byte for byte");
  replay->add_option("manifest", f.manifest, "manifest.json of a previous run")->required()->check(CLI::ExistingFile);
  add_common(replay, false);
  replay->callback([&command] { command = "replay"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dirachom::kExitConfig;
  }

  std::string command_line;
  for (int i = 1; i < argc; ++i) command_line += (i > 1 ? " " : "") + std::string(argv[i]);
  try {
    return run(command, f, command_line);
  } catch (const dirachom::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return dirachom::kExitConfig;
  } catch (const dirachom::AssumptionError& e) {
    std::cerr << "assumption check failed: " << e.what();
    return dirachom::kExitAssumption;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return dirachom::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return dirachom::kExitSolver;
  }
}
