#include "dirachom/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace dirachom {
namespace {

using Section = std::map<std::string, std::string>;
using Sections = std::map<std::string, Section>;

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"seed", "out", "workers"}},
      {"lattice",
       {"epsilon", "m_star", "kappa", "c", "offset_x", "offset_y", "epsilon0", "degenerate", "shape.kind",
        "shape.radius", "shape.a", "shape.b", "shape.sides", "shape.circumradius", "shape.rotation", "shape.r0",
        "shape.amplitude", "shape.lobes", "shape.center_x", "shape.center_y"}},
      {"solver", {"N", "grid", "refine", "truncation_check", "use_symmetry", "method", "truncation_tolerance"}},
      {"study", {"epsilons", "observables"}},
      {"constants", {"h", "robin_samples"}},
      {"validate", {"functions", "max_freq", "spinors", "pairs", "scheme_trials", "scheme_max_dim", "graph_m_star"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& section, const std::string& key, const std::string& text) {
  try {
    const double v = parse_double(text);
    if (!std::isfinite(v)) throw std::invalid_argument("not finite");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": '" + text + "' is not a number");
  }
}

long long to_integer(const std::string& section, const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno != 0)
    throw ConfigError("[" + section + "] " + key + ": '" + text + "' is not an integer");
  return v;
}

std::uint64_t to_unsigned(const std::string& section, const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || *end != '\0' || errno != 0)
    throw ConfigError("[" + section + "] " + key + ": '" + text + "' is not an unsigned integer");
  return v;
}

bool to_bool(const std::string& section, const std::string& key, const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("[" + section + "] " + key + ": '" + text + "' is not a boolean");
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

RunConfig from_sections(const Sections& sections) {
  for (const auto& [name, keys] : sections) {
    const auto it = allowed_keys().find(name);
    if (it == allowed_keys().end()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, value] : keys)
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
  }
  auto get = [&](const std::string& s, const std::string& k) -> const std::string* {
    const auto si = sections.find(s);
    if (si == sections.end()) return nullptr;
    const auto ki = si->second.find(k);
    return ki == si->second.end() ? nullptr : &ki->second;
  };

  RunConfig c;
  if (auto v = get("run", "seed")) c.seed = to_unsigned("run", "seed", *v);
  if (auto v = get("run", "out")) c.out = trim(*v);
  if (auto v = get("run", "workers")) c.workers = static_cast<int>(to_integer("run", "workers", *v));
  require(c.workers >= 1, "[run] workers must be at least 1");

  double epsilon = 0.25, m_star = 1.0, kappa = 1.0, dc = 0.25, ox = 0.0, oy = 0.0, eps0 = 0.5;
  if (auto v = get("lattice", "epsilon")) epsilon = to_double("lattice", "epsilon", *v);
  if (auto v = get("lattice", "m_star")) m_star = to_double("lattice", "m_star", *v);
  if (auto v = get("lattice", "kappa")) kappa = to_double("lattice", "kappa", *v);
  if (auto v = get("lattice", "c")) dc = to_double("lattice", "c", *v);
  if (auto v = get("lattice", "offset_x")) ox = to_double("lattice", "offset_x", *v);
  if (auto v = get("lattice", "offset_y")) oy = to_double("lattice", "offset_y", *v);
  if (auto v = get("lattice", "epsilon0")) eps0 = to_double("lattice", "epsilon0", *v);
  if (auto v = get("lattice", "degenerate")) c.degenerate = to_bool("lattice", "degenerate", *v);
  require(epsilon > 0.0, "[lattice] epsilon must be positive");
  require(m_star > 0.0, "[lattice] m_star must be positive");
  require(kappa >= 1.0, "[lattice] kappa must be at least 1");
  require(dc > 0.0, "[lattice] c must be positive");
  require(eps0 > 0.0 && eps0 < 1.0, "[lattice] epsilon0 must lie in (0, 1)");

  std::map<std::string, std::string> shape_fields;
  if (const auto si = sections.find("lattice"); si != sections.end())
    for (const auto& [k, v] : si->second)
      if (k.rfind("shape.", 0) == 0) shape_fields[k.substr(6)] = trim(v);
  if (shape_fields.empty()) shape_fields = {{"kind", "disk"}, {"radius", "1"}};
  Shape shape = Shape::disk(1.0);
  try {
    shape = shape_from_fields(shape_fields);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("[lattice] shape: ") + e.what());
  }
  c.lattice = make_lattice(epsilon, m_star, shape, DRule{dc, kappa}, Vec2(ox, oy) * epsilon);
  c.offset_fraction = Vec2(ox, oy);
  c.lattice.epsilon0 = eps0;

  if (auto v = get("solver", "N")) c.solver.cutoff = static_cast<int>(to_integer("solver", "N", *v));
  if (auto v = get("solver", "grid")) c.solver.grid = static_cast<int>(to_integer("solver", "grid", *v));
  if (auto v = get("solver", "refine")) c.solver.refine = to_bool("solver", "refine", *v);
  if (auto v = get("solver", "truncation_check")) c.solver.truncation_check = to_bool("solver", "truncation_check", *v);
  if (auto v = get("solver", "use_symmetry")) c.solver.use_symmetry = to_bool("solver", "use_symmetry", *v);
  if (auto v = get("solver", "method")) {
    const std::string m = trim(*v);
    if (m == "dense") c.solver.method = ResolventMethod::dense;
    else if (m == "iterative") c.solver.method = ResolventMethod::iterative;
    else if (m == "automatic") c.solver.method = ResolventMethod::automatic;
    else throw ConfigError("[solver] method must be automatic, dense or iterative");
  }
  if (auto v = get("solver", "truncation_tolerance"))
    c.truncation_tolerance = to_double("solver", "truncation_tolerance", *v);
  require(c.solver.cutoff >= kMinCutoff && c.solver.cutoff <= kMaxCutoff,
          "[solver] N must lie in [" + std::to_string(kMinCutoff) + ", " + std::to_string(kMaxCutoff) + "]");
  require(c.solver.grid >= 1 && c.solver.grid % 2 == 1, "[solver] grid must be a positive odd integer");
  require(c.truncation_tolerance > 0.0, "[solver] truncation_tolerance must be positive");

  if (auto v = get("study", "epsilons")) {
    c.epsilons.clear();
    for (const std::string& item : split(*v)) c.epsilons.push_back(to_double("study", "epsilons", item));
  }
  require(!c.epsilons.empty(), "[study] epsilons must not be empty");
  for (double e : c.epsilons) require(e > 0.0 && e < 1.0, "[study] epsilons must lie in (0, 1)");
  if (auto v = get("study", "observables")) {
    c.nrc = c.gap = false;
    for (const std::string& item : split(*v)) {
      if (item == "nrc") c.nrc = true;
      else if (item == "gap" || item == "hausdorff") c.gap = true;
      else throw ConfigError("[study] unknown observable '" + item + "'");
    }
    require(c.nrc || c.gap, "[study] observables must not be empty");
  }

  if (auto v = get("constants", "h")) c.constants.h = to_double("constants", "h", *v);
  if (auto v = get("constants", "robin_samples"))
    c.constants.robin_samples = static_cast<int>(to_integer("constants", "robin_samples", *v));
  require(c.constants.h > 0.0 && c.constants.h <= 0.5, "[constants] h must lie in (0, 0.5]");
  require(c.constants.robin_samples >= 0, "[constants] robin_samples must be non-negative");

  ValidateSettings& val = c.validate;
  auto count = [&](const char* key, int& slot) {
    if (auto v = get("validate", key)) slot = static_cast<int>(to_integer("validate", key, *v));
    require(slot >= 1, std::string("[validate] ") + key + " must be at least 1 (empty corpus)");
  };
  count("functions", val.functions);
  count("spinors", val.spinors);
  count("pairs", val.pairs);
  count("scheme_trials", val.scheme_trials);
  count("scheme_max_dim", val.scheme_max_dim);
  if (auto v = get("validate", "max_freq")) val.max_freq = static_cast<int>(to_integer("validate", "max_freq", *v));
  require(val.max_freq >= 0 && val.max_freq <= 64, "[validate] max_freq must lie in [0, 64]");
  if (auto v = get("validate", "graph_m_star")) val.graph_m_star = to_double("validate", "graph_m_star", *v);
  require(val.graph_m_star >= 0.0, "[validate] graph_m_star must be non-negative");
  return c;
}

Sections to_sections(const RunConfig& c) {
  Sections s;
  s["run"] = {{"seed", std::to_string(c.seed)}, {"out", c.out}, {"workers", std::to_string(c.workers)}};
  Section& l = s["lattice"];
  l["epsilon"] = format_double(c.lattice.epsilon);
  l["m_star"] = format_double(c.lattice.m_star);
  l["kappa"] = format_double(c.lattice.d_rule.kappa);
  l["c"] = format_double(c.lattice.d_rule.c);
  l["offset_x"] = format_double(c.offset_fraction.x());
  l["offset_y"] = format_double(c.offset_fraction.y());
  l["epsilon0"] = format_double(c.lattice.epsilon0);
  l["degenerate"] = c.degenerate ? "true" : "false";
  for (const auto& [k, v] : shape_to_fields(c.lattice.shape)) l["shape." + k] = v;
  const char* method = c.solver.method == ResolventMethod::dense       ? "dense"
                       : c.solver.method == ResolventMethod::iterative ? "iterative"
                                                                        : "automatic";
  s["solver"] = {{"N", std::to_string(c.solver.cutoff)},
                 {"grid", std::to_string(c.solver.grid)},
                 {"refine", c.solver.refine ? "true" : "false"},
                 {"truncation_check", c.solver.truncation_check ? "true" : "false"},
                 {"use_symmetry", c.solver.use_symmetry ? "true" : "false"},
                 {"method", method},
                 {"truncation_tolerance", format_double(c.truncation_tolerance)}};
  std::string eps;
  for (double e : c.epsilons) eps += (eps.empty() ? "" : ",") + format_double(e);
  std::string obs;
  if (c.nrc) obs = "nrc";
  if (c.gap) obs += obs.empty() ? "gap" : ",gap";
  s["study"] = {{"epsilons", eps}, {"observables", obs}};
  s["constants"] = {{"h", format_double(c.constants.h)},
                    {"robin_samples", std::to_string(c.constants.robin_samples)}};
  const ValidateSettings& v = c.validate;
  s["validate"] = {{"functions", std::to_string(v.functions)},
                   {"max_freq", std::to_string(v.max_freq)},
                   {"spinors", std::to_string(v.spinors)},
                   {"pairs", std::to_string(v.pairs)},
                   {"scheme_trials", std::to_string(v.scheme_trials)},
                   {"scheme_max_dim", std::to_string(v.scheme_max_dim)},
                   {"graph_m_star", format_double(v.graph_m_star)}};
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& ini_text) {
  pt::ptree tree;
  try {
    std::istringstream in(ini_text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  Sections sections;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty())
      throw ConfigError("key '" + name + "' outside any section");
    Section& out = sections[name];
    for (const auto& [key, value] : section) out[key] = value.get_value<std::string>();
  }
  return from_sections(sections);
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

nlohmann::ordered_json to_json(const RunConfig& config) {
  nlohmann::ordered_json j;
  for (const auto& [name, section] : to_sections(config))
    for (const auto& [key, value] : section) j[name][key] = value;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  Sections sections;
  for (const auto& [name, section] : j.items())
    for (const auto& [key, value] : section.items()) sections[name][key] = value.get<std::string>();
  return from_sections(sections);
}

SweepSpec sweep_spec(const RunConfig& c, const TemplateConstants& constants, const std::string& provenance) {
  SweepSpec s;
  s.lattice = c.lattice;
  s.offset_fraction = c.offset_fraction;
  s.epsilons = c.epsilons;
  s.solver = c.solver;
  s.nrc = c.nrc;
  s.gap = c.gap;
  s.degenerate = c.degenerate;
  s.constants = constants;
  s.constants_provenance = provenance;
  s.seed = c.seed;
  return s;
}

}  // namespace dirachom
