#include "mfg/config.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

nlohmann::json parse_value(std::string text) {
  text = trim(text);
  if (!text.empty() && text.front() != '"') {
    const auto hash = text.find(" #");
    if (hash != std::string::npos) text = trim(text.substr(0, hash));
  }
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return text;
  }
}

std::pair<std::string, nlohmann::json> split_assignment(const std::string& line, int line_no) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
  const std::string key = trim(line.substr(0, eq));
  if (key.empty()) throw ParseError("empty key", line_no);
  return {key, parse_value(line.substr(eq + 1))};
}

}  // namespace

Config Config::parse(std::istream& in) {
  Config config;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ParseError("unterminated section header", line_no);
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto [key, value] = split_assignment(t, line_no);
    if (!section.empty()) key = section + "." + key;
    config.entries_[key] = std::move(value);
  }
  return config;
}

Config Config::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'", 0);
  return parse(in);
}

void Config::set_from_string(const std::string& assignment) {
  auto [key, value] = split_assignment(assignment, 0);
  entries_[key] = std::move(value);
}

const nlohmann::json* Config::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v->get<double>();
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
  return v->get<int>();
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError("config key '" + key + "' must be true or false");
  return v->get<bool>();
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError("config key '" + key + "' must be a string");
  return v->get<std::string>();
}

nlohmann::json Config::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : entries_) j[k] = v;
  return j;
}

std::string Config::hash() const {
  std::string canonical;
  for (const auto& [k, v] : entries_) canonical += k + "=" + v.dump() + "\n";
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "mesh.family",          "mesh.level",           "mesh.levels",
      "stabilization",        "stabilization.omega_factor", "stabilization.mu",
      "problem.nu",           "problem.hamiltonian",  "problem.huber_radius",
      "problem.controls",     "problem.smoothing",    "problem.coupling",
      "problem.c_F",          "problem.kernel_amplitude", "problem.kernel_width",
      "problem.source",       "problem.exact",        "problem.g0",
      "problem.f0",           "problem.rough_jump",   "solver.tol_outer",     "solver.max_outer",
      "solver.damping",       "solver.tol_newton",    "solver.max_newton",
      "solver.linear_solver", "reference.offset",     "verify.level",
      "verify.dmp_trials",    "verify.monotonicity_pairs", "verify.gradient_samples",
      "verify.convexity_triples", "verify.bound_samples", "verify.semismooth_pairs",
      "output.dir",           "output.timings",       "seed"};
  return keys;
}

void require_one_of(const std::string& key, const std::string& value,
                    std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw ConfigError("config key '" + key + "' = '" + value + "' must be one of {" + list + "}");
}

}  // namespace

RunConfig parse_run_config(const Config& config) {
  for (const auto& [key, value] : config.entries()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig rc;
  const std::string family = config.get_string("mesh.family", rc.family);
  if (family.rfind("file:", 0) == 0) {
    rc.family = "file";
    rc.mesh_path = family.substr(5);
    if (rc.mesh_path.empty()) throw ConfigError("mesh.family 'file:' needs a path");
  } else {
    require_one_of("mesh.family", family, {"xz_square", "acute_rhombus"});
    rc.family = family;
  }
  rc.level = config.get_int("mesh.level", rc.level);
  if (rc.level < 0) throw ConfigError("mesh.level must be >= 0");
  if (const auto* levels = config.find("mesh.levels")) {
    if (!levels->is_array() || levels->size() != 2 || !(*levels)[0].is_number_integer() ||
        !(*levels)[1].is_number_integer()) {
      throw ConfigError("mesh.levels must be [min, max]");
    }
    rc.min_level = (*levels)[0].get<int>();
    rc.max_level = (*levels)[1].get<int>();
    if (rc.min_level < 0 || rc.max_level < rc.min_level) {
      throw ConfigError("mesh.levels must satisfy 0 <= min <= max");
    }
  }

  rc.stabilization = config.get_string("stabilization", rc.stabilization);
  require_one_of("stabilization", rc.stabilization, {"auto", "xz", "acute", "none"});
  rc.stab_options.omega_factor = config.get_double("stabilization.omega_factor", 0.0);
  rc.stab_options.mu = config.get_double("stabilization.mu", rc.stab_options.mu);

  rc.nu = config.get_double("problem.nu", rc.nu);
  rc.hamiltonian = config.get_string("problem.hamiltonian", rc.hamiltonian);
  require_one_of("problem.hamiltonian", rc.hamiltonian, {"huber", "finite"});
  rc.huber_radius = config.get_double("problem.huber_radius", rc.huber_radius);
  rc.smoothing = config.get_double("problem.smoothing", rc.smoothing);
  if (const auto* controls = config.find("problem.controls")) {
    if (!controls->is_array() || controls->empty()) {
      throw ConfigError("problem.controls must be a nonempty array of [bx, by, cost]");
    }
    for (const auto& c : *controls) {
      if (!c.is_array() || c.size() != 3) {
        throw ConfigError("problem.controls entries must be [bx, by, cost]");
      }
      rc.control_drifts.emplace_back(c[0].get<double>(), c[1].get<double>());
      rc.control_costs.push_back(c[2].get<double>());
    }
  } else {
    rc.control_drifts = {Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1), Vec2(0, -1)};
    rc.control_costs = {0.0, 0.0, 0.0, 0.0};
  }
  rc.coupling = config.get_string("problem.coupling", rc.coupling);
  require_one_of("problem.coupling", rc.coupling, {"local_linear", "nonlocal_gaussian"});
  rc.c_F = config.get_double("problem.c_F", rc.c_F);
  rc.kernel_amplitude = config.get_double("problem.kernel_amplitude", rc.kernel_amplitude);
  rc.kernel_width = config.get_double("problem.kernel_width", rc.kernel_width);
  rc.source = config.get_string("problem.source", rc.source);
  require_one_of("problem.source", rc.source, {"manufactured", "uniform", "rough", "zero"});
  rc.exact = config.get_string("problem.exact", rc.exact);
  require_one_of("problem.exact", rc.exact, {"sine_product", "zero", "custom"});
  rc.g0 = config.get_double("problem.g0", rc.g0);
  rc.f0 = config.get_double("problem.f0", rc.f0);
  rc.rough_jump = config.get_double("problem.rough_jump", rc.rough_jump);

  rc.solver.tol_outer = config.get_double("solver.tol_outer", rc.solver.tol_outer);
  rc.solver.max_outer = config.get_int("solver.max_outer", rc.solver.max_outer);
  rc.solver.damping = config.get_double("solver.damping", rc.solver.damping);
  rc.solver.tol_newton = config.get_double("solver.tol_newton", rc.solver.tol_newton);
  rc.solver.max_newton = config.get_int("solver.max_newton", rc.solver.max_newton);
  require_one_of("solver.linear_solver", config.get_string("solver.linear_solver", "direct_sparse"),
                 {"direct_sparse"});
  rc.solver.validate();
  rc.reference_offset = config.get_int("reference.offset", rc.reference_offset);
  if (rc.reference_offset < 1) throw ConfigError("reference.offset must be >= 1");

  rc.verify.level = config.get_int("verify.level", rc.verify.level);
  rc.verify.dmp_trials = config.get_int("verify.dmp_trials", rc.verify.dmp_trials);
  rc.verify.monotonicity_pairs =
      config.get_int("verify.monotonicity_pairs", rc.verify.monotonicity_pairs);
  rc.verify.gradient_samples = config.get_int("verify.gradient_samples", rc.verify.gradient_samples);
  rc.verify.convexity_triples =
      config.get_int("verify.convexity_triples", rc.verify.convexity_triples);
  rc.verify.bound_samples = config.get_int("verify.bound_samples", rc.verify.bound_samples);
  rc.verify.semismooth_pairs = config.get_int("verify.semismooth_pairs", rc.verify.semismooth_pairs);

  rc.output_dir = config.get_string("output.dir", rc.output_dir);
  rc.timings = config.get_bool("output.timings", rc.timings);
  const int seed = config.get_int("seed", 0);
  if (seed < 0) throw ConfigError("seed must be >= 0");
  rc.seed = static_cast<std::uint64_t>(seed);
  return rc;
}

MeshPtr base_mesh(const RunConfig& rc) {
  if (rc.family == "xz_square") return family_mesh(MeshFamily::XzSquare, 0);
  if (rc.family == "acute_rhombus") return family_mesh(MeshFamily::AcuteRhombus, 0);
  return read_mesh(rc.mesh_path);
}

Domain mesh_domain(const RunConfig& rc) {
  if (rc.family == "xz_square") return Domain::UnitSquare;
  if (rc.family == "acute_rhombus") return Domain::Rhombus;
  return Domain::Other;
}

StabilizationKind resolve_stabilization(const RunConfig& rc, bool allow_unstabilized) {
  if (rc.stabilization == "xz") return StabilizationKind::XzEdge;
  if (rc.stabilization == "acute") return StabilizationKind::AcuteArtificial;
  if (rc.stabilization == "none") {
    if (!allow_unstabilized) {
      throw ConfigError(
          "stabilization = none voids the discrete maximum principle; pass "
          "--allow-unstabilized to run it anyway");
    }
    return StabilizationKind::None;
  }
  return rc.family == "acute_rhombus" ? StabilizationKind::AcuteArtificial
                                      : StabilizationKind::XzEdge;
}

Hamiltonian build_hamiltonian(const RunConfig& rc) {
  if (rc.hamiltonian == "huber") return huber_ball(rc.huber_radius);
  return finite_control(rc.control_drifts, rc.control_costs, rc.smoothing);
}

MFGProblem build_problem(const RunConfig& rc) {
  const Hamiltonian h = build_hamiltonian(rc);
  const Domain domain = mesh_domain(rc);
  MFGProblem p;
  if (rc.source == "manufactured") {
    if (rc.exact == "custom") {
      throw ConfigError("problem.exact = custom is disabled; use sine_product or zero");
    }
    if (rc.coupling != "local_linear") {
      throw ConfigError("manufactured problems need problem.coupling = local_linear");
    }
    if (rc.exact == "zero") {
      p = make_zero_problem(rc.nu, h, rc.c_F, domain);
    } else {
      p = make_sine_problem(rc.nu, h, rc.c_F, domain);
    }
  } else if (rc.source == "uniform") {
    p = make_uniform_source_problem(rc.nu, h, rc.c_F, rc.g0, rc.f0, domain);
  } else if (rc.source == "rough") {
    if (domain != Domain::UnitSquare) {
      throw ConfigError("problem.source = rough is defined on the xz_square family only");
    }
    p = make_rough_density_problem(rc.nu, h, rc.c_F, rc.rough_jump);
  } else {
    p = make_zero_problem(rc.nu, h, rc.c_F, domain);
  }
  if (rc.coupling == "nonlocal_gaussian") {
    const double area = base_mesh(rc)->total_area();
    p.coupling = nonlocal_gaussian_coupling(rc.c_F, rc.kernel_amplitude, rc.kernel_width,
                                            p.coupling.offset, area);
  }
  return p;
}

}  // namespace mfg
