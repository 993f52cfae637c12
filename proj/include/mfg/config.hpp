#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfg/mesh.hpp"
#include "mfg/problem.hpp"
#include "mfg/solver.hpp"
#include "mfg/stabilization.hpp"

namespace mfg {

/// Flat key/value configuration.
///
/// Grammar, one entry per line:
///   # comment
///   [section]            prefixes following keys with "section."
///   key = value          value is a JSON literal (number, true/false, "string", array)
///                        or, failing that, a bare string
class Config {
 public:
  static Config parse(std::istream& in);
  static Config parse_string(const std::string& text);
  static Config load(const std::string& path);

  /// Parses `key=value` with the same value rules as the file grammar.
  void set_from_string(const std::string& assignment);
  void set(const std::string& key, nlohmann::json value) { entries_[key] = std::move(value); }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  const nlohmann::json* find(const std::string& key) const;

  const std::map<std::string, nlohmann::json>& entries() const { return entries_; }
  nlohmann::json to_json() const;
  /// FNV-1a (64 bit, hex) of the canonical sorted `key=value` listing.
  std::string hash() const;

 private:
  std::map<std::string, nlohmann::json> entries_;
};

struct VerifyOptions {
  int level = 4;
  int dmp_trials = 200;
  int monotonicity_pairs = 50;
  int gradient_samples = 1000;
  int convexity_triples = 10000;
  int bound_samples = 10000;
  int semismooth_pairs = 20;
};

struct RunConfig {
  std::string family = "xz_square";  ///< xz_square, acute_rhombus or file
  std::string mesh_path;
  int level = 4;
  int min_level = 2;
  int max_level = 6;
  std::string stabilization = "auto";
  StabilizationOptions stab_options;

  double nu = 1.0;
  std::string hamiltonian = "huber";
  double huber_radius = 1.0;
  std::vector<Vec2> control_drifts;
  std::vector<double> control_costs;
  double smoothing = 0.1;
  std::string coupling = "local_linear";
  double c_F = 1.0;
  double kernel_amplitude = 0.5;
  double kernel_width = 0.2;
  std::string source = "manufactured";  ///< manufactured, uniform, rough, zero
  std::string exact = "sine_product";   ///< sine_product, zero, custom
  double g0 = 1.0;
  double f0 = 1.0;
  double rough_jump = 1.0 / 3.0;

  SolverConfig solver;
  int reference_offset = 2;
  VerifyOptions verify;

  std::string output_dir = ".";
  bool timings = false;
  std::uint64_t seed = 0;
};

/// Reads every known key; throws ConfigError on unknown keys or invalid values.
RunConfig parse_run_config(const Config& config);

/// Level-0 mesh of the configured family (or the mesh file).
MeshPtr base_mesh(const RunConfig& rc);
Domain mesh_domain(const RunConfig& rc);

/// auto -> xz (square) / acute (rhombus) / xz (file). `none` needs allow_unstabilized.
StabilizationKind resolve_stabilization(const RunConfig& rc, bool allow_unstabilized);

Hamiltonian build_hamiltonian(const RunConfig& rc);
MFGProblem build_problem(const RunConfig& rc);

}  // namespace mfg
