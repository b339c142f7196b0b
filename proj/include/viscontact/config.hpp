#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace viscontact {

enum class RunMode { elastic, viscoelastic, both, lipschitz };

const char* to_string(RunMode mode);
/// Throws ValidationError naming `key` for an unknown mode.
RunMode parse_mode(std::string_view text, const std::string& key = "mode");

enum class LoadShape { sine, constant };

const char* to_string(LoadShape shape);

/// Everything a run needs. Defaults reproduce the reference experiment.
struct RunConfig {
  // material
  double young_E = 1e4;
  double poisson_kappa = 0.4;
  double relaxation_b = 1e4;
  // contact and loads
  double yield_F = 10.0;
  double amplitude = 10.0;  // vertical traction on the arc: amplitude * shape(t)
  LoadShape load_shape = LoadShape::sine;
  // time grid
  double T_end = 5.0;
  int n_steps = 100;
  // mesh
  double h_interior = 0.275;
  double h_contact = 0.06;
  // solver
  double opt_tol = 1e-14;
  int max_inner_iters = 20000;
  int restart_period = 0;
  bool diagonal_scaling = true;
  // verification
  int vi_probes = 500;
  int sigma_probes = 500;
  int candidate_probes = 16;
  int candidate_steps = 8;
  double certificate_tol = 1e-6;
  std::uint64_t seed = 20240607;
  // experiment
  RunMode mode = RunMode::both;
  std::vector<double> snapshot_times = {1.5, 2.75, 4.0, 5.0};
  std::vector<double> lipschitz_scales = {1e-1, 1e-2, 1e-3};
  std::filesystem::path output_dir;

  /// Vertical traction f2y at time t.
  double f2y(double t) const;
  /// Throws ValidationError naming the first offending key.
  void validate() const;
  /// True when the physical and discretization parameters are the defaults.
  bool is_reference_setup() const;
};

/// Parses `key = value` lines. Blank lines and `#` comments are ignored.
/// Omitted keys keep their defaults; unknown or repeated keys and malformed
/// lines raise ParseError with the line number; out-of-range values raise
/// ValidationError naming the key.
RunConfig parse_config(std::string_view text);

/// Reads and parses a configuration file.
RunConfig load_config(const std::filesystem::path& path);

/// Comma-separated list of reals, e.g. "1.5,2.75".
std::vector<double> parse_real_list(std::string_view text, const std::string& key);

}  // namespace viscontact
