#pragma once

// Command-line front end: figure data as delimited text and verification
// campaigns as JSON reports.
//
//   retlab verify          identity over a z-sweep (or one point / random points)
//   retlab slice           field or d'Alembertian on an x-z grid
//   retlab converge        convergence study at one point
//   retlab counterexample  sourced vs sourceless shell wave
//   retlab collapse        light-cone delta collapse, optionally as a sigma sweep
//
// Exit codes: 0 pass, 1 tolerance breach or evaluation failure, 2 usage or
// configuration error.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "retlab/geometry.hpp"

namespace retlab::cli {

enum ExitCode : int { kPass = 0, kBreach = 1, kUsage = 2 };

// "lo:hi:step" with step > 0 and lo <= hi. Nodes are lo + i * step up to hi
// inclusive (with a 1e-9 step slack against rounding).
struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;

  static Range parse(const std::string& text);
  std::vector<double> nodes() const;
  std::string to_string() const;
};

// Every flag, before and after defaults are resolved. Unset optionals take
// command-specific defaults in resolve().
struct RunConfig {
  std::string command;

  std::string field = "bump";
  std::optional<double> v;
  double c = 1.0;

  std::optional<double> x, y, z, t;
  std::optional<std::string> x_range, z_range;

  int n_radial = 256;
  int n_theta = 64;
  int n_phi = 128;
  std::optional<int> levels;
  std::optional<double> rho_max;
  double epsilon = 0.0;
  std::string propagator = "retarded";
  int threads = 0;

  std::optional<double> tolerance;
  double abs_tolerance = 1e-6;
  std::uint64_t seed = 0;
  int random_points = 0;

  std::string out = ".";
  bool timing = false;

  std::string kind = "field";
  std::string scenario = "sourceless";
  bool sigma_sweep = false;
  double sigma = 1e-3;
  double src_x = 0.0, src_y = 0.0, src_z = 0.0;

  // Fills every unset optional with the default for `command`.
  void resolve();
};

// Below this |f| a verify point is judged by abs_tolerance instead of the
// relative tolerance.
inline constexpr double kRelativeThreshold = 0.1;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace retlab::cli
