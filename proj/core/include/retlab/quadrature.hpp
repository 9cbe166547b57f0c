#pragma once

// Product quadrature for retarded integrals
//
//   I = int d^3 r' F(r', t') / |r - r'|,   t' = t -/+ |r - r'| / c,
//
// in spherical coordinates centred on the observation point. With
// r' = r + rho * w the measure d^3 r' / |r - r'| becomes rho drho dOmega, so
// the 1/|r - r'| singularity is absorbed by the Jacobian and no regularization
// is needed.
//
// Radial: Gauss-Legendre on [rho_min, rho_max], optionally split into panels
// at caller-supplied break points (each panel gets n_radial nodes).
// Polar: Gauss-Legendre in cos(theta). Azimuthal: trapezoid on n_phi points.
//
// The sum is reduced in a fixed order per resolution, so results do not depend
// on the number of worker threads.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "retlab/fields.hpp"
#include "retlab/geometry.hpp"
#include "retlab/retarded_kernel.hpp"

namespace retlab::quadrature {

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]. Cached.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

struct QuadratureConfig {
  // Radial resolution dominates the error: the integrand of the bump fields
  // has a jump in its second derivative where the retarded support ends.
  int n_radial = 256;
  int n_theta = 64;
  int n_phi = 128;
  // Truncation radius. Callers in the identity module fill it from
  // support_radius when left unset.
  std::optional<double> rho_max;
  double rho_min = 0.0;
  // Interior radial panel boundaries; values outside (rho_min, rho_max) are
  // ignored.
  std::vector<double> radial_breaks;
  // Number of resolutions used by convergence studies.
  int refinement_levels = 3;
  // 0 means std::thread::hardware_concurrency().
  int threads = 0;

  void validate() const;
  // Every node count multiplied by factor (rounded, at least 2).
  QuadratureConfig scaled(double factor) const;
  long long node_count() const;
};

using RetardedIntegrand = std::function<double(const SpaceTimePoint&)>;

// int d^3 r' integrand(r', t') / |r - r'| over rho_min <= |r' - r| <= rho_max.
// Throws EvaluationError (carrying the offending r', t') on a non-finite sample.
double integrate_retarded(const RetardedIntegrand& integrand,
                          const SpaceTimePoint& center,
                          const QuadratureConfig& cfg,
                          const kernel::KernelConfig& kcfg);

// Radius beyond which field(r', t') vanishes for every r' on the retarded (or
// advanced) cone of `center`. Throws UnboundedSupportError when none exists.
double support_radius(const fields::Field& field, const SpaceTimePoint& center,
                      const kernel::KernelConfig& kcfg);

// Radii on the cone of `center` where a field's time structure changes
// abruptly (switch-window edges); useful as radial panel breaks.
std::vector<double> natural_breaks(const fields::Field& field,
                                   const SpaceTimePoint& center,
                                   const kernel::KernelConfig& kcfg);

enum class ConvergenceStatus {
  // Successive differences shrink with a consistent sign.
  Converged,
  // Differences shrink but alternate in sign; no extrapolation attempted.
  Alternating,
  // Differences do not shrink; no extrapolation attempted.
  Oscillating,
  // All levels agree to round-off.
  Exact,
};

const char* to_string(ConvergenceStatus status);

struct Resolution {
  int n_radial = 0;
  int n_theta = 0;
  int n_phi = 0;
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct ConvergenceRecord {
  std::vector<Resolution> resolutions;
  std::vector<double> values;
  double richardson_estimate = 0.0;
  // Measured order in the refinement parameter (node counts double per level).
  // 0 when it cannot be measured (Exact, Oscillating).
  double observed_order = 0.0;
  // max(|finest - previous|, |previous difference| / 2^4); 0 for a single
  // level.
  double error_estimate = 0.0;
  ConvergenceStatus status = ConvergenceStatus::Exact;

  double finest() const { return values.empty() ? 0.0 : values.back(); }
};

// Evaluates integrate_retarded at base_cfg scaled by 2^k, k = 0..levels-1,
// measures the observed order from the last three values and Richardson
// extrapolates when the sequence is monotone.
ConvergenceRecord convergence_study(const RetardedIntegrand& integrand,
                                    const SpaceTimePoint& center,
                                    const QuadratureConfig& base_cfg,
                                    const kernel::KernelConfig& kcfg,
                                    int levels);

// Analysis step of convergence_study, exposed for reuse on precomputed values.
ConvergenceRecord analyze_sequence(std::vector<Resolution> resolutions,
                                   std::vector<double> values,
                                   double refinement_factor = 2.0);

}  // namespace retlab::quadrature
