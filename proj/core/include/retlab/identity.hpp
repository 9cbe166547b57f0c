#pragma once

// Numerical checks of the retarded integral identity
//
//   f(r, t) = -(1 / 4 pi) int d^3 r' [box' f](r', t') / |r - r'|,
//
// and of the auxiliary statements around it: the retarded potential, the
// commutation of derivatives with the retarded integral, the static Green's
// third identity, the light-cone delta collapse, and the homogeneous-wave
// counter-example.

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "retlab/fields.hpp"
#include "retlab/geometry.hpp"
#include "retlab/quadrature.hpp"
#include "retlab/retarded_kernel.hpp"

namespace retlab::identity {

// Denominator floor of the relative error.
inline constexpr double kRelativeErrorFloor = 1e-12;

struct BoundarySample {
  double face_radius = 0.0;
  double value = 0.0;
};

struct VerificationReport {
  SpaceTimePoint point{};
  // From the analytic field, never from quadrature.
  double f_expected = 0.0;
  double f_calc = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  quadrature::ConvergenceRecord convergence;
  // False when the field violates the decay assumption (no finite retarded
  // support); the identity is not expected to hold then.
  bool decay_ok = true;
  kernel::Propagator propagator = kernel::Propagator::Retarded;
  std::chrono::duration<double> wall_time{0.0};
  // Truncation radius and radial breaks actually used.
  double rho_max = 0.0;
  std::vector<double> radial_breaks;
  // Counter-example studies only.
  std::vector<BoundarySample> boundary_terms;
  std::string note;
};

// abs = |expected - calc|, rel = abs / max(|expected|, kRelativeErrorFloor).
void fill_errors(VerificationReport& report);

struct VerifyOptions {
  // Integrate fields without finite retarded support anyway, using
  // qcfg.rho_max (which must then be set). decay_ok is reported false.
  bool allow_unbounded = false;
};

// f_calc = -(1/4 pi) int box' f / |r - r'| at the resolution in qcfg, with a
// convergence study over qcfg.refinement_levels coarser-to-qcfg resolutions.
// When qcfg.rho_max is unset it is taken from support_radius; when set larger,
// the support radius is added as a radial break so the outer panel only
// samples zeros. A nonzero kcfg.epsilon swaps 1/|r - r'| for the regularized
// kernel, so f_calc then differs from f by O(epsilon^2 log epsilon).
VerificationReport verify_pointwise(const fields::Field& field,
                                    const SpaceTimePoint& p,
                                    const quadrature::QuadratureConfig& qcfg,
                                    const kernel::KernelConfig& kcfg,
                                    VerifyOptions options = {});

// phi(r, t) = int f(r', t') K(|r - r'|) d^3 r' with K = 1/|r - r'| when
// kcfg.epsilon == 0 and the regularized kernel otherwise.
double retarded_potential(const fields::Field& field, const SpaceTimePoint& p,
                          const quadrature::QuadratureConfig& qcfg,
                          const kernel::KernelConfig& kcfg);

enum class Axis { X, Y, Z };

struct CommutationResult {
  // d phi / d axis by central differences of retarded_potential.
  double first_lhs = 0.0;
  // int f_{axis'}(r', t') / |r - r'| d^3 r'.
  double first_rhs = 0.0;
  // d^2 phi / d axis^2 by central differences.
  double second_lhs = 0.0;
  // int f_{axis' axis'}(r', t') / |r - r'| d^3 r'.
  double second_rhs = 0.0;
};

CommutationResult derivative_commutation_check(
    const fields::Field& field, const SpaceTimePoint& p,
    const quadrature::QuadratureConfig& qcfg, const kernel::KernelConfig& kcfg,
    Axis axis = Axis::X, double fd_step = 0.05);

// Green's third identity: f(r) = -(1/4 pi) int lap f(r') / |r - r'| d^3 r',
// no retardation. Requires a time-independent field.
VerificationReport static_green_identity(const fields::Field& field,
                                         const Vec3& r,
                                         const quadrature::QuadratureConfig& qcfg);

struct PastSplit {
  // f_calc over the whole retarded support.
  double full = 0.0;
  // f_calc with the most recent slab |r' - r| < c dt removed.
  double excluded = 0.0;
  double contribution() const { return full - excluded; }
};

// How much of f_calc comes from the interval dt just before t. Both integrals
// share the same nodes outside rho = c dt, so the difference is exactly the
// inner-ball part. Scales as dt^2 for a C^2 field.
PastSplit recent_past_contribution(const fields::Field& field, const SpaceTimePoint& p,
                                   double dt, const quadrature::QuadratureConfig& qcfg,
                                   const kernel::KernelConfig& kcfg);

using TimeFunction = std::function<double(double)>;

struct CollapseResolution {
  int panels = 64;
  int nodes_per_panel = 16;
  // Gaussian tails beyond this many sigma are dropped.
  double cutoff_sigmas = 12.0;
};

// int c dt' g(t') delta_sigma[chi(t')] theta(+/-(t - t')) with
// chi = (d + c (t - t'))(d - c (t - t')), d = |r - r_src|, and delta_sigma a
// normalized Gaussian of width sigma in chi. Tends to g(t_ret) / (2 d) as
// sigma -> 0. theta selects t' < t (retarded) or t' > t (advanced).
// Throws DegenerateLightConeError when r == r_src.
double delta_shell_collapse(const Vec3& r, const Vec3& r_src, double t,
                            double sigma, const kernel::KernelConfig& kcfg,
                            const TimeFunction& g = {},
                            CollapseResolution resolution = {});

// g(t_ret) / (2 |r - r_src|): the sigma -> 0 limit of delta_shell_collapse.
double delta_shell_limit(const Vec3& r, const Vec3& r_src, double t,
                         const kernel::KernelConfig& kcfg,
                         const TimeFunction& g = {});

enum class Scenario { SourcedShell, SourcelessShell };

const char* to_string(Scenario scenario);

// Geometry of the counter-example. Defaults: unit wave speed, an incoming
// shell of width 0.5 whose profile peaks at u = 4, observed at (0, 0, 1) at
// t = 3 where the shell crosses with amplitude 1. The sourced variant is
// switched on over [0, 0.5], well before t.
struct CounterexampleSetup {
  fields::ShellParams shell{4.0, 0.5, fields::SwitchWindow{0.0, 0.5}};
  double c = 1.0;
  // Truncation radius for the sourceless case (the sourced case has a finite
  // retarded support and ignores it).
  double sourceless_rho_max = 12.0;
  // Sphere radii probed by boundary_term_estimate.
  std::vector<double> face_radii{8.0, 16.0, 32.0, 64.0};
};

inline SpaceTimePoint default_counterexample_point() { return {0.0, 0.0, 1.0, 3.0}; }

fields::FieldSpec counterexample_field(Scenario scenario,
                                       const CounterexampleSetup& setup = {});

// Runs the identity on a sourced (switch-windowed) or sourceless (always-on)
// shell wave. A violated identity is reported, not thrown: for the
// sourceless shell f_calc is ~0 while f_expected is the wave amplitude,
// decay_ok is false, and boundary_terms show a nonzero plateau.
VerificationReport counterexample_study(Scenario scenario,
                                        const SpaceTimePoint& p,
                                        const quadrature::QuadratureConfig& qcfg,
                                        const kernel::KernelConfig& kcfg,
                                        const CounterexampleSetup& setup = {});

}  // namespace retlab::identity
