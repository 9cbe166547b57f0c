#include "retlab/identity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "retlab/errors.hpp"

namespace retlab::identity {
namespace {

using quadrature::QuadratureConfig;
using Clock = std::chrono::steady_clock;

constexpr double kFourPi = 4.0 * std::numbers::pi;

// Truncation for a field with finite retarded support. The support radius is
// kept as a panel break when the caller truncates further out, so the extra
// panel only ever samples zeros.
struct Truncation {
  double rho_max = 0.0;
  std::vector<double> breaks;
  bool empty = false;
  bool decay_ok = true;
};

Truncation plan_truncation(const fields::Field& field, const SpaceTimePoint& p,
                           const QuadratureConfig& qcfg,
                           const kernel::KernelConfig& kcfg,
                           bool allow_unbounded) {
  Truncation plan;
  plan.breaks = qcfg.radial_breaks;
  double support = 0.0;
  try {
    support = quadrature::support_radius(field, p, kcfg);
  } catch (const UnboundedSupportError&) {
    if (!allow_unbounded) throw;
    if (!qcfg.rho_max) {
      throw ConfigError(
          "field has unbounded retarded support; an explicit rho_max is "
          "required to integrate it anyway");
    }
    plan.decay_ok = false;
    plan.rho_max = *qcfg.rho_max;
    return plan;
  }
  for (double b : quadrature::natural_breaks(field, p, kcfg)) plan.breaks.push_back(b);
  if (support == 0.0) {
    plan.empty = true;
    return plan;
  }
  plan.rho_max = qcfg.rho_max.value_or(support);
  if (plan.rho_max > support) plan.breaks.push_back(support);
  std::sort(plan.breaks.begin(), plan.breaks.end());
  return plan;
}

QuadratureConfig with_truncation(QuadratureConfig cfg, const Truncation& plan) {
  cfg.rho_max = plan.rho_max;
  cfg.radial_breaks = plan.breaks;
  return cfg;
}

// Runs the integral at qcfg scaled by 2^-k, k = levels-1 .. 0, so the finest
// level is exactly qcfg.
quadrature::ConvergenceRecord refine_to(const quadrature::RetardedIntegrand& integrand,
                                        const SpaceTimePoint& p,
                                        const QuadratureConfig& qcfg,
                                        const kernel::KernelConfig& kcfg) {
  std::vector<quadrature::Resolution> resolutions;
  std::vector<double> values;
  for (int k = qcfg.refinement_levels - 1; k >= 0; --k) {
    const QuadratureConfig cfg = qcfg.scaled(std::ldexp(1.0, -k));
    resolutions.push_back({cfg.n_radial, cfg.n_theta, cfg.n_phi});
    values.push_back(quadrature::integrate_retarded(integrand, p, cfg, kcfg));
  }
  return quadrature::analyze_sequence(std::move(resolutions), std::move(values));
}

quadrature::ConvergenceRecord zero_record(const QuadratureConfig& qcfg) {
  return quadrature::analyze_sequence({{qcfg.n_radial, qcfg.n_theta, qcfg.n_phi}},
                                      {0.0});
}

double axis_component(const fields::PartialBundle& b, Axis axis, bool second) {
  switch (axis) {
    case Axis::X: return second ? b.f_xx : b.f_x;
    case Axis::Y: return second ? b.f_yy : b.f_y;
    case Axis::Z: return second ? b.f_zz : b.f_z;
  }
  return 0.0;
}

SpaceTimePoint shifted(SpaceTimePoint p, Axis axis, double d) {
  switch (axis) {
    case Axis::X: p.x += d; break;
    case Axis::Y: p.y += d; break;
    case Axis::Z: p.z += d; break;
  }
  return p;
}

double integrate_over_support(const fields::Field& field,
                              const quadrature::RetardedIntegrand& integrand,
                              const SpaceTimePoint& p, const QuadratureConfig& qcfg,
                              const kernel::KernelConfig& kcfg) {
  const Truncation plan = plan_truncation(field, p, qcfg, kcfg, false);
  if (plan.empty) return 0.0;
  return quadrature::integrate_retarded(integrand, p, with_truncation(qcfg, plan), kcfg);
}

}  // namespace

void fill_errors(VerificationReport& report) {
  report.abs_error = std::abs(report.f_expected - report.f_calc);
  report.rel_error =
      report.abs_error / std::max(std::abs(report.f_expected), kRelativeErrorFloor);
}

VerificationReport verify_pointwise(const fields::Field& field,
                                    const SpaceTimePoint& p,
                                    const QuadratureConfig& qcfg,
                                    const kernel::KernelConfig& kcfg,
                                    VerifyOptions options) {
  const auto start = Clock::now();
  field.validate();
  kcfg.validate();
  if (!is_finite(p)) throw ConfigError("evaluation point must be finite");

  VerificationReport report;
  report.point = p;
  report.propagator = kcfg.propagator;
  report.f_expected = field.value(p);

  const Truncation plan = plan_truncation(field, p, qcfg, kcfg, options.allow_unbounded);
  report.decay_ok = plan.decay_ok;
  report.rho_max = plan.rho_max;
  report.radial_breaks = plan.breaks;
  if (plan.empty) {
    report.f_calc = 0.0;
    report.convergence = zero_record(qcfg);
  } else {
    const Vec3 r = p.position();
    auto integrand = [&](const SpaceTimePoint& q) {
      const double value = -kernel::dalembertian(field, q, kcfg) / kFourPi;
      if (kcfg.epsilon == 0.0) return value;
      const double d = norm(q.position() - r);
      return value * d * kernel::regularized_kernel(d, kcfg.epsilon);
    };
    report.convergence = refine_to(integrand, p, with_truncation(qcfg, plan), kcfg);
    report.f_calc = report.convergence.finest();
  }
  fill_errors(report);
  report.wall_time = Clock::now() - start;
  return report;
}

double retarded_potential(const fields::Field& field, const SpaceTimePoint& p,
                          const QuadratureConfig& qcfg,
                          const kernel::KernelConfig& kcfg) {
  field.validate();
  kcfg.validate();
  const Vec3 r = p.position();
  auto integrand = [&](const SpaceTimePoint& q) {
    const double value = field.value(q);
    if (kcfg.epsilon == 0.0) return value;
    const double d = norm(q.position() - r);
    return value * d * kernel::regularized_kernel(d, kcfg.epsilon);
  };
  return integrate_over_support(field, integrand, p, qcfg, kcfg);
}

CommutationResult derivative_commutation_check(const fields::Field& field,
                                               const SpaceTimePoint& p,
                                               const QuadratureConfig& qcfg,
                                               const kernel::KernelConfig& kcfg,
                                               Axis axis, double fd_step) {
  if (!(fd_step > 0.0)) throw ConfigError("finite-difference step must be positive");
  const double h = fd_step;
  auto phi = [&](double d) {
    return retarded_potential(field, shifted(p, axis, d), qcfg, kcfg);
  };
  // Fourth-order central stencils.
  const double m2 = phi(-2.0 * h);
  const double m1 = phi(-h);
  const double c0 = phi(0.0);
  const double p1 = phi(h);
  const double p2 = phi(2.0 * h);

  CommutationResult out;
  out.first_lhs = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
  out.second_lhs = (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * h * h);
  out.first_rhs = integrate_over_support(
      field,
      [&](const SpaceTimePoint& q) { return axis_component(field.partials(q), axis, false); },
      p, qcfg, kcfg);
  out.second_rhs = integrate_over_support(
      field,
      [&](const SpaceTimePoint& q) { return axis_component(field.partials(q), axis, true); },
      p, qcfg, kcfg);
  return out;
}

VerificationReport static_green_identity(const fields::Field& field, const Vec3& r,
                                         const QuadratureConfig& qcfg) {
  const auto start = Clock::now();
  field.validate();
  if (!field.time_independent()) {
    throw ConfigError("static Green identity requires a time-independent field");
  }
  const SpaceTimePoint p = SpaceTimePoint::at(r, 0.0);
  const kernel::KernelConfig kcfg{};

  VerificationReport report;
  report.point = p;
  report.f_expected = field.value(p);
  const Truncation plan = plan_truncation(field, p, qcfg, kcfg, false);
  report.rho_max = plan.rho_max;
  report.radial_breaks = plan.breaks;
  if (plan.empty) {
    report.convergence = zero_record(qcfg);
  } else {
    // No retardation: the Laplacian is sampled at t = 0 regardless of t'.
    auto integrand = [&](const SpaceTimePoint& q) {
      return -field.partials(SpaceTimePoint::at(q.position(), 0.0)).laplacian() / kFourPi;
    };
    report.convergence = refine_to(integrand, p, with_truncation(qcfg, plan), kcfg);
    report.f_calc = report.convergence.finest();
  }
  fill_errors(report);
  report.wall_time = Clock::now() - start;
  return report;
}

PastSplit recent_past_contribution(const fields::Field& field, const SpaceTimePoint& p,
                                   double dt, const QuadratureConfig& qcfg,
                                   const kernel::KernelConfig& kcfg) {
  if (!(dt > 0.0)) throw ConfigError("past interval dt must be positive");
  field.validate();
  kcfg.validate();
  const Truncation plan = plan_truncation(field, p, qcfg, kcfg, false);
  PastSplit split;
  const double inner = kcfg.c * dt;
  if (plan.empty) return split;
  auto integrand = [&](const SpaceTimePoint& q) {
    return -kernel::dalembertian(field, q, kcfg) / kFourPi;
  };
  QuadratureConfig full = with_truncation(qcfg, plan);
  full.radial_breaks.push_back(inner);
  split.full = quadrature::integrate_retarded(integrand, p, full, kcfg);
  if (inner < plan.rho_max) {
    QuadratureConfig outer = full;
    outer.rho_min = inner;
    split.excluded = quadrature::integrate_retarded(integrand, p, outer, kcfg);
  }
  return split;
}

double delta_shell_collapse(const Vec3& r, const Vec3& r_src, double t, double sigma,
                            const kernel::KernelConfig& kcfg, const TimeFunction& g,
                            CollapseResolution resolution) {
  kcfg.validate();
  if (!(sigma > 0.0)) throw ConfigError("mollifier width sigma must be positive");
  if (resolution.panels < 1 || resolution.nodes_per_panel < 1) {
    throw ConfigError("collapse resolution must be positive");
  }
  const double d = norm(r - r_src);
  if (d == 0.0) {
    throw DegenerateLightConeError(
        "r == r_src: the light cone degenerates to its apex");
  }
  const double c = kcfg.c;
  const double direction = kcfg.propagator == kernel::Propagator::Retarded ? -1.0 : 1.0;

  // tau = |t - t'| >= 0 on the selected half of the cone; chi = d^2 - c^2 tau^2.
  const double reach = resolution.cutoff_sigmas * sigma;
  const double tau_lo = std::sqrt(std::max(0.0, d * d - reach)) / c;
  const double tau_hi = std::sqrt(d * d + reach) / c;
  const double norm_const = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));

  const auto& rule = quadrature::gauss_legendre(resolution.nodes_per_panel);
  const double panel = (tau_hi - tau_lo) / resolution.panels;
  double sum = 0.0;
  for (int k = 0; k < resolution.panels; ++k) {
    const double mid = tau_lo + (k + 0.5) * panel;
    double acc = 0.0;
    for (int i = 0; i < resolution.nodes_per_panel; ++i) {
      const double tau = mid + 0.5 * panel * rule.nodes[i];
      const double chi = d * d - c * c * tau * tau;
      const double weight = norm_const * std::exp(-0.5 * (chi / sigma) * (chi / sigma));
      const double gv = g ? g(t + direction * tau) : 1.0;
      acc += rule.weights[i] * c * gv * weight;
    }
    sum += 0.5 * panel * acc;
  }
  return sum;
}

double delta_shell_limit(const Vec3& r, const Vec3& r_src, double t,
                         const kernel::KernelConfig& kcfg, const TimeFunction& g) {
  const double d = norm(r - r_src);
  if (d == 0.0) {
    throw DegenerateLightConeError(
        "r == r_src: the light cone degenerates to its apex");
  }
  const double t_ret = kernel::retarded_time(r, r_src, t, kcfg);
  return (g ? g(t_ret) : 1.0) / (2.0 * d);
}

const char* to_string(Scenario scenario) {
  return scenario == Scenario::SourcedShell ? "sourced" : "sourceless";
}

fields::FieldSpec counterexample_field(Scenario scenario,
                                       const CounterexampleSetup& setup) {
  fields::ShellParams params = setup.shell;
  if (scenario == Scenario::SourcelessShell) {
    params.window.reset();
  } else if (!params.window) {
    throw ConfigError("sourced shell scenario needs a switch window");
  }
  return fields::FieldSpec::shell_wave(params, setup.c);
}

VerificationReport counterexample_study(Scenario scenario, const SpaceTimePoint& p,
                                        const QuadratureConfig& qcfg,
                                        const kernel::KernelConfig& kcfg,
                                        const CounterexampleSetup& setup) {
  const auto start = Clock::now();
  const fields::Field field = counterexample_field(scenario, setup);

  QuadratureConfig cfg = qcfg;
  VerifyOptions options;
  options.allow_unbounded = true;
  if (!field.compact_support() || kcfg.propagator == kernel::Propagator::Advanced) {
    if (!cfg.rho_max) cfg.rho_max = setup.sourceless_rho_max;
  }
  VerificationReport report = verify_pointwise(field, p, cfg, kcfg, options);

  for (double radius : setup.face_radii) {
    report.boundary_terms.push_back(
        {radius, kernel::boundary_term_estimate(field, p, radius, kcfg)});
  }
  if (scenario == Scenario::SourcedShell) {
    report.note =
        "shell switched on by a quintic smoothstep over [" +
        std::to_string(setup.shell.window->start) + ", " +
        std::to_string(setup.shell.window->end) +
        "]; the switch stands in for a source active only during that window";
  } else {
    report.note =
        "always-on shell: box f = 0 everywhere and the field decays only like "
        "1/|r' - r| on the past cone, so the decay assumption fails";
  }
  report.wall_time = Clock::now() - start;
  return report;
}

}  // namespace retlab::identity
