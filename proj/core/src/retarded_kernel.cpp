#include "retlab/retarded_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "retlab/errors.hpp"
#include "retlab/quadrature.hpp"

namespace retlab::kernel {

const char* to_string(Propagator propagator) {
  return propagator == Propagator::Retarded ? "retarded" : "advanced";
}

void KernelConfig::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ConfigError("kernel wave speed c must be positive and finite");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("kernel epsilon must be non-negative and finite");
  }
}

double retarded_time(const Vec3& r, const Vec3& r_src, double t,
                     const KernelConfig& cfg) {
  const double delay = norm(r - r_src) / cfg.c;
  return cfg.propagator == Propagator::Retarded ? t - delay : t + delay;
}

double regularized_kernel(double d, double epsilon) {
  if (d < 0.0 || epsilon < 0.0) {
    throw ConfigError("kernel distance and epsilon must be non-negative");
  }
  if (d == 0.0 && epsilon == 0.0) {
    throw SingularityError("1/|r - r'| evaluated at r' = r with epsilon = 0");
  }
  return 1.0 / std::hypot(d, epsilon);
}

double dalembertian(const fields::Field& field, const SpaceTimePoint& p,
                    const KernelConfig& cfg) {
  const fields::PartialBundle b = field.partials(p);
  return b.laplacian() - b.f_tt / (cfg.c * cfg.c);
}

double epsilon_ball_estimate(const fields::Field& field,
                             const SpaceTimePoint& p, double epsilon,
                             const KernelConfig& cfg) {
  if (!(epsilon > 0.0)) throw ConfigError("ball radius epsilon must be positive");
  cfg.validate();
  const Vec3 r = p.position();
  // The engine supplies 1/|r - r'|; swap it for the regularized kernel.
  auto integrand = [&](const SpaceTimePoint& q) {
    const double d = norm(q.position() - r);
    const double ratio = cfg.epsilon == 0.0 ? 1.0 : d * regularized_kernel(d, cfg.epsilon);
    return field.value(q) * ratio;
  };
  quadrature::QuadratureConfig q;
  q.n_radial = 24;
  q.n_theta = 24;
  q.n_phi = 48;
  q.rho_max = epsilon;
  q.threads = 1;
  return quadrature::integrate_retarded(integrand, p, q, cfg);
}

double boundary_term_estimate(const fields::Field& field,
                              const SpaceTimePoint& p, double face_radius,
                              const KernelConfig& cfg,
                              SurfaceResolution resolution) {
  if (!(face_radius > 0.0)) throw ConfigError("face radius must be positive");
  if (resolution.n_theta < 2 || resolution.n_phi < 2) {
    throw ConfigError("surface resolution needs at least 2 nodes per angle");
  }
  cfg.validate();
  const auto& rule = quadrature::gauss_legendre(resolution.n_theta);
  const Vec3 r = p.position();
  const double t_face = retarded_time(r, r + Vec3{face_radius, 0.0, 0.0}, p.t, cfg);
  const double dphi = 2.0 * std::numbers::pi / resolution.n_phi;

  // dS / |r' - r| = R dOmega.
  double sum = 0.0;
  for (int i = 0; i < resolution.n_theta; ++i) {
    const double mu = rule.nodes[i];
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    double row = 0.0;
    for (int j = 0; j < resolution.n_phi; ++j) {
      const double phi = j * dphi;
      const Vec3 w{sin_theta * std::cos(phi), sin_theta * std::sin(phi), mu};
      row += field.value(SpaceTimePoint::at(r + face_radius * w, t_face));
    }
    sum += rule.weights[i] * row * dphi;
  }
  return face_radius * sum;
}

}  // namespace retlab::kernel
