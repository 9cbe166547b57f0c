#pragma once

#include "retlab/fields.hpp"
#include "retlab/geometry.hpp"

namespace retlab::kernel {

enum class Propagator { Retarded, Advanced };

const char* to_string(Propagator propagator);

struct KernelConfig {
  // Wave speed used for the retardation t' = t -/+ |r - r'| / c.
  double c = 1.0;
  // Regularization length for 1/sqrt(d^2 + eps^2).
  double epsilon = 0.0;
  Propagator propagator = Propagator::Retarded;

  void validate() const;
};

// t - |r - r_src| / c for the retarded propagator, t + |r - r_src| / c for the
// advanced one.
double retarded_time(const Vec3& r, const Vec3& r_src, double t,
                     const KernelConfig& cfg);

// 1 / sqrt(d^2 + epsilon^2). Throws SingularityError for d = epsilon = 0.
double regularized_kernel(double d, double epsilon);

// f_xx + f_yy + f_zz - f_tt / c^2 from the exact partials.
double dalembertian(const fields::Field& field, const SpaceTimePoint& p,
                    const KernelConfig& cfg);

// Contribution of the ball |r' - r| < epsilon to the retarded potential,
//   int_{ball} f(r', t') K(|r - r'|) d^3 r',
// where K is the kernel regularized with cfg.epsilon. Scales as
// 2 pi epsilon^2 f(r, t) for small epsilon.
double epsilon_ball_estimate(const fields::Field& field,
                             const SpaceTimePoint& p, double epsilon,
                             const KernelConfig& cfg);

// Surface integral of f(r', t') / |r' - r| over the sphere |r' - r| = R, with
// t' the retarded (or advanced) time of each surface point. Vanishes for
// compactly supported fields once R exceeds the retarded support, and tends to
// a nonzero constant for fields decaying only like 1/|r' - r|.
struct SurfaceResolution {
  int n_theta = 96;
  int n_phi = 96;
};
double boundary_term_estimate(const fields::Field& field,
                              const SpaceTimePoint& p, double face_radius,
                              const KernelConfig& cfg,
                              SurfaceResolution resolution = {});

}  // namespace retlab::kernel
