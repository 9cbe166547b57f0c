#pragma once

// Analytic test fields with closed-form partial derivatives.
//
// Three families are provided:
//  * TranslatedBump: the radial bump cos^4(r) (r <= pi/2, else 0) moving along
//    the z axis with constant speed v.
//  * StaticBump: the same bump at rest.
//  * ShellWave: a regular spherical wave s(t) [g(rho + ct) - g(ct - rho)] / rho
//    built from a compact polynomial profile g. With no switch window it is a
//    source-free solution of the homogeneous wave equation; with a window the
//    factor s(t) turns it on smoothly, which makes its d'Alembertian nonzero
//    only while the switch is ramping.
//
// All partial derivatives are exact. fd_partials2 is a central-difference
// oracle that only uses field values.

#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "retlab/geometry.hpp"

namespace retlab::fields {

// Support radius of the cos^4 bump.
inline constexpr double kBumpRadius = std::numbers::pi / 2.0;

enum class Family { TranslatedBump, StaticBump, ShellWave };

const char* to_string(Family family);

// Closed interval [start, end] over which the shell's switch ramps 0 -> 1.
struct SwitchWindow {
  double start = 0.0;
  double end = 0.0;
};

struct ShellParams {
  // Profile g(u) = (1 - ((u - profile_center) / width)^2)^4 on
  // |u - profile_center| <= width. For an incoming wave the shell sits at
  // radius profile_center - c t.
  double profile_center = 4.0;
  double width = 0.5;
  // Empty means "always on": s(t) == 1.
  std::optional<SwitchWindow> window;
};

struct FieldSpec {
  Family family = Family::TranslatedBump;
  // Velocity along +z (TranslatedBump only).
  double v = 0.0;
  // Wave-speed constant. Bounds |v| for the bump; sets the shell's speed.
  double c = 1.0;
  // Bump center at t = 0.
  Vec3 center{};
  ShellParams shell{};

  static FieldSpec translated_bump(double v, double c = 1.0, Vec3 center = {});
  static FieldSpec static_bump(Vec3 center = {});
  static FieldSpec shell_wave(ShellParams params, double c = 1.0);

  // Throws ConfigError if an invariant is violated.
  void validate() const;

  // True when the field vanishes outside a bounded region at every time up to
  // the present (bumps, and shells that were switched on at a finite time).
  bool compact_support() const;

  // True if the field does not depend on t.
  bool time_independent() const;
};

// Value, first partials, and diagonal second partials at one point.
struct PartialBundle {
  double f = 0.0;
  double f_x = 0.0, f_y = 0.0, f_z = 0.0, f_t = 0.0;
  double f_xx = 0.0, f_yy = 0.0, f_zz = 0.0, f_tt = 0.0;

  PartialBundle& operator+=(const PartialBundle& o);
  PartialBundle& operator*=(double s);
  friend PartialBundle operator+(PartialBundle a, const PartialBundle& b) {
    return a += b;
  }
  friend PartialBundle operator-(PartialBundle a, const PartialBundle& b) {
    return a += (b * -1.0);
  }
  friend PartialBundle operator*(double s, PartialBundle a) { return a *= s; }
  friend PartialBundle operator*(PartialBundle a, double s) { return a *= s; }

  double laplacian() const { return f_xx + f_yy + f_zz; }
  // Largest absolute entry.
  double max_abs() const;
  bool all_finite() const;
  bool all_zero() const;
};

// Radial bump profile: cos^4(radius) on [0, pi/2], zero beyond.
double bump_f0(double radius);

double eval(const FieldSpec& spec, const SpaceTimePoint& p);
PartialBundle partials2(const FieldSpec& spec, const SpaceTimePoint& p);

// A weighted superposition of field specs. Every operation downstream of the
// fields module takes a Field so linearity can be exercised directly; a lone
// FieldSpec converts implicitly.
class Field {
 public:
  struct Term {
    double weight = 1.0;
    FieldSpec spec;
  };

  Field() = default;
  Field(FieldSpec spec);  // NOLINT(google-explicit-constructor)

  Field& add(double weight, const FieldSpec& spec);
  Field& add(double weight, const Field& other);

  std::span<const Term> terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double value(const SpaceTimePoint& p) const;
  PartialBundle partials(const SpaceTimePoint& p) const;

  bool compact_support() const;
  bool time_independent() const;
  void validate() const;

 private:
  std::vector<Term> terms_;
};

Field operator+(const Field& a, const Field& b);
Field operator*(double s, const Field& a);

double eval(const Field& field, const SpaceTimePoint& p);
PartialBundle partials2(const Field& field, const SpaceTimePoint& p);

// Central differences of field values with step h along x, y, z and t.
// Independent of the closed-form derivative code.
PartialBundle fd_partials2(const Field& field, const SpaceTimePoint& p,
                           double h);

}  // namespace retlab::fields
