#include "retlab/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "retlab/errors.hpp"

namespace retlab::fields {
namespace {

bool is_finite(double v) { return std::isfinite(v); }

// ---------------------------------------------------------------------------
// Bump family
// ---------------------------------------------------------------------------

double sinc(double r) { return r == 0.0 ? 1.0 : std::sin(r) / r; }

// Closed-form partials of the static bump f0(|u|) at offset u from its center.
PartialBundle bump_partials(const Vec3& u) {
  PartialBundle b;
  const double r = norm(u);
  if (r > kBumpRadius) return b;

  const double c = std::cos(r);
  const double s = std::sin(r);
  const double c2 = c * c;
  const double c3 = c2 * c;
  const double c4 = c2 * c2;

  // f0'(r) / r and f0''(r); both tend to -4 as r -> 0.
  const double d1_over_r = -4.0 * c3 * sinc(r);
  const double d2 = 12.0 * c2 * s * s - 4.0 * c4;
  const double anisotropic = d2 - d1_over_r;

  b.f = c4;
  b.f_x = d1_over_r * u.x;
  b.f_y = d1_over_r * u.y;
  b.f_z = d1_over_r * u.z;
  if (r > 0.0) {
    const double inv_r2 = 1.0 / (r * r);
    b.f_xx = anisotropic * u.x * u.x * inv_r2 + d1_over_r;
    b.f_yy = anisotropic * u.y * u.y * inv_r2 + d1_over_r;
    b.f_zz = anisotropic * u.z * u.z * inv_r2 + d1_over_r;
  } else {
    b.f_xx = b.f_yy = b.f_zz = d1_over_r;
  }
  return b;
}

Vec3 bump_offset(const FieldSpec& spec, const SpaceTimePoint& p) {
  Vec3 u = p.position() - spec.center;
  if (spec.family == Family::TranslatedBump) u.z -= spec.v * p.t;
  return u;
}

// ---------------------------------------------------------------------------
// Shell family
// ---------------------------------------------------------------------------

// Coefficients of (1 - q^2)^4 in powers of q.
constexpr std::array<double, 9> kProfileCoeffs = {1.0, 0.0, -4.0, 0.0, 6.0,
                                                  0.0, -4.0, 0.0, 1.0};
constexpr int kMaxDeriv = 10;

struct ShellProfile {
  double center;
  double width;

  double q(double u) const { return (u - center) / width; }
  bool inside(double u) const { return std::abs(u - center) <= width; }

  // -1 below the support, 0 inside, +1 above. Two arguments with the same
  // piece index are governed by one polynomial (possibly the zero one).
  int piece(double u) const {
    if (u < center - width) return -1;
    if (u > center + width) return 1;
    return 0;
  }

  // Factored g, g', g'' for accuracy near the support edges.
  double g0(double u) const {
    if (!inside(u)) return 0.0;
    const double a = 1.0 - q(u) * q(u);
    return a * a * a * a;
  }
  double g1(double u) const {
    if (!inside(u)) return 0.0;
    const double x = q(u);
    const double a = 1.0 - x * x;
    return -8.0 * x * a * a * a / width;
  }
  double g2(double u) const {
    if (!inside(u)) return 0.0;
    const double x = q(u);
    const double a = 1.0 - x * x;
    return a * a * (56.0 * x * x - 8.0) / (width * width);
  }

  // All u-derivatives D_0..D_{kMaxDeriv} of the interior polynomial at u.
  std::array<double, kMaxDeriv + 1> derivs(double u) const {
    std::array<double, kMaxDeriv + 1> d{};
    std::array<double, 9> coeffs = kProfileCoeffs;
    const double x = q(u);
    double scale = 1.0;
    for (int m = 0; m <= kMaxDeriv; ++m) {
      const int degree = 8 - m;
      if (degree < 0) break;
      double acc = 0.0;
      for (int k = degree; k >= 0; --k) acc = acc * x + coeffs[k];
      d[m] = acc * scale;
      for (int k = 0; k < degree; ++k) coeffs[k] = coeffs[k + 1] * (k + 1);
      coeffs[degree] = 0.0;
      scale /= width;
    }
    return d;
  }
};

// H(rho, a) = [g(a + rho) - g(a - rho)] / rho and the derivatives the
// Cartesian partials need. rho_inv_d1 is H_rho / rho, finite at rho = 0.
struct RadialTerms {
  double h = 0.0;
  double rho_inv_d1 = 0.0;
  double d2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
};

RadialTerms shell_radial(const ShellProfile& g, double rho, double a) {
  RadialTerms out;
  const int lo = g.piece(a - rho);
  const int hi = g.piece(a + rho);
  if (lo == hi) {
    if (lo != 0) return out;
    // Both arguments on the interior polynomial: the odd part of its Taylor
    // series about a is exact, and regular at rho = 0.
    const auto d = g.derivs(a);
    double rho_pow = 1.0;  // rho^{2k}
    double fact = 1.0;     // (2k + 1)!
    for (int k = 0; 2 * k + 1 <= kMaxDeriv; ++k) {
      if (k > 0) fact *= (2.0 * k) * (2.0 * k + 1.0);
      out.h += 2.0 * d[2 * k + 1] * rho_pow / fact;
      if (2 * k + 2 <= kMaxDeriv) out.a1 += 2.0 * d[2 * k + 2] * rho_pow / fact;
      if (2 * k + 3 <= kMaxDeriv) out.a2 += 2.0 * d[2 * k + 3] * rho_pow / fact;
      if (k >= 1) {
        // rho^{2k-2} = rho_pow / rho^2 without dividing.
        const double lower = k == 1 ? 1.0 : std::pow(rho, 2 * k - 2);
        out.rho_inv_d1 += 2.0 * d[2 * k + 1] * (2.0 * k) * lower / fact;
        out.d2 += 2.0 * d[2 * k + 1] * (2.0 * k) * (2.0 * k - 1.0) * lower / fact;
      }
      rho_pow *= rho * rho;
    }
    return out;
  }
  // Arguments straddle a knot, so rho >= distance(a, knot) > 0.
  const double up = a + rho;
  const double dn = a - rho;
  const double n0 = g.g0(up) - g.g0(dn);
  const double n1 = g.g1(up) + g.g1(dn);
  const double n2 = g.g2(up) - g.g2(dn);
  out.h = n0 / rho;
  const double h_rho = (n1 - out.h) / rho;
  out.rho_inv_d1 = h_rho / rho;
  out.d2 = n2 / rho - 2.0 * h_rho / rho;
  out.a1 = (g.g1(up) - g.g1(dn)) / rho;
  out.a2 = n2 / rho;
  return out;
}

struct Switch {
  double s = 1.0;
  double ds = 0.0;
  double dds = 0.0;
};

// Quintic smoothstep 0 -> 1 over the window; C^2 at both ends.
Switch switch_at(const std::optional<SwitchWindow>& window, double t) {
  if (!window) return {};
  const double span = window->end - window->start;
  if (t <= window->start) return {0.0, 0.0, 0.0};
  if (t >= window->end) return {1.0, 0.0, 0.0};
  const double x = (t - window->start) / span;
  Switch out;
  out.s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
  out.ds = 30.0 * x * x * (x - 1.0) * (x - 1.0) / span;
  out.dds = 60.0 * x * (x - 1.0) * (2.0 * x - 1.0) / (span * span);
  return out;
}

PartialBundle shell_partials(const FieldSpec& spec, const SpaceTimePoint& p) {
  PartialBundle b;
  const Switch sw = switch_at(spec.shell.window, p.t);
  if (sw.s == 0.0 && sw.ds == 0.0 && sw.dds == 0.0) return b;

  const ShellProfile g{spec.shell.profile_center, spec.shell.width};
  const Vec3 u = p.position() - spec.center;
  const double rho = norm(u);
  const double c = spec.c;
  const RadialTerms h = shell_radial(g, rho, c * p.t);

  b.f = sw.s * h.h;
  b.f_x = sw.s * h.rho_inv_d1 * u.x;
  b.f_y = sw.s * h.rho_inv_d1 * u.y;
  b.f_z = sw.s * h.rho_inv_d1 * u.z;
  const double anisotropic = h.d2 - h.rho_inv_d1;
  const double inv_r2 = rho > 0.0 ? 1.0 / (rho * rho) : 0.0;
  b.f_xx = sw.s * (anisotropic * u.x * u.x * inv_r2 + h.rho_inv_d1);
  b.f_yy = sw.s * (anisotropic * u.y * u.y * inv_r2 + h.rho_inv_d1);
  b.f_zz = sw.s * (anisotropic * u.z * u.z * inv_r2 + h.rho_inv_d1);
  if (rho == 0.0) b.f_xx = b.f_yy = b.f_zz = sw.s * h.d2;
  b.f_t = sw.ds * h.h + sw.s * c * h.a1;
  b.f_tt = sw.dds * h.h + 2.0 * sw.ds * c * h.a1 + sw.s * c * c * h.a2;
  return b;
}

}  // namespace

const char* to_string(Family family) {
  switch (family) {
    case Family::TranslatedBump: return "translated_bump";
    case Family::StaticBump: return "static_bump";
    case Family::ShellWave: return "shell_wave";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// FieldSpec
// ---------------------------------------------------------------------------

FieldSpec FieldSpec::translated_bump(double v, double c, Vec3 center) {
  FieldSpec s;
  s.family = Family::TranslatedBump;
  s.v = v;
  s.c = c;
  s.center = center;
  return s;
}

FieldSpec FieldSpec::static_bump(Vec3 center) {
  FieldSpec s;
  s.family = Family::StaticBump;
  s.center = center;
  return s;
}

FieldSpec FieldSpec::shell_wave(ShellParams params, double c) {
  FieldSpec s;
  s.family = Family::ShellWave;
  s.c = c;
  s.shell = params;
  return s;
}

void FieldSpec::validate() const {
  if (!(std::isfinite(c) && c != 0.0)) {
    throw ConfigError("field wave-speed constant c must be finite and nonzero");
  }
  if (!is_finite(center)) throw ConfigError("field center must be finite");
  switch (family) {
    case Family::TranslatedBump:
      if (!std::isfinite(v) || !(std::abs(v) < std::abs(c))) {
        throw ConfigError("translated bump requires |v| < c, got v = " +
                          std::to_string(v) + ", c = " + std::to_string(c));
      }
      break;
    case Family::StaticBump:
      break;
    case Family::ShellWave:
      if (!(shell.width > 0.0) || !std::isfinite(shell.width)) {
        throw ConfigError("shell profile width must be positive");
      }
      if (!std::isfinite(shell.profile_center)) {
        throw ConfigError("shell profile center must be finite");
      }
      if (shell.window && !(shell.window->end > shell.window->start)) {
        throw ConfigError("shell switch window must satisfy start < end");
      }
      break;
  }
}

bool FieldSpec::compact_support() const {
  return family != Family::ShellWave || shell.window.has_value();
}

bool FieldSpec::time_independent() const {
  return family == Family::StaticBump ||
         (family == Family::TranslatedBump && v == 0.0);
}

// ---------------------------------------------------------------------------
// PartialBundle
// ---------------------------------------------------------------------------

PartialBundle& PartialBundle::operator+=(const PartialBundle& o) {
  f += o.f;
  f_x += o.f_x;
  f_y += o.f_y;
  f_z += o.f_z;
  f_t += o.f_t;
  f_xx += o.f_xx;
  f_yy += o.f_yy;
  f_zz += o.f_zz;
  f_tt += o.f_tt;
  return *this;
}

PartialBundle& PartialBundle::operator*=(double s) {
  f *= s;
  f_x *= s;
  f_y *= s;
  f_z *= s;
  f_t *= s;
  f_xx *= s;
  f_yy *= s;
  f_zz *= s;
  f_tt *= s;
  return *this;
}

double PartialBundle::max_abs() const {
  return std::max({std::abs(f), std::abs(f_x), std::abs(f_y), std::abs(f_z),
                   std::abs(f_t), std::abs(f_xx), std::abs(f_yy),
                   std::abs(f_zz), std::abs(f_tt)});
}

bool PartialBundle::all_finite() const {
  return is_finite(f) && is_finite(f_x) && is_finite(f_y) && is_finite(f_z) &&
         is_finite(f_t) && is_finite(f_xx) && is_finite(f_yy) &&
         is_finite(f_zz) && is_finite(f_tt);
}

bool PartialBundle::all_zero() const { return max_abs() == 0.0; }

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double bump_f0(double radius) {
  if (radius > kBumpRadius) return 0.0;
  const double c = std::cos(radius);
  return c * c * c * c;
}

double eval(const FieldSpec& spec, const SpaceTimePoint& p) {
  switch (spec.family) {
    case Family::TranslatedBump:
    case Family::StaticBump:
      return bump_f0(norm(bump_offset(spec, p)));
    case Family::ShellWave:
      return shell_partials(spec, p).f;
  }
  return 0.0;
}

PartialBundle partials2(const FieldSpec& spec, const SpaceTimePoint& p) {
  switch (spec.family) {
    case Family::TranslatedBump: {
      PartialBundle b = bump_partials(bump_offset(spec, p));
      b.f_t = -spec.v * b.f_z;
      b.f_tt = spec.v * spec.v * b.f_zz;
      return b;
    }
    case Family::StaticBump:
      return bump_partials(bump_offset(spec, p));
    case Family::ShellWave:
      return shell_partials(spec, p);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Field
// ---------------------------------------------------------------------------

Field::Field(FieldSpec spec) { terms_.push_back({1.0, spec}); }

Field& Field::add(double weight, const FieldSpec& spec) {
  terms_.push_back({weight, spec});
  return *this;
}

Field& Field::add(double weight, const Field& other) {
  for (const Term& t : other.terms_) terms_.push_back({weight * t.weight, t.spec});
  return *this;
}

double Field::value(const SpaceTimePoint& p) const {
  double sum = 0.0;
  for (const Term& t : terms_) sum += t.weight * eval(t.spec, p);
  return sum;
}

PartialBundle Field::partials(const SpaceTimePoint& p) const {
  PartialBundle sum;
  for (const Term& t : terms_) sum += t.weight * partials2(t.spec, p);
  return sum;
}

bool Field::compact_support() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.spec.compact_support(); });
}

bool Field::time_independent() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.spec.time_independent(); });
}

void Field::validate() const {
  for (const Term& t : terms_) {
    if (!std::isfinite(t.weight)) throw ConfigError("field weight must be finite");
    t.spec.validate();
  }
}

Field operator+(const Field& a, const Field& b) {
  Field out = a;
  out.add(1.0, b);
  return out;
}

Field operator*(double s, const Field& a) {
  Field out;
  out.add(s, a);
  return out;
}

double eval(const Field& field, const SpaceTimePoint& p) {
  return field.value(p);
}

PartialBundle partials2(const Field& field, const SpaceTimePoint& p) {
  return field.partials(p);
}

PartialBundle fd_partials2(const Field& field, const SpaceTimePoint& p,
                           double h) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
  const double f0 = field.value(p);
  PartialBundle b;
  b.f = f0;

  auto axis = [&](auto shift, double& first, double& second) {
    SpaceTimePoint plus = p;
    SpaceTimePoint minus = p;
    shift(plus, h);
    shift(minus, -h);
    const double fp = field.value(plus);
    const double fm = field.value(minus);
    first = (fp - fm) / (2.0 * h);
    second = (fp - 2.0 * f0 + fm) / (h * h);
  };
  axis([](SpaceTimePoint& q, double d) { q.x += d; }, b.f_x, b.f_xx);
  axis([](SpaceTimePoint& q, double d) { q.y += d; }, b.f_y, b.f_yy);
  axis([](SpaceTimePoint& q, double d) { q.z += d; }, b.f_z, b.f_zz);
  axis([](SpaceTimePoint& q, double d) { q.t += d; }, b.f_t, b.f_tt);
  return b;
}

}  // namespace retlab::fields
