// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "retlab/identity.hpp"
#include "retlab/quadrature.hpp"
#include "retlab/retarded_kernel.hpp"
#include "test_support.hpp"

namespace {

using namespace retlab;
using fields::Field;
using fields::FieldSpec;
using identity::Scenario;
using kernel::KernelConfig;
using quadrature::QuadratureConfig;
using std::numbers::pi;
using testing::Sampler;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }
};

std::string num(double v, const char* spec = "%.3e") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double bump_profile(double r) { return r < pi / 2 ? std::pow(std::cos(r), 4) : 0.0; }

// Moving bump sweep along z at x = y = t = 0, v = c/2.
Outcome z_sweep() {
  Outcome o;
  const Field f = FieldSpec::translated_bump(0.5, 1.0);
  QuadratureConfig base;
  base.refinement_levels = 2;
  QuadratureConfig fine = base.scaled(2.0);
  for (const auto& [label, q, rel_tol] :
       {std::tuple{"default", base, 1e-4}, std::tuple{"2x", fine, 1e-5}}) {
    const auto start = std::chrono::steady_clock::now();
    double max_rel = 0.0, max_abs = 0.0;
    for (int i = -15; i <= 15; ++i) {
      const double z = 0.1 * i;
      const auto r = identity::verify_pointwise(f, {0, 0, z, 0}, q, {});
      const double exact = bump_profile(std::abs(z));
      o.require(std::abs(r.f_expected - exact) <= 1e-14, "analytic value at z=" + num(z, "%.1f"));
      if (exact > 0.1) {
        max_rel = std::max(max_rel, r.rel_error);
      } else {
        max_abs = std::max(max_abs, r.abs_error);
      }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(max_rel <= rel_tol, std::string(label) + " rel " + num(max_rel));
    o.require(max_abs <= 1e-6, std::string(label) + " abs near zeros " + num(max_abs));
    o.require(seconds <= 300.0, std::string(label) + " runtime");
    o.note(std::string(label) + ": max rel " + num(max_rel) + ", max abs near zeros " +
           num(max_abs) + ", " + num(seconds, "%.1f") + " s");
  }
  return o;
}

Outcome static_green() {
  Outcome o;
  const auto s = identity::static_green_identity(FieldSpec::static_bump(), {0, 0, 0}, {});
  o.require(s.rel_error <= 1e-6, "centre rel " + num(s.rel_error));
  double worst = 0.0;
  for (const Vec3 x : {Vec3{0, 0, 0}, Vec3{0.3, -0.2, 0.5}, Vec3{-0.9, 0.4, 0.1}}) {
    const auto st = identity::static_green_identity(FieldSpec::static_bump(), x, {});
    const auto rt = identity::verify_pointwise(FieldSpec::translated_bump(0.0),
                                               SpaceTimePoint::at(x, 0.0), {}, {});
    worst = std::max(worst, std::abs(st.f_calc - rt.f_calc));
  }
  o.require(worst <= 1e-10, "v=0 vs static " + num(worst));
  o.note("centre rel " + num(s.rel_error) + ", v=0 vs static max diff " + num(worst));
  return o;
}

Outcome epsilon_ball() {
  Outcome o;
  const Field f = FieldSpec::translated_bump(0.5, 1.0);
  const SpaceTimePoint p{0, 0, 0, 0};
  double prev_gap = INFINITY;
  std::string ratios;
  for (double eps : {0.2, 0.1, 0.05}) {
    const double ratio = kernel::epsilon_ball_estimate(f, p, eps, {}) / (2 * pi * eps * eps * f.value(p));
    o.require(ratio >= 0.9 && ratio <= 1.1, "ratio at eps " + num(eps, "%g"));
    const double gap = std::abs(ratio - 1.0);
    o.require(gap < prev_gap, "monotone approach at eps " + num(eps, "%g"));
    prev_gap = gap;
    ratios += (ratios.empty() ? "" : ", ") + num(ratio, "%.6f");
  }
  o.note("ratios " + ratios);
  return o;
}

double bundle_discrepancy(const fields::PartialBundle& a, const fields::PartialBundle& b) {
  return (a - b).max_abs() / std::max(a.max_abs(), 1e-300);
}

Outcome derivative_oracle() {
  Outcome o;
  Sampler s(4);
  const Field f = FieldSpec::translated_bump(0.5, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = s.uniform(-0.5, 0.5);
    // Within 95% of the support radius: at the very edge every partial tends
    // to zero and a discrepancy relative to the bundle loses its meaning.
    const SpaceTimePoint p = SpaceTimePoint::at(s.in_ball({0, 0, 0.5 * t}, 0.95 * pi / 2), t);
    worst = std::max(worst, bundle_discrepancy(f.partials(p), fields::fd_partials2(f, p, 1e-4)));
  }
  o.require(worst <= 1e-6, "max discrepancy " + num(worst));
  const SpaceTimePoint p{0.3, -0.2, 0.4, 0.1};
  const auto exact = f.partials(p);
  const double coarse = (fields::fd_partials2(f, p, 2e-2) - exact).max_abs();
  const double fine = (fields::fd_partials2(f, p, 1e-2) - exact).max_abs();
  const double order = std::log2(coarse / fine);
  o.require(std::abs(order - 2.0) <= 0.1, "order " + num(order, "%.3f"));
  o.note("max discrepancy " + num(worst) + " at h=1e-4, observed order " + num(order, "%.3f"));
  return o;
}

Outcome commutation() {
  Outcome o;
  Sampler s(5);
  const Field f = FieldSpec::translated_bump(0.5, 1.0);
  const identity::Axis axes[] = {identity::Axis::X, identity::Axis::Y, identity::Axis::Z};
  double worst_first = 0.0, worst_second = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double t = s.uniform(-0.3, 0.3);
    const SpaceTimePoint p = SpaceTimePoint::at(s.in_ball({0, 0, 0.5 * t}, 1.0), t);
    const auto axis = axes[i % 3];
    const auto r = identity::derivative_commutation_check(f, p, {}, {}, axis);
    const double first = std::abs(r.first_lhs - r.first_rhs) / std::abs(r.first_rhs);
    const double second = std::abs(r.second_lhs - r.second_rhs) / std::abs(r.second_rhs);
    worst_first = std::max(worst_first, first);
    worst_second = std::max(worst_second, second);
  }
  o.require(worst_first <= 1e-3, "first derivative rel " + num(worst_first));
  o.require(worst_second <= 1e-3, "second derivative rel " + num(worst_second));
  o.note("max rel first " + num(worst_first) + ", second " + num(worst_second));
  return o;
}

Outcome delta_shell() {
  Outcome o;
  struct Geometry {
    Vec3 r, src;
    double t;
    KernelConfig k;
  };
  KernelConfig adv;
  adv.propagator = kernel::Propagator::Advanced;
  const Geometry cases[] = {
      {{0, 0, 1}, {0, 0, 0}, 0.0, {}},
      {{1, 2, 2}, {0, 0, 0}, 1.0, {}},
      {{0.3, -0.4, 0.2}, {0.1, 0.1, 0.1}, -2.0, {}},
      {{0, 0, 5}, {0, 0, 1}, 0.5, {2.0, 0.0}},
      {{2, 0, 0}, {0, 0, 0}, 0.0, adv},
  };
  double worst = 0.0;
  for (const auto& g : cases) {
    const double d = norm(g.r - g.src);
    const double limit = identity::delta_shell_limit(g.r, g.src, g.t, g.k);
    o.require(limit == 1.0 / (2.0 * d), "limit formula at d=" + num(d, "%g"));
    double gap = 0.0;
    for (double sigma : {0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125}) {
      gap = std::abs(identity::delta_shell_collapse(g.r, g.src, g.t, sigma, g.k) - limit) / limit;
    }
    worst = std::max(worst, gap);
  }
  o.require(std::abs(identity::delta_shell_collapse({0, 0, 1}, {}, 0.0, 0.003125, {}) - 0.5) <= 1e-3,
            "unit distance gives 0.5");
  o.require(worst <= 1e-3, "max rel gap " + num(worst));
  o.note("5 geometries, max rel gap at sigma 0.003125: " + num(worst));
  return o;
}

Outcome dichotomy() {
  Outcome o;
  const auto p = identity::default_counterexample_point();
  const auto sl = identity::counterexample_study(Scenario::SourcelessShell, p, {}, {});
  const double plateau = sl.boundary_terms.empty() ? 0.0 : sl.boundary_terms.back().value;
  o.require(std::abs(sl.f_calc) <= 1e-3 * std::abs(sl.f_expected), "sourceless f_calc");
  o.require(!sl.decay_ok, "sourceless decay flag");
  o.require(plateau > 0.1, "sourceless boundary plateau");
  const auto sd = identity::counterexample_study(Scenario::SourcedShell, p, {}, {});
  o.require(sd.rel_error <= 1e-3, "sourced rel " + num(sd.rel_error));
  o.note("sourceless f_calc " + num(sl.f_calc) + " vs f " + num(sl.f_expected, "%g") +
         ", plateau " + num(plateau, "%.6f") + "; sourced rel " + num(sd.rel_error));
  return o;
}

Outcome properties() {
  Outcome o;
  const Field f1 = FieldSpec::translated_bump(0.5);
  const Field f2 = FieldSpec::static_bump({0.3, 0.0, 0.0});
  const SpaceTimePoint p{0.1, 0.2, 0.1, 0.2};

  // Linearity.
  const auto r1 = identity::verify_pointwise(f1, p, {}, {});
  const auto r2 = identity::verify_pointwise(f2, p, {}, {});
  const auto rs = identity::verify_pointwise(2.0 * f1 + (-0.5) * f2, p, {}, {});
  const double lin = std::abs(rs.f_calc - (2.0 * r1.f_calc - 0.5 * r2.f_calc));
  const double lin_tol = 2.0 * (rs.convergence.error_estimate + 2.0 * r1.convergence.error_estimate +
                                0.5 * r2.convergence.error_estimate);
  o.require(lin <= lin_tol, "linearity " + num(lin));

  // Rotational invariance: a bump about the observation point, rotated.
  const SpaceTimePoint origin{0, 0, 0, 0};
  QuadratureConfig rq;
  rq.n_radial = 64;
  rq.n_theta = 32;
  rq.n_phi = 64;
  rq.rho_max = fields::kBumpRadius + 0.8;
  auto bump_at = [](Vec3 c) {
    return [g = Field(FieldSpec::static_bump(c))](const SpaceTimePoint& q) { return g.value(q); };
  };
  const auto ref = quadrature::convergence_study(bump_at({0, 0, 0.8}), origin, rq, {}, 3);
  const double rot_tol = std::max(ref.error_estimate, 1e-12);
  double rot = 0.0;
  Sampler s(8);
  for (int i = 0; i < 4; ++i) {
    const Vec3 dir = s.in_ball({}, 1.0);
    const double v =
        quadrature::integrate_retarded(bump_at((0.8 / norm(dir)) * dir), origin, rq.scaled(4.0), {});
    rot = std::max(rot, std::abs(v - ref.finest()));
  }
  o.require(rot <= rot_tol, "rotational invariance " + num(rot));

  // Truncation soundness: extending rho_max past the support changes nothing.
  auto box = [&](const SpaceTimePoint& q) { return kernel::dalembertian(f1, q, {}); };
  const SpaceTimePoint tp{0.1, 0.0, 0.4, 0.0};
  const double support = quadrature::support_radius(f1, tp, {});
  QuadratureConfig tq;
  tq.rho_max = support;
  const double tight = quadrature::integrate_retarded(box, tp, tq, {});
  double trunc = 0.0;
  for (double factor : {1.25, 2.0, 5.0}) {
    QuadratureConfig wide = tq;
    wide.rho_max = factor * support;
    wide.radial_breaks = {support};
    trunc = std::max(trunc, std::abs(quadrature::integrate_retarded(box, tp, wide, {}) - tight));
  }
  o.require(trunc <= 1e-14, "truncation " + num(trunc));

  // Past dominance: the most recent dt contributes O(dt^2).
  const SpaceTimePoint pp{0.1, 0.2, 0.3, 0.2};
  const double c1 = identity::recent_past_contribution(f1, pp, 0.025, {}, {}).contribution();
  const double c2 = identity::recent_past_contribution(f1, pp, 0.0125, {}, {}).contribution();
  const double past_order = std::log2(c1 / c2);
  o.require(std::abs(past_order - 2.0) <= 0.05, "past-dominance order " + num(past_order, "%.3f"));

  // Propagator symmetry.
  KernelConfig adv;
  adv.propagator = kernel::Propagator::Advanced;
  double sym = 0.0;
  for (const SpaceTimePoint q : {SpaceTimePoint{0, 0, 0, 0}, SpaceTimePoint{0.2, -0.3, 0.4, 0.0},
                                 SpaceTimePoint{-0.5, 0.1, -0.6, 0.0}}) {
    const auto ret = identity::verify_pointwise(f1, q, {}, {});
    const auto a = identity::verify_pointwise(f1, q, {}, adv);
    const double tol_r = std::max(1e-5 * std::abs(ret.f_expected), 2 * ret.convergence.error_estimate);
    const double tol_a = std::max(1e-5 * std::abs(a.f_expected), 2 * a.convergence.error_estimate);
    o.require(ret.abs_error <= tol_r && a.abs_error <= tol_a, "propagator symmetry");
    sym = std::max({sym, ret.abs_error, a.abs_error});
  }

  // Jacobian: int d^3 r' / |r - r'| over a ball is 2 pi rho0^2.
  double jac = 0.0;
  for (double rho0 : {0.1, 1.0, 3.7}) {
    QuadratureConfig jq;
    jq.n_radial = jq.n_theta = jq.n_phi = 4;
    jq.rho_max = rho0;
    const double v = quadrature::integrate_retarded([](const SpaceTimePoint&) { return 1.0; },
                                                    {0.3, -1, 2, 0}, jq, {});
    jac = std::max(jac, std::abs(v / (2 * pi * rho0 * rho0) - 1.0));
  }
  o.require(jac <= 1e-12, "Jacobian " + num(jac));

  o.note("linearity " + num(lin) + ", rotation " + num(rot) + ", truncation " + num(trunc) +
         ", past order " + num(past_order, "%.3f") + ", propagators max abs " + num(sym) +
         ", Jacobian " + num(jac));
  return o;
}

Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "retlab_acceptance_determinism";
  fs::remove_all(root);
  std::string bytes[2];
  const fs::path dir = root / "out";
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(dir);
    const std::string cmd = std::string("\"") + RETLAB_CLI_PATH +
                            "\" verify --random-points 6 --seed 1234 --levels 2 --out \"" +
                            dir.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    o.require(rc == 0, "cli run " + std::to_string(run) + " exit " + std::to_string(rc));
    std::ifstream in(dir / "verify.json", std::ios::binary);
    bytes[run].assign(std::istreambuf_iterator<char>(in), {});
  }
  o.require(!bytes[0].empty(), "report written");
  o.require(bytes[0] == bytes[1], "reports differ");
  o.note(std::to_string(bytes[0].size()) + " report bytes, identical across runs");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"moving-bump z-sweep", z_sweep},
      {"static Green limit", static_green},
      {"epsilon-ball scaling", epsilon_ball},
      {"derivative oracle", derivative_oracle},
      {"derivative commutation", commutation},
      {"delta-shell collapse", delta_shell},
      {"sourced/sourceless dichotomy", dichotomy},
      {"property suite", properties},
      {"report determinism", determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", index - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
