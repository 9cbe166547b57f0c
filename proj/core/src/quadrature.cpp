#include "retlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "retlab/errors.hpp"

namespace retlab::quadrature {
namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Final derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

struct RadialNode {
  double rho;
  // Gauss weight times the Jacobian rho.
  double weight;
};

std::vector<RadialNode> radial_nodes(const QuadratureConfig& cfg) {
  const double lo = cfg.rho_min;
  const double hi = *cfg.rho_max;
  std::vector<double> edges{lo};
  std::vector<double> breaks = cfg.radial_breaks;
  std::sort(breaks.begin(), breaks.end());
  for (double b : breaks) {
    if (b > edges.back() && b < hi) edges.push_back(b);
  }
  edges.push_back(hi);

  const GaussRule& rule = gauss_legendre(cfg.n_radial);
  std::vector<RadialNode> nodes;
  nodes.reserve((edges.size() - 1) * cfg.n_radial);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (int k = 0; k < cfg.n_radial; ++k) {
      const double rho = mid + half * rule.nodes[k];
      nodes.push_back({rho, rule.weights[k] * half * rho});
    }
  }
  return nodes;
}

[[noreturn]] void throw_non_finite(double value, const SpaceTimePoint& q) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "non-finite integrand sample " << value << " at r' = (" << q.x << ", "
      << q.y << ", " << q.z << "), t' = " << q.t;
  throw EvaluationError(msg.str(), q);
}

int resolve_threads(int requested, int rows) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(rows, 1));
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one node");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(compute_gauss_legendre(n));
  return *slot;
}

void QuadratureConfig::validate() const {
  if (n_radial < 2 || n_theta < 2 || n_phi < 2) {
    throw ConfigError("quadrature node counts must all be at least 2");
  }
  if (!rho_max) throw ConfigError("quadrature truncation radius rho_max is unset");
  if (!(*rho_max > 0.0) || !std::isfinite(*rho_max)) {
    throw ConfigError("quadrature truncation radius rho_max must be positive");
  }
  if (!(rho_min >= 0.0) || !(rho_min < *rho_max)) {
    throw ConfigError("quadrature requires 0 <= rho_min < rho_max");
  }
  if (refinement_levels < 1) {
    throw ConfigError("refinement_levels must be at least 1");
  }
}

QuadratureConfig QuadratureConfig::scaled(double factor) const {
  auto scale = [factor](int n) {
    return std::max(2, static_cast<int>(std::lround(n * factor)));
  };
  QuadratureConfig out = *this;
  out.n_radial = scale(n_radial);
  out.n_theta = scale(n_theta);
  out.n_phi = scale(n_phi);
  return out;
}

long long QuadratureConfig::node_count() const {
  long long panels = 1;
  if (rho_max) {
    for (double b : radial_breaks) {
      if (b > rho_min && b < *rho_max) ++panels;
    }
  }
  return panels * n_radial * static_cast<long long>(n_theta) * n_phi;
}

double integrate_retarded(const RetardedIntegrand& integrand,
                          const SpaceTimePoint& center,
                          const QuadratureConfig& cfg,
                          const kernel::KernelConfig& kcfg) {
  cfg.validate();
  kcfg.validate();

  const std::vector<RadialNode> radial = radial_nodes(cfg);
  const GaussRule& polar = gauss_legendre(cfg.n_theta);
  const double dphi = 2.0 * std::numbers::pi / cfg.n_phi;
  std::vector<double> cos_phi(cfg.n_phi), sin_phi(cfg.n_phi);
  for (int j = 0; j < cfg.n_phi; ++j) {
    cos_phi[j] = std::cos(j * dphi);
    sin_phi[j] = std::sin(j * dphi);
  }
  const Vec3 r = center.position();
  const double sign = kcfg.propagator == kernel::Propagator::Retarded ? -1.0 : 1.0;

  // One partial sum per polar row; rows are reduced in index order.
  std::vector<double> rows(cfg.n_theta, 0.0);
  auto do_row = [&](int i) {
    const double mu = polar.nodes[i];
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    double row = 0.0;
    for (int j = 0; j < cfg.n_phi; ++j) {
      const Vec3 w{sin_theta * cos_phi[j], sin_theta * sin_phi[j], mu};
      double ray = 0.0;
      for (const RadialNode& node : radial) {
        const SpaceTimePoint q =
            SpaceTimePoint::at(r + node.rho * w, center.t + sign * node.rho / kcfg.c);
        const double value = integrand(q);
        if (!std::isfinite(value)) throw_non_finite(value, q);
        ray += node.weight * value;
      }
      row += ray;
    }
    rows[i] = polar.weights[i] * row * dphi;
  };

  const int n_threads = resolve_threads(cfg.threads, cfg.n_theta);
  if (n_threads == 1) {
    for (int i = 0; i < cfg.n_theta; ++i) do_row(i);
  } else {
    std::vector<std::exception_ptr> errors(n_threads);
    {
      std::vector<std::jthread> workers;
      workers.reserve(n_threads);
      for (int w = 0; w < n_threads; ++w) {
        workers.emplace_back([&, w] {
          try {
            for (int i = w; i < cfg.n_theta; i += n_threads) do_row(i);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  double total = 0.0;
  for (double v : rows) total += v;
  return total;
}

double support_radius(const fields::Field& field, const SpaceTimePoint& center,
                      const kernel::KernelConfig& kcfg) {
  kcfg.validate();
  field.validate();
  const Vec3 r = center.position();
  double radius = 0.0;
  for (const auto& term : field.terms()) {
    const fields::FieldSpec& spec = term.spec;
    double bound = 0.0;
    switch (spec.family) {
      case fields::Family::TranslatedBump: {
        const double beta = std::abs(spec.v) / kcfg.c;
        if (!(beta < 1.0)) {
          throw UnboundedSupportError(
              "bump moves at or faster than the kernel wave speed; its retarded "
              "image is unbounded");
        }
        Vec3 rel = r - spec.center;
        rel.z -= spec.v * center.t;
        // |rel + rho (w +/- beta z)| >= rho (1 - beta) - |rel|.
        bound = (fields::kBumpRadius + norm(rel)) / (1.0 - beta);
        break;
      }
      case fields::Family::StaticBump:
        bound = fields::kBumpRadius + norm(r - spec.center);
        break;
      case fields::Family::ShellWave: {
        if (!spec.shell.window) {
          throw UnboundedSupportError(
              "always-on shell wave decays only like 1/|r'| on the past light "
              "cone; it violates the decay condition and has no finite "
              "retarded support");
        }
        if (kcfg.propagator == kernel::Propagator::Advanced) {
          throw UnboundedSupportError(
              "switched shell wave stays on for all later times; its advanced "
              "support is unbounded");
        }
        bound = std::max(0.0, kcfg.c * (center.t - spec.shell.window->start));
        break;
      }
    }
    radius = std::max(radius, bound);
  }
  return radius;
}

std::vector<double> natural_breaks(const fields::Field& field,
                                   const SpaceTimePoint& center,
                                   const kernel::KernelConfig& kcfg) {
  std::vector<double> out;
  if (kcfg.propagator != kernel::Propagator::Retarded) return out;
  for (const auto& term : field.terms()) {
    const auto& spec = term.spec;
    if (spec.family != fields::Family::ShellWave || !spec.shell.window) continue;
    for (double edge : {spec.shell.window->start, spec.shell.window->end}) {
      const double rho = kcfg.c * (center.t - edge);
      if (rho > 0.0) out.push_back(rho);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const char* to_string(ConvergenceStatus status) {
  switch (status) {
    case ConvergenceStatus::Converged: return "converged";
    case ConvergenceStatus::Alternating: return "alternating";
    case ConvergenceStatus::Oscillating: return "oscillating";
    case ConvergenceStatus::Exact: return "exact";
  }
  return "unknown";
}

namespace {
constexpr double kMaxCredibleOrder = 4.0;
}  // namespace

ConvergenceRecord analyze_sequence(std::vector<Resolution> resolutions,
                                   std::vector<double> values,
                                   double refinement_factor) {
  if (resolutions.size() != values.size()) {
    throw ConfigError("convergence record needs one value per resolution");
  }
  ConvergenceRecord rec;
  rec.resolutions = std::move(resolutions);
  rec.values = std::move(values);
  const auto& v = rec.values;
  const std::size_t n = v.size();
  rec.richardson_estimate = rec.finest();
  if (n < 2) return rec;

  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  // Differences at or below this are round-off.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;

  std::vector<double> diffs;
  for (std::size_t k = 1; k < n; ++k) diffs.push_back(v[k] - v[k - 1]);
  rec.error_estimate = std::abs(diffs.back());

  const bool all_noise = std::all_of(diffs.begin(), diffs.end(),
                                     [&](double d) { return std::abs(d) <= floor; });
  if (all_noise) {
    rec.status = ConvergenceStatus::Exact;
    return rec;
  }
  rec.status = ConvergenceStatus::Converged;
  if (diffs.size() < 2) return rec;

  const double d1 = diffs[diffs.size() - 2];
  const double d2 = diffs.back();
  // An apparent order above kMaxCredibleOrder is a pre-asymptotic coincidence
  // (the integrands have kinks along the support boundary), so the last
  // difference alone would understate the error.
  rec.error_estimate = std::max(
      rec.error_estimate, std::abs(d1) / std::pow(refinement_factor, kMaxCredibleOrder));
  if (std::abs(d2) <= floor) {
    // Reached round-off; report the last order that was still measurable.
    for (std::size_t k = diffs.size() - 1; k >= 1; --k) {
      if (std::abs(diffs[k]) > floor && std::abs(diffs[k - 1]) > floor) {
        rec.observed_order = std::log(std::abs(diffs[k - 1]) / std::abs(diffs[k])) /
                             std::log(refinement_factor);
        break;
      }
    }
    if (!std::isfinite(rec.observed_order)) rec.observed_order = 0.0;
    return rec;
  }
  if (std::abs(d2) >= std::abs(d1)) {
    rec.status = ConvergenceStatus::Oscillating;
    return rec;
  }
  rec.observed_order = std::log(std::abs(d1) / std::abs(d2)) / std::log(refinement_factor);
  if ((d1 > 0.0) == (d2 > 0.0)) {
    rec.richardson_estimate =
        v.back() + d2 / (std::pow(refinement_factor, rec.observed_order) - 1.0);
  } else {
    rec.status = ConvergenceStatus::Alternating;
  }
  return rec;
}

ConvergenceRecord convergence_study(const RetardedIntegrand& integrand,
                                    const SpaceTimePoint& center,
                                    const QuadratureConfig& base_cfg,
                                    const kernel::KernelConfig& kcfg,
                                    int levels) {
  if (levels < 2) throw ConfigError("convergence study needs at least 2 levels");
  std::vector<Resolution> resolutions;
  std::vector<double> values;
  double factor = 1.0;
  for (int k = 0; k < levels; ++k, factor *= 2.0) {
    const QuadratureConfig cfg = base_cfg.scaled(factor);
    resolutions.push_back({cfg.n_radial, cfg.n_theta, cfg.n_phi});
    values.push_back(integrate_retarded(integrand, center, cfg, kcfg));
  }
  return analyze_sequence(std::move(resolutions), std::move(values), 2.0);
}

}  // namespace retlab::quadrature
