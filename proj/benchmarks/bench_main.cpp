#include <benchmark/benchmark.h>

#include "retlab/fields.hpp"
#include "retlab/identity.hpp"
#include "retlab/quadrature.hpp"
#include "retlab/retarded_kernel.hpp"

namespace {

using namespace retlab;

void BM_BumpPartials(benchmark::State& state) {
  const fields::Field f = fields::FieldSpec::translated_bump(0.5);
  SpaceTimePoint p{0.3, -0.2, 0.4, 0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.partials(p));
    p.x = -p.x;
  }
}
BENCHMARK(BM_BumpPartials);

void BM_ShellPartials(benchmark::State& state) {
  const fields::Field f = identity::counterexample_field(identity::Scenario::SourcedShell);
  SpaceTimePoint p{0.3, -0.2, 1.4, 2.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.partials(p));
    p.x = -p.x;
  }
}
BENCHMARK(BM_ShellPartials);

// One identity integral at 2^k times the default node counts per dimension.
void BM_IntegrateRetarded(benchmark::State& state) {
  const fields::Field f = fields::FieldSpec::translated_bump(0.5);
  const SpaceTimePoint p{0.0, 0.0, 0.2, 0.0};
  quadrature::QuadratureConfig q = quadrature::QuadratureConfig{}.scaled(
      std::ldexp(1.0, static_cast<int>(state.range(0))));
  q.rho_max = quadrature::support_radius(f, p, {});
  q.threads = 1;
  auto integrand = [&](const SpaceTimePoint& x) { return kernel::dalembertian(f, x, {}); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(quadrature::integrate_retarded(integrand, p, q, {}));
  }
  state.counters["nodes"] = static_cast<double>(q.node_count());
  state.SetItemsProcessed(state.iterations() * q.node_count());
}
BENCHMARK(BM_IntegrateRetarded)->Arg(-2)->Arg(-1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_VerifyPointwise(benchmark::State& state) {
  const fields::Field f = fields::FieldSpec::translated_bump(0.5);
  quadrature::QuadratureConfig q;
  q.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(identity::verify_pointwise(f, {0, 0, 0.2, 0}, q, {}));
  }
}
BENCHMARK(BM_VerifyPointwise)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
