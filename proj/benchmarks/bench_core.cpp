#include <benchmark/benchmark.h>

#include <cmath>

#include "wavectl/control.hpp"
#include "wavectl/fields.hpp"
#include "wavectl/geometry.hpp"
#include "wavectl/numeric.hpp"
#include "wavectl/rellich.hpp"
#include "wavectl/wavesim.hpp"

using namespace wavectl;

namespace {

MultiplierField radial(double x, double y) {
  Vector x0(2);
  x0 << x, y;
  return make_affine(Matrix::Identity(2, 2), Matrix::Zero(2, 2), x0);
}

}  // namespace

static void BM_ConeCheck(benchmark::State& state) {
  Vector x0(2);
  x0 << 0.1, 0.2;
  const auto f = make_rotated(kPi / 6, kPi / 3, x0);
  const double res = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cone_check(f, Box::unit(2), res));
}
BENCHMARK(BM_ConeCheck)->Arg(16)->Arg(64);

static void BM_Partition(benchmark::State& state) {
  Vector x0(2);
  x0 << 0.25, 0.25;
  const auto f = make_rotated(kPi / 4, kPi / 4, x0);
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(partition(f, unit_square(), samples));
}
BENCHMARK(BM_Partition)->Arg(64)->Arg(256);

static void BM_WaveStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Lattice lat(n);
  const auto p = snap_partition(lat, partition(radial(-1, -1), unit_square(), 256), radial(-1, -1));
  const WaveSolver solver(p, make_linear_feedback(1.0));
  const auto u0 = lat.sample([](const Point& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); });
  WaveState s = solver.initial_state(u0, std::vector<double>(u0.size(), 0.0), kCflFactor * lat.h());
  for (auto _ : state) {
    s = solver.step(s);
    benchmark::DoNotOptimize(s.u.data());
  }
  state.SetItemsProcessed(state.iterations() * lat.nodes());
}
BENCHMARK(BM_WaveStep)->Arg(64)->Arg(128);

static void BM_RellichResidual(benchmark::State& state) {
  const auto u = trig_polynomial({{1.0, kPi, 2 * kPi, 0.1, 0.2}});
  const auto m = radial(0.5, 0.5);
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rellich_residual(u, m, unit_square(), h));
}
BENCHMARK(BM_RellichResidual)->Arg(64)->Arg(256);

static void BM_HumApply(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  const auto f = radial(-0.1, -0.1);
  const double T0 = ControlProblem(f, h, 1.0).T0();
  const ControlProblem P(f, h, 2 * T0);
  const auto e0 = mode_data(P, 1, 1);
  const Eigen::VectorXd e1 = Eigen::VectorXd::Zero(P.interior_size());
  for (auto _ : state) benchmark::DoNotOptimize(hum_apply(P, e0, e1));
}
BENCHMARK(BM_HumApply)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
