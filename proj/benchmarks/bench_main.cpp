#include <numbers>

#include <benchmark/benchmark.h>

#include "ilcfr/engine.hpp"
#include "ilcfr/fir.hpp"
#include "ilcfr/law.hpp"
#include "ilcfr/lifted.hpp"
#include "ilcfr/lti.hpp"
#include "ilcfr/tuner.hpp"

using namespace ilcfr;

namespace {

struct Case {
  DiscreteStateSpace ss;
  MarkovSequence h;
  LiftedMatrix P;
  Eigen::MatrixXd P1;
  IlcLaw fir;
  IlcLaw circ;
};

Case make_case(double T, Index N) {
  Case c;
  c.ss = zoh_discretize(build_benchmark(BenchmarkParams{}), T);
  c.h = markov_parameters(c.ss, N);
  c.P = toeplitz_matrix(c.h);
  c.P1 = c.P.data.bottomRows(N - 1);
  const auto d = design_fir(freq_grid_degrees(c.ss), default_center(N), N, T);
  c.fir = build_fir_law(fir_to_learning_matrix(d.filter, N), 1);
  c.circ = build_circulant_law(circulant_matrix(c.h), 1);
  return c;
}

void BM_FirDesign(benchmark::State& state) {
  const auto ss = zoh_discretize(build_benchmark(BenchmarkParams{}), 0.01);
  const auto grid = freq_grid_degrees(ss);
  const Index n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(design_fir(grid, default_center(n), n, 0.01));
}
BENCHMARK(BM_FirDesign)->Arg(12)->Arg(51)->Arg(101);

void BM_IterationMatrix(benchmark::State& state) {
  const Case c = make_case(0.01, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(iteration_matrix(c.P, c.circ));
}
BENCHMARK(BM_IterationMatrix)->Arg(51)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_Sensitivity(benchmark::State& state) {
  const Case c = make_case(0.02, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sigma_sensitivity(c.P1, c.fir.L));
}
BENCHMARK(BM_Sensitivity)->Arg(21)->Arg(51)->Unit(benchmark::kMillisecond);

void BM_TuneCirculant(benchmark::State& state) {
  const Case c = make_case(0.02, 51);
  TuneSpec spec;
  spec.blocks = {upper_left_block(5, 5), upper_right_block(5, 5, c.circ.L.cols())};
  for (auto _ : state) benchmark::DoNotOptimize(steepest_descent_tune(c.P1, c.circ, spec));
}
BENCHMARK(BM_TuneCirculant)->Unit(benchmark::kMillisecond);

void BM_RunIlc(benchmark::State& state) {
  const Index N = state.range(0);
  const Case c = make_case(0.01, N);
  const Trajectory ystar = gen_raised_cos_sq(2.0 * std::numbers::pi, 0.01, N);
  for (auto _ : state) benchmark::DoNotOptimize(run_ilc(c.ss, c.circ, ystar, 60));
}
BENCHMARK(BM_RunIlc)->Arg(21)->Arg(101)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
