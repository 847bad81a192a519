#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ilcfr/analysis.hpp"
#include "ilcfr/error.hpp"
#include "ilcfr/lifted.hpp"

using namespace ilcfr;
using namespace ilcfr::testing;

namespace {

MarkovSequence seq(std::initializer_list<double> v) {
  MarkovSequence m;
  m.h = Eigen::VectorXd(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) m.h(k++) = x;
  m.T = 0.01;
  return m;
}

}  // namespace

TEST(Toeplitz, DirectPlacement) {
  Eigen::Matrix3d want;
  want << 1, 0, 0, 0.5, 1, 0, 0.25, 0.5, 1;
  const LiftedMatrix P = toeplitz_matrix(seq({1, 0.5, 0.25}));
  EXPECT_EQ(P.data, want);
  EXPECT_EQ(P.kind, MatrixKind::toeplitz);
  EXPECT_EQ(toeplitz_matrix(seq({2})).data, Eigen::MatrixXd::Constant(1, 1, 2.0));
}

TEST(Toeplitz, MatchesZeroStateSimulation) {
  std::mt19937_64 rng(3);
  const auto ss = benchmark_plant(0.01);
  const Index N = 101;
  const LiftedMatrix P = toeplitz_matrix(markov_parameters(ss, N));
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd u = random_matrix(rng, N, 1);
    EXPECT_LT(max_abs_diff(P.data * u, simulate(ss, u)), 1e-10);
  }
}

TEST(Toeplitz, LiftedIdentityWithInitialState) {
  std::mt19937_64 rng(5);
  const auto ss = benchmark_plant(0.02);
  const Index N = 51;
  const LiftedMatrix P = toeplitz_matrix(markov_parameters(ss, N));
  const ObservabilityVector O = observability_vector(ss, N);
  ASSERT_EQ(O.rows.rows(), N);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd u = random_matrix(rng, N, 1);
    const Eigen::VectorXd x0 = random_matrix(rng, 3, 1);
    EXPECT_LT(max_abs_diff(P.data * u + O.rows * x0, simulate(ss, u, x0)), 1e-10);
  }
}

TEST(Toeplitz, CausalShift) {
  std::mt19937_64 rng(9);
  const auto ss = benchmark_plant(0.02);
  const Index N = 40;
  const Eigen::MatrixXd P = toeplitz_matrix(markov_parameters(ss, N)).data;
  Eigen::VectorXd u = random_matrix(rng, N, 1);
  u(N - 1) = 0.0;
  Eigen::VectorXd shifted = Eigen::VectorXd::Zero(N);
  shifted.tail(N - 1) = u.head(N - 1);
  const Eigen::VectorXd y = P * u, ys = P * shifted;
  EXPECT_EQ(ys(0), 0.0);
  EXPECT_LT(max_abs_diff(ys.tail(N - 1), y.head(N - 1)), 1e-14);
}

TEST(Observability, Examples) {
  DiscreteStateSpace id(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 0),
                        Eigen::RowVector2d(3, 4), 0.1);
  const auto O = observability_vector(id, 4);
  for (Index k = 0; k < 4; ++k) EXPECT_EQ(O.rows.row(k), Eigen::RowVector2d(3, 4));
  DiscreteStateSpace half(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::VectorXd::Ones(1),
                          Eigen::RowVectorXd::Ones(1), 0.1);
  EXPECT_EQ(observability_vector(half, 3).rows, Eigen::Vector3d(0.5, 0.25, 0.125));
}

TEST(Circulant, RotationDefinition) {
  Eigen::Matrix3d want;
  want << 1, 3, 2, 2, 1, 3, 3, 2, 1;
  EXPECT_EQ(circulant_matrix(seq({1, 2, 3})).data, want);
  EXPECT_EQ(circulant_matrix(seq({1, 0, 0, 0, 0})).data, Eigen::MatrixXd::Identity(5, 5));
}

TEST(Circulant, EigenvaluesAreDftOfFirstColumn) {
  const auto ss = benchmark_plant(0.01);
  const auto h = markov_parameters(ss, 100);
  const Eigen::MatrixXd Pc = circulant_matrix(h).data;
  const auto H = naive_dft(h.h);
  // Fourier vectors f_q(k) = exp(2 pi i q k / N) are eigenvectors with eigenvalue H_q.
  const Index N = 100;
  double worst = 0.0;
  for (Index q = 0; q < N; ++q) {
    Eigen::VectorXcd f(N);
    for (Index k = 0; k < N; ++k)
      f(k) = std::polar(1.0, 2.0 * std::numbers::pi * double((q * k) % N) / N);
    const Eigen::VectorXcd r = Pc.cast<std::complex<double>>() * f - H[q] * f;
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-9);

  Eigen::EigenSolver<Eigen::MatrixXd> es(Pc);
  for (Index i = 0; i < N; ++i) {
    double best = INFINITY;
    for (const auto& z : H) best = std::min(best, std::abs(es.eigenvalues()(i) - z));
    EXPECT_LT(best, 1e-9);
  }
}

TEST(Circulant, DftDiagonalizesRandomCirculants) {
  std::mt19937_64 rng(21);
  for (Index N : {7, 32, 100, 256}) {
    MarkovSequence h;
    h.h = random_matrix(rng, N, 1);
    const Eigen::MatrixXcd Pc = circulant_matrix(h).data.cast<std::complex<double>>();
    Eigen::MatrixXcd F(N, N);
    for (Index i = 0; i < N; ++i)
      for (Index k = 0; k < N; ++k)
        F(i, k) = std::polar(1.0 / std::sqrt(double(N)),
                             -2.0 * std::numbers::pi * double((i * k) % N) / N);
    Eigen::MatrixXcd D = F * Pc * F.adjoint();
    D.diagonal().setZero();
    EXPECT_LT(D.cwiseAbs().maxCoeff(), 1e-9) << "N=" << N;
  }
}

// The circulant reproduces the steady-state response of the N-sample
// truncated pulse response sum_{k=1}^{N} h(k) z^{-k} at every periodic frequency.
TEST(Circulant, ExactForTruncatedResponseAtPeriodicFrequencies) {
  for (double T : {0.01, 0.02}) {
    const Index N = 100;
    const auto ss = benchmark_plant(T);
    const auto h = markov_parameters(ss, N);
    const Eigen::MatrixXd Pc = circulant_matrix(h).data;
    double worst = 0.0;
    for (Index q = 0; q <= N / 2; ++q) {
      const double w = 2.0 * std::numbers::pi * q / (N * T);
      std::complex<double> G = 0.0;
      for (Index k = 1; k <= N; ++k) G += h.h(k - 1) * std::polar(1.0, -w * k * T);
      for (int phase = 0; phase < 2; ++phase) {
        const double shift = phase ? std::numbers::pi / 2 : 0.0;
        Eigen::VectorXd u(N);
        for (Index k = 0; k < N; ++k) u(k) = std::sin(w * k * T + shift);
        const Eigen::VectorXd y = Pc * u;
        for (Index r = 0; r < N; ++r)
          worst = std::max(worst, std::abs(y(r) - std::abs(G) * std::sin(w * (r + 1) * T + shift +
                                                                           std::arg(G))));
      }
    }
    EXPECT_LT(worst, 1e-12) << "T=" << T;
  }
}

// Against the true transfer function the error is the aliased pulse-response
// tail, bounded by sum_{k>N} |h(k)|.
TEST(Circulant, PeriodicFrequencyErrorBoundedByPulseTail) {
  for (double T : {0.01, 0.02}) {
    const Index N = 100;
    const auto ss = benchmark_plant(T);
    const auto h = markov_parameters(ss, 40 * N);
    const double tail = h.h.tail(39 * N).cwiseAbs().sum();
    const Eigen::MatrixXd Pc = circulant_matrix(markov_parameters(ss, N)).data;
    std::vector<double> omegas;
    for (Index q = 0; q <= N / 2; ++q) omegas.push_back(2.0 * std::numbers::pi * q / (N * T));
    for (ProbeWave wave : {ProbeWave::sine, ProbeWave::cosine})
      for (const auto& p : freq_deviation_sweep(Pc, ss, omegas, wave))
        EXPECT_LE(p.rms, tail * (1.0 + 1e-9) + 1e-15) << "T=" << T << " omega " << p.omega;
  }
}

TEST(ExtendedCirculant, FactorOneEqualsCirculant) {
  const auto ss = benchmark_plant(0.01);
  const LiftedMatrix e = extended_circulant(ss, 101, 1);
  EXPECT_EQ(e.data, circulant_matrix(markov_parameters(ss, 101)).data);
  EXPECT_EQ(e.kind, MatrixKind::extended_circulant);
}

TEST(ExtendedCirculant, SteadyStateAtExtendedFundamentals) {
  const double T = 0.01;
  const Index N = 101, factor = 10, M = N * factor;
  const auto ss = benchmark_plant(T);
  const LiftedMatrix e = extended_circulant(ss, N, factor);
  ASSERT_EQ(e.rows(), M);
  ASSERT_EQ(e.cols(), M);
  std::vector<double> omegas;
  for (Index q : {1, 3, 7, 10, 55, 200, 504}) omegas.push_back(2.0 * std::numbers::pi * q / (M * T));
  for (const auto& p : freq_deviation_sweep(e.data, ss, omegas, ProbeWave::sine))
    EXPECT_LT(p.rms, 1e-12) << p.omega;
  EXPECT_THROW(extended_circulant(ss, 0, 10), Error);
  EXPECT_THROW(extended_circulant(ss, 10, 0), Error);
}

TEST(DeleteLeading, Shapes) {
  const auto ss = benchmark_plant(0.01);
  const LiftedMatrix P = toeplitz_matrix(markov_parameters(ss, 101));
  const LiftedMatrix P1 = delete_leading(P, 1, 0);
  EXPECT_EQ(P1.rows(), 100);
  EXPECT_EQ(P1.cols(), 101);
  EXPECT_EQ(P1.rows_deleted, 1);
  EXPECT_EQ(P1.data, P.data.bottomRows(100));

  LiftedMatrix I;
  I.data = Eigen::Matrix3d::Identity();
  EXPECT_EQ(delete_leading(I, 1, 1).data, Eigen::Matrix2d::Identity());
  EXPECT_EQ(delete_leading(I, 0, 0).data, I.data);
  EXPECT_THROW(delete_leading(I, 3, 0), Error);
  EXPECT_THROW(delete_leading(I, 0, 3), Error);
  EXPECT_THROW(delete_leading(I, -1, 0), Error);
}

TEST(MatrixCsv, RoundTripIsExact) {
  std::mt19937_64 rng(17);
  const Eigen::MatrixXd m = random_matrix(rng, 7, 5) * 1e3;
  std::stringstream s;
  write_matrix_csv(s, m);
  EXPECT_EQ(read_matrix_csv(s), m);
  std::stringstream ragged("1,2\n3\n");
  EXPECT_THROW(read_matrix_csv(ragged), Error);
}
