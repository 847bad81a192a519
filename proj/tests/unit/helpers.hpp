#pragma once

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "ilcfr/lti.hpp"

namespace ilcfr::testing {

inline DiscreteStateSpace benchmark_plant(double T) {
  return zoh_discretize(build_benchmark(BenchmarkParams{}), T);
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline double max_abs_diff(const Eigen::Ref<const Eigen::MatrixXd>& a,
                           const Eigen::Ref<const Eigen::MatrixXd>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Naive O(N^2) DFT, X_q = sum_k x_k exp(-2 pi i q k / N).
inline std::vector<std::complex<double>> naive_dft(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Index N = x.size();
  std::vector<std::complex<double>> out(static_cast<std::size_t>(N));
  for (Index q = 0; q < N; ++q) {
    std::complex<double> acc = 0.0;
    for (Index k = 0; k < N; ++k)
      acc += x(k) * std::polar(1.0, -2.0 * 3.14159265358979323846 * double((q * k) % N) / N);
    out[q] = acc;
  }
  return out;
}

}  // namespace ilcfr::testing
