#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace ilcfr {

using Index = Eigen::Index;

/**
 * Real rational transfer function num(s)/den(s) of a single-input
 * single-output continuous plant. Coefficients are stored in ascending
 * powers of s with trailing zeros stripped.
 */
class ContinuousSiso {
 public:
  /// Throws invalid_parameter on empty/non-finite input or a zero
  /// denominator. Proper but not strictly proper systems are accepted here;
  /// zoh_discretize rejects them.
  ContinuousSiso(std::vector<double> num_ascending,
                 std::vector<double> den_ascending);

  const std::vector<double>& num() const { return num_; }
  const std::vector<double>& den() const { return den_; }

  int num_degree() const { return static_cast<int>(num_.size()) - 1; }
  int den_degree() const { return static_cast<int>(den_.size()) - 1; }
  bool strictly_proper() const { return num_degree() < den_degree(); }

  std::complex<double> evaluate(std::complex<double> s) const;
  double dc_gain() const;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
};

/// (a/(s+a)) * (w0^2/(s^2 + 2 xi w0 s + w0^2)), expanded.
ContinuousSiso build_benchmark(double a, double omega0, double xi);

struct BenchmarkParams {
  double a = 8.8;
  double omega0 = 37.0;
  double xi = 0.5;
};

inline ContinuousSiso build_benchmark(const BenchmarkParams& p) {
  return build_benchmark(p.a, p.omega0, p.xi);
}

/// x(k+1) = A x(k) + B u(k), y(k) = C x(k), sample period T.
struct DiscreteStateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double T = 0.0;

  DiscreteStateSpace() = default;
  DiscreteStateSpace(Eigen::MatrixXd a, Eigen::VectorXd b,
                     Eigen::RowVectorXd c, double t);

  Index order() const { return A.rows(); }
};

/**
 * Exact zero-order-hold equivalent. The continuous system is realized in
 * controllable canonical form and both discrete blocks come out of a single
 * exponential of the augmented matrix [[Ac, Bc], [0, 0]] * T.
 */
DiscreteStateSpace zoh_discretize(const ContinuousSiso& sys, double T);

/// Unit-pulse response samples h(k) = C A^{k-1} B, k = 1..N.
struct MarkovSequence {
  Eigen::VectorXd h;
  double T = 0.0;

  Index size() const { return h.size(); }
};

MarkovSequence markov_parameters(const DiscreteStateSpace& ss, Index N);

struct FreqSample {
  double omega = 0.0;      // rad/s, within [0, pi/T]
  double magnitude = 0.0;  // |G(e^{i omega T})|
  double phase = 0.0;      // principal value in (-pi, pi]
};

FreqSample freq_response(const DiscreteStateSpace& ss, double omega);

/// Samples at omega*T = first_deg, first_deg+1, ..., last_deg degrees.
std::vector<FreqSample> freq_grid_degrees(const DiscreteStateSpace& ss,
                                          int first_deg = 0,
                                          int last_deg = 179);

/// Output y(1..N) for inputs u(0..N-1) from initial state x0.
Eigen::VectorXd simulate(const DiscreteStateSpace& ss,
                         const Eigen::Ref<const Eigen::VectorXd>& u,
                         const Eigen::Ref<const Eigen::VectorXd>& x0);

Eigen::VectorXd simulate(const DiscreteStateSpace& ss,
                         const Eigen::Ref<const Eigen::VectorXd>& u);

}  // namespace ilcfr
