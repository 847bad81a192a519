#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ilcfr/lifted.hpp"
#include "ilcfr/lti.hpp"

namespace ilcfr {

/**
 * Non-causal FIR filter
 *
 *   F(z) = a_1 z^{m-1} + ... + a_m z^0 + ... + a_n z^{-(n-m)}
 *
 * coeffs holds a_1..a_n (0-based storage), lead = m - 1 is the number of
 * forward-in-time taps.
 */
struct FirFilter {
  Eigen::VectorXd coeffs;
  Index lead = 0;
  double T = 0.0;

  Index size() const { return coeffs.size(); }
  /// 1-based index of the z^0 tap.
  Index center() const { return lead + 1; }
  std::complex<double> response(double omega) const;
};

struct FitReport {
  double cost = 0.0;              // sum of |1 - G F|^2 over the grid
  std::vector<double> residuals;  // |1 - G F| per grid sample
  double condition = 0.0;         // condition estimate of the normal matrix
  bool used_fallback = false;     // column-pivoted QR instead of Cholesky
};

struct FirDesign {
  FirFilter filter;
  FitReport report;
};

/// Default 1-based center tap for an n-tap fit: ceil(n/2) + 1.
Index default_center(Index n);

/**
 * Least-squares fit of F to 1/G over the sampled grid by solving the normal
 * equations. `m` is the 1-based center tap, `n` the filter length.
 * Cholesky first; column-pivoted QR when the condition estimate exceeds
 * 1e12. Rank deficiency throws ill_conditioned_fit.
 */
FirDesign design_fir(std::span<const FreqSample> samples, Index m, Index n, double T);

/// The normal-equation pair (A, b) for a given grid, exposed for tests.
void fir_normal_equations(std::span<const FreqSample> samples, Index m, Index n,
                          double T, Eigen::MatrixXd& A, Eigen::VectorXd& b);

/// Cost J of arbitrary coefficients on a grid.
double fir_cost(std::span<const FreqSample> samples, const FirFilter& f);

/// N x N learning matrix with a_m on the first sub-diagonal; taps that fall
/// outside the matrix are truncated.
LiftedMatrix fir_to_learning_matrix(const FirFilter& f, Index N);

/// Single (2N - 1)-tap fit centred so that every row is complete.
struct FullMatrixDesign {
  LiftedMatrix matrix;
  FirDesign design;
};
FullMatrixDesign design_full_matrix(std::span<const FreqSample> samples, Index N,
                                    double T);

void write_fir_csv(std::ostream& out, const FirFilter& f);
FirFilter read_fir_csv(std::istream& in);

}  // namespace ilcfr
