#pragma once

#include <iosfwd>
#include <string_view>

#include <Eigen/Core>

#include "ilcfr/lti.hpp"

namespace ilcfr {

enum class MatrixKind { toeplitz, circulant, extended_circulant, learning, iteration };

std::string_view to_string(MatrixKind kind);

/// Dense lifted (whole-trajectory) matrix with its structure tag and the
/// number of leading rows/columns already removed.
struct LiftedMatrix {
  Eigen::MatrixXd data;
  MatrixKind kind = MatrixKind::toeplitz;
  Index rows_deleted = 0;
  Index cols_deleted = 0;
  double T = 0.0;

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
};

/// Rows C A^k, k = 1..N, stacked as an N x n matrix.
struct ObservabilityVector {
  Eigen::MatrixXd rows;
};

/// Lower-triangular Toeplitz P with P(i, j) = h(i - j), 0-based.
LiftedMatrix toeplitz_matrix(const MarkovSequence& h);

ObservabilityVector observability_vector(const DiscreteStateSpace& ss, Index N);

/// Circulant P_c: column j is h rotated down by j, P_c(i, j) = h((i - j) mod N).
LiftedMatrix circulant_matrix(const MarkovSequence& h);

/// Circulant of the first N * factor Markov parameters.
LiftedMatrix extended_circulant(const DiscreteStateSpace& ss, Index N, Index factor);

LiftedMatrix delete_leading(const LiftedMatrix& m, Index rows, Index cols);

/// Row-major CSV with 17 significant digits.
void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& m);
Eigen::MatrixXd read_matrix_csv(std::istream& in);

}  // namespace ilcfr
