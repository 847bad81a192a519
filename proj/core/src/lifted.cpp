#include "ilcfr/lifted.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ilcfr/error.hpp"

namespace ilcfr {

std::string_view to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::toeplitz: return "toeplitz";
    case MatrixKind::circulant: return "circulant";
    case MatrixKind::extended_circulant: return "extended_circulant";
    case MatrixKind::learning: return "learning";
    case MatrixKind::iteration: return "iteration";
  }
  return "unknown";
}

LiftedMatrix toeplitz_matrix(const MarkovSequence& h) {
  const Index N = h.size();
  if (N < 1) fail(ErrorCode::invalid_parameter, "empty Markov sequence");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, N);
  for (Index j = 0; j < N; ++j) P.col(j).tail(N - j) = h.h.head(N - j);
  return LiftedMatrix{std::move(P), MatrixKind::toeplitz, 0, 0, h.T};
}

ObservabilityVector observability_vector(const DiscreteStateSpace& ss, Index N) {
  if (N < 1) fail(ErrorCode::invalid_parameter, "N must be >= 1");
  ObservabilityVector O{Eigen::MatrixXd(N, ss.order())};
  Eigen::RowVectorXd row = ss.C;
  for (Index k = 0; k < N; ++k) {
    row = row * ss.A;
    O.rows.row(k) = row;
  }
  return O;
}

LiftedMatrix circulant_matrix(const MarkovSequence& h) {
  const Index N = h.size();
  if (N < 1) fail(ErrorCode::invalid_parameter, "empty Markov sequence");
  Eigen::MatrixXd Pc(N, N);
  for (Index j = 0; j < N; ++j) {
    // rotate down by j: the last j entries wrap to the top
    Pc.col(j).head(j) = h.h.tail(j);
    Pc.col(j).tail(N - j) = h.h.head(N - j);
  }
  return LiftedMatrix{std::move(Pc), MatrixKind::circulant, 0, 0, h.T};
}

LiftedMatrix extended_circulant(const DiscreteStateSpace& ss, Index N, Index factor) {
  if (N < 1 || factor < 1)
    fail(ErrorCode::invalid_parameter, "extended circulant needs N >= 1 and factor >= 1");
  LiftedMatrix m = circulant_matrix(markov_parameters(ss, N * factor));
  m.kind = MatrixKind::extended_circulant;
  return m;
}

LiftedMatrix delete_leading(const LiftedMatrix& m, Index rows, Index cols) {
  if (rows < 0 || cols < 0 || rows >= m.rows() || cols >= m.cols())
    fail(ErrorCode::invalid_parameter,
         fmt::format("cannot delete {} rows and {} columns from a {}x{} matrix", rows,
                     cols, m.rows(), m.cols()));
  LiftedMatrix out = m;
  out.data = m.data.bottomRightCorner(m.rows() - rows, m.cols() - cols);
  out.rows_deleted += rows;
  out.cols_deleted += cols;
  return out;
}

void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << fmt::format("{:.17g}", m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorCode::io_error, "bad numeric cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(ErrorCode::io_error, "ragged matrix CSV");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace ilcfr
