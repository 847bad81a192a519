#include "ilcfr/law.hpp"

#include <cmath>
#include <complex>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ilcfr/error.hpp"

namespace ilcfr {

std::string_view to_string(LawVariant v) {
  switch (v) {
    case LawVariant::fir_banded: return "fir_banded";
    case LawVariant::fir_full: return "fir_full";
    case LawVariant::circulant: return "circulant";
    case LawVariant::circulant_extended: return "circulant_extended";
  }
  return "unknown";
}

std::optional<LawVariant> parse_law_variant(std::string_view s) {
  for (LawVariant v : {LawVariant::fir_banded, LawVariant::fir_full, LawVariant::circulant,
                       LawVariant::circulant_extended})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

IlcLaw build_fir_law(const LiftedMatrix& F, Index skip, LawVariant variant) {
  if (skip < 0 || skip >= F.cols())
    fail(ErrorCode::invalid_parameter,
         fmt::format("skip={} must lie in [0, {})", skip, F.cols()));
  return IlcLaw{F.data.rightCols(F.cols() - skip), variant, skip};
}

namespace {

// Frequency indices whose DFT coefficient of the first column is tiny.
std::vector<Index> near_zero_frequencies(const Eigen::VectorXd& c) {
  const Index N = c.size();
  std::vector<double> mag(static_cast<std::size_t>(N));
  double peak = 0.0;
  for (Index q = 0; q < N; ++q) {
    std::complex<double> acc = 0.0;
    for (Index k = 0; k < N; ++k)
      acc += c(k) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(q * k % N) /
                                        static_cast<double>(N));
    mag[static_cast<std::size_t>(q)] = std::abs(acc);
    peak = std::max(peak, mag[static_cast<std::size_t>(q)]);
  }
  std::vector<Index> out;
  for (Index q = 0; q < N; ++q)
    if (mag[static_cast<std::size_t>(q)] <= 1e-10 * peak) out.push_back(q);
  return out;
}

}  // namespace

IlcLaw build_circulant_law(const LiftedMatrix& Pc, Index skip, Index reduce_to) {
  if (Pc.rows() != Pc.cols()) fail(ErrorCode::shape_mismatch, "circulant must be square");
  const Index size = reduce_to > 0 ? reduce_to : Pc.rows();
  if (size > Pc.rows())
    fail(ErrorCode::invalid_parameter, "reduction larger than the circulant itself");
  if (skip < 0 || skip >= size)
    fail(ErrorCode::invalid_parameter, fmt::format("skip={} must lie in [0, {})", skip, size));

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Pc.data);
  if (!(lu.rcond() > 1e-14)) {
    const auto bad = near_zero_frequencies(Pc.data.col(0));
    fail(ErrorCode::singular_matrix,
         fmt::format("circulant is singular (rcond {:.3e}); near-zero DFT at indices [{}]",
                     lu.rcond(), fmt::join(bad, ", ")));
  }
  const Eigen::MatrixXd inv = lu.inverse();
  const LawVariant variant = Pc.kind == MatrixKind::extended_circulant
                                 ? LawVariant::circulant_extended
                                 : LawVariant::circulant;
  return IlcLaw{inv.topLeftCorner(size, size).rightCols(size - skip), variant, skip};
}

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& M) {
  if (M.rows() <= 128) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues();
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues();
}

double spectral_radius(const Eigen::Ref<const Eigen::MatrixXd>& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::singular_evaluation, "eigenvalue iteration did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

IterationMatrix iteration_matrix(const Eigen::Ref<const Eigen::MatrixXd>& P1,
                                 const Eigen::Ref<const Eigen::MatrixXd>& L) {
  if (P1.cols() != L.rows() || P1.rows() != L.cols())
    fail(ErrorCode::shape_mismatch,
         fmt::format("P_1 is {}x{} but L is {}x{}", P1.rows(), P1.cols(), L.rows(), L.cols()));
  if (P1.rows() == 0)
    fail(ErrorCode::shape_mismatch, "iteration matrix would be 0x0");
  IterationMatrix out;
  out.E = -P1 * L;
  out.E.diagonal().array() += 1.0;
  out.sigma = singular_values(out.E);
  out.rho = spectral_radius(out.E);
  return out;
}

IterationMatrix iteration_matrix(const LiftedMatrix& P, const IlcLaw& law) {
  if (P.rows() != law.trajectory_length() || P.cols() != law.trajectory_length())
    fail(ErrorCode::shape_mismatch,
         fmt::format("P is {}x{} but the law expects N={}", P.rows(), P.cols(),
                     law.trajectory_length()));
  if (law.skip >= P.rows())
    fail(ErrorCode::shape_mismatch, "iteration matrix would be 0x0");
  return iteration_matrix(P.data.bottomRows(P.rows() - law.skip), law.L);
}

void write_law_csv(std::ostream& out, const IlcLaw& law) {
  out << "# variant," << to_string(law.variant) << '\n';
  out << "# skip," << law.skip << '\n';
  write_matrix_csv(out, law.L);
}

IlcLaw read_law_csv(std::istream& in) {
  IlcLaw law;
  bool have_variant = false, have_skip = false;
  std::stringstream body;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') {
      std::stringstream ss(line.substr(1));
      std::string key, value;
      std::getline(ss >> std::ws, key, ',');
      std::getline(ss, value);
      if (key == "variant") {
        auto v = parse_law_variant(value);
        if (!v) fail(ErrorCode::io_error, "unknown law variant '" + value + "'");
        law.variant = *v;
        have_variant = true;
      } else if (key == "skip") {
        law.skip = std::stol(value);
        have_skip = true;
      }
      continue;
    }
    body << line << '\n';
  }
  if (!have_variant || !have_skip)
    fail(ErrorCode::io_error, "law CSV is missing the variant/skip header");
  law.L = read_matrix_csv(body);
  if (law.L.rows() != law.L.cols() + law.skip)
    fail(ErrorCode::io_error, "law CSV shape does not match its skip count");
  return law;
}

}  // namespace ilcfr
