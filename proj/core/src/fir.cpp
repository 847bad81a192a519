#include "ilcfr/fir.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <fmt/format.h>

#include "ilcfr/error.hpp"

namespace ilcfr {

std::complex<double> FirFilter::response(double omega) const {
  const double wT = omega * T;
  std::complex<double> acc = 0.0;
  for (Index k = 0; k < coeffs.size(); ++k)
    acc += coeffs(k) * std::polar(1.0, static_cast<double>(lead - k) * wT);
  return acc;
}

Index default_center(Index n) { return (n + 1) / 2 + 1; }

void fir_normal_equations(std::span<const FreqSample> samples, Index m, Index n,
                          double T, Eigen::MatrixXd& A, Eigen::VectorXd& b) {
  A = Eigen::MatrixXd::Zero(n, n);
  b = Eigen::VectorXd::Zero(n);
  // A depends on p - q only; accumulate the first row then fill the band.
  Eigen::VectorXd lag = Eigen::VectorXd::Zero(n);
  for (const FreqSample& s : samples) {
    const double wT = s.omega * T;
    const double m2 = s.magnitude * s.magnitude;
    for (Index d = 0; d < n; ++d) lag(d) += m2 * std::cos(static_cast<double>(d) * wT);
    for (Index p = 0; p < n; ++p)
      b(p) += s.magnitude * std::cos(static_cast<double>(m - 1 - p) * wT + s.phase);
  }
  for (Index p = 0; p < n; ++p)
    for (Index q = 0; q < n; ++q) A(p, q) = lag(std::abs(p - q));
}

double fir_cost(std::span<const FreqSample> samples, const FirFilter& f) {
  double J = 0.0;
  for (const FreqSample& s : samples) {
    const std::complex<double> g = std::polar(s.magnitude, s.phase);
    J += std::norm(1.0 - g * f.response(s.omega));
  }
  return J;
}

FirDesign design_fir(std::span<const FreqSample> samples, Index m, Index n, double T) {
  if (n < 1 || m < 1 || m > n)
    fail(ErrorCode::invalid_parameter,
         fmt::format("FIR needs n >= 1 and 1 <= m <= n (m={}, n={})", m, n));
  if (!(T > 0.0)) fail(ErrorCode::invalid_parameter, "sample period must be > 0");
  if (samples.empty()) fail(ErrorCode::invalid_parameter, "empty frequency grid");
  // each sample pins a complex value; at 0 and Nyquist only its real part
  Index informative = 0;
  for (const FreqSample& s : samples)
    if (s.magnitude > 0.0) informative += std::abs(std::sin(s.omega * T)) > 1e-12 ? 2 : 1;
  if (informative < n)
    fail(ErrorCode::ill_conditioned_fit,
         fmt::format("{} taps but the grid only constrains {} real values", n, informative));

  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  fir_normal_equations(samples, m, n, T, A, b);

  FirDesign out;
  out.filter.lead = m - 1;
  out.filter.T = T;

  Eigen::LLT<Eigen::MatrixXd> llt(A);
  const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  out.report.condition = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  if (rcond > 0.0 && out.report.condition <= 1e12) {
    out.filter.coeffs = llt.solve(b);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < n)
      fail(ErrorCode::ill_conditioned_fit,
           fmt::format("normal matrix rank {} < {} (condition estimate {:.3e})",
                       qr.rank(), n, out.report.condition));
    out.filter.coeffs = qr.solve(b);
    out.report.used_fallback = true;
  }

  out.report.residuals.reserve(samples.size());
  for (const FreqSample& s : samples) {
    const std::complex<double> g = std::polar(s.magnitude, s.phase);
    const double r = std::abs(1.0 - g * out.filter.response(s.omega));
    out.report.residuals.push_back(r);
    out.report.cost += r * r;
  }
  return out;
}

LiftedMatrix fir_to_learning_matrix(const FirFilter& f, Index N) {
  if (N < 1) fail(ErrorCode::invalid_parameter, "N must be >= 1");
  const Index n = f.size();
  const Index m = f.center();
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(N, N);
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < N; ++j) {
      const Index k = m + i - j - 2;  // 0-based tap; a_m lands on (j + 1, j)
      if (k >= 0 && k < n) F(i, j) = f.coeffs(k);
    }
  }
  return LiftedMatrix{std::move(F), MatrixKind::learning, 0, 0, f.T};
}

FullMatrixDesign design_full_matrix(std::span<const FreqSample> samples, Index N,
                                    double T) {
  if (N < 1) fail(ErrorCode::invalid_parameter, "N must be >= 1");
  // Row 0 reaches tap m - N, row N-1 reaches tap m + N - 2: both ends of a
  // (2N - 1)-tap filter are hit exactly when m = N + 1.
  const Index n = 2 * N - 1;
  const Index m = N == 1 ? 1 : N + 1;
  FirDesign d = design_fir(samples, m, n, T);
  LiftedMatrix F = fir_to_learning_matrix(d.filter, N);
  return FullMatrixDesign{std::move(F), std::move(d)};
}

void write_fir_csv(std::ostream& out, const FirFilter& f) {
  out << "# center_tap," << f.center() << '\n';
  out << "# T," << fmt::format("{:.17g}", f.T) << '\n';
  for (Index k = 0; k < f.size(); ++k) out << fmt::format("{:.17g}", f.coeffs(k)) << '\n';
}

FirFilter read_fir_csv(std::istream& in) {
  FirFilter f;
  Index center = 0;
  std::vector<double> coeffs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::stringstream ss(line.substr(1));
      std::string key, value;
      std::getline(ss >> std::ws, key, ',');
      std::getline(ss, value);
      if (key == "center_tap") center = std::stol(value);
      else if (key == "T") f.T = std::stod(value);
      continue;
    }
    coeffs.push_back(std::stod(line));
  }
  if (coeffs.empty() || center < 1 || center > static_cast<Index>(coeffs.size()) ||
      !(f.T > 0.0))
    fail(ErrorCode::io_error, "incomplete FIR CSV (needs center_tap, T and coefficients)");
  f.coeffs = Eigen::Map<Eigen::VectorXd>(coeffs.data(), static_cast<Index>(coeffs.size()));
  f.lead = center - 1;
  return f;
}

}  // namespace ilcfr
