#include "ilcfr/lti.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include "ilcfr/error.hpp"

namespace ilcfr {
namespace {

std::vector<double> strip_trailing_zeros(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  return c;
}

bool all_finite(const std::vector<double>& c) {
  for (double v : c)
    if (!std::isfinite(v)) return false;
  return true;
}

std::complex<double> polyval(const std::vector<double>& ascending,
                             std::complex<double> x) {
  std::complex<double> acc = 0.0;
  for (auto it = ascending.rbegin(); it != ascending.rend(); ++it)
    acc = acc * x + *it;
  return acc;
}

}  // namespace

ContinuousSiso::ContinuousSiso(std::vector<double> num_ascending,
                               std::vector<double> den_ascending) {
  if (num_ascending.empty() || den_ascending.empty())
    fail(ErrorCode::invalid_parameter, "empty polynomial");
  if (!all_finite(num_ascending) || !all_finite(den_ascending))
    fail(ErrorCode::invalid_parameter, "non-finite coefficient");
  num_ = strip_trailing_zeros(std::move(num_ascending));
  den_ = strip_trailing_zeros(std::move(den_ascending));
  if (den_.back() == 0.0)
    fail(ErrorCode::invalid_parameter, "denominator is identically zero");
  if (num_degree() > den_degree())
    fail(ErrorCode::unsupported_system, "improper transfer function");
}

std::complex<double> ContinuousSiso::evaluate(std::complex<double> s) const {
  return polyval(num_, s) / polyval(den_, s);
}

double ContinuousSiso::dc_gain() const { return num_.front() / den_.front(); }

ContinuousSiso build_benchmark(double a, double omega0, double xi) {
  if (!(a > 0.0) || !(omega0 > 0.0) || !(xi > 0.0))
    fail(ErrorCode::invalid_parameter,
         "benchmark parameters must be positive (a=" + std::to_string(a) +
             ", omega0=" + std::to_string(omega0) +
             ", xi=" + std::to_string(xi) + ")");
  const double w2 = omega0 * omega0;
  const double c1 = 2.0 * xi * omega0;
  // (s + a)(s^2 + c1 s + w2)
  std::vector<double> den{a * w2, w2 + a * c1, c1 + a, 1.0};
  return ContinuousSiso({a * w2}, std::move(den));
}

DiscreteStateSpace::DiscreteStateSpace(Eigen::MatrixXd a, Eigen::VectorXd b,
                                       Eigen::RowVectorXd c, double t)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), T(t) {
  const Index n = A.rows();
  if (A.cols() != n || B.size() != n || C.size() != n)
    fail(ErrorCode::shape_mismatch, "inconsistent state-space dimensions");
  if (!(T > 0.0)) fail(ErrorCode::invalid_parameter, "sample period must be > 0");
}

DiscreteStateSpace zoh_discretize(const ContinuousSiso& sys, double T) {
  if (!(T > 0.0) || !std::isfinite(T))
    fail(ErrorCode::invalid_parameter, "sample period must be > 0");
  if (!sys.strictly_proper())
    fail(ErrorCode::unsupported_system,
         "zero-order-hold discretization needs a strictly proper system");

  const Index n = sys.den_degree();
  const double lead = sys.den().back();

  // Augmented [[Ac, Bc], [0, 0]] in controllable canonical form.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (Index i = 0; i + 1 < n; ++i) aug(i, i + 1) = 1.0;
  for (Index j = 0; j < n; ++j) aug(n - 1, j) = -sys.den()[j] / lead;
  aug(n - 1, n) = 1.0;

  Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(n);
  for (std::size_t j = 0; j < sys.num().size(); ++j)
    C(static_cast<Index>(j)) = sys.num()[j] / lead;

  const Eigen::MatrixXd phi = (aug * T).exp();
  return DiscreteStateSpace(phi.topLeftCorner(n, n), phi.topRightCorner(n, 1),
                            std::move(C), T);
}

MarkovSequence markov_parameters(const DiscreteStateSpace& ss, Index N) {
  if (N < 1) fail(ErrorCode::invalid_parameter, "Markov sequence length must be >= 1");
  MarkovSequence seq{Eigen::VectorXd(N), ss.T};
  Eigen::VectorXd x = ss.B;
  for (Index k = 0; k < N; ++k) {
    seq.h(k) = ss.C.dot(x);
    x = ss.A * x;
  }
  return seq;
}

FreqSample freq_response(const DiscreteStateSpace& ss, double omega) {
  const double nyquist = std::numbers::pi / ss.T;
  const double slack = 1e-12 * nyquist;
  if (!(omega >= -slack) || !(omega <= nyquist + slack))
    fail(ErrorCode::range_error, "omega " + std::to_string(omega) +
                                     " outside [0, " + std::to_string(nyquist) + "]");

  const std::complex<double> z = std::polar(1.0, omega * ss.T);
  Eigen::MatrixXcd zia = -ss.A.cast<std::complex<double>>();
  zia.diagonal().array() += z;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(zia);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible())
    fail(ErrorCode::singular_evaluation,
         "e^{i omega T} is an eigenvalue of A at omega=" + std::to_string(omega));
  const Eigen::VectorXcd x = lu.solve(ss.B.cast<std::complex<double>>());
  const std::complex<double> g = ss.C.cast<std::complex<double>>().dot(x);

  double phase = std::arg(g);
  if (phase <= -std::numbers::pi) phase = std::numbers::pi;
  return FreqSample{omega, std::abs(g), phase};
}

std::vector<FreqSample> freq_grid_degrees(const DiscreteStateSpace& ss,
                                          int first_deg, int last_deg) {
  if (first_deg < 0 || last_deg > 180 || first_deg > last_deg)
    fail(ErrorCode::invalid_parameter, "degree grid must lie in [0, 180]");
  std::vector<FreqSample> out;
  out.reserve(static_cast<std::size_t>(last_deg - first_deg + 1));
  for (int d = first_deg; d <= last_deg; ++d) {
    const double wT = d * std::numbers::pi / 180.0;
    out.push_back(freq_response(ss, wT / ss.T));
  }
  return out;
}

Eigen::VectorXd simulate(const DiscreteStateSpace& ss,
                         const Eigen::Ref<const Eigen::VectorXd>& u,
                         const Eigen::Ref<const Eigen::VectorXd>& x0) {
  if (x0.size() != ss.order())
    fail(ErrorCode::shape_mismatch, "initial state has wrong dimension");
  Eigen::VectorXd y(u.size());
  Eigen::VectorXd x = x0;
  for (Index k = 0; k < u.size(); ++k) {
    x = ss.A * x + ss.B * u(k);
    y(k) = ss.C.dot(x);
  }
  return y;
}

Eigen::VectorXd simulate(const DiscreteStateSpace& ss,
                         const Eigen::Ref<const Eigen::VectorXd>& u) {
  return simulate(ss, u, Eigen::VectorXd::Zero(ss.order()));
}

}  // namespace ilcfr
