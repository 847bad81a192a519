#include "ilcfr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "ilcfr/error.hpp"

namespace ilcfr {

double quintic_at(double t) {
  return std::numbers::pi * t * t * t * (5.0 + t * (7.5 + 3.0 * t));
}

double raised_cos_sq_at(double omega, double t) {
  const double c = 1.0 - std::cos(omega * t);
  return std::numbers::pi * c * c;
}

namespace {

template <typename Fn>
Trajectory sample(std::string name, double omega, double T, Index N, Fn&& fn) {
  if (!(T > 0.0) || N < 1)
    fail(ErrorCode::invalid_parameter, "trajectory needs T > 0 and N >= 1");
  Trajectory tr{Eigen::VectorXd(N), std::move(name), omega, T};
  for (Index k = 1; k <= N; ++k) tr.samples(k - 1) = fn(static_cast<double>(k) * T);
  if (!tr.samples.allFinite()) fail(ErrorCode::invalid_parameter, "non-finite trajectory");
  return tr;
}

}  // namespace

Trajectory gen_quintic(double T, Index N) {
  return sample("quintic", 0.0, T, N, quintic_at);
}

Trajectory gen_raised_cos_sq(double omega, double T, Index N) {
  return sample("raised_cos_sq", omega, T, N,
                [omega](double t) { return raised_cos_sq_at(omega, t); });
}

Trajectory gen_sine(double omega, double T, Index N) {
  return sample("sine", omega, T, N, [omega](double t) { return std::sin(omega * t); });
}

std::vector<double> IlcRunRecord::rms() const {
  std::vector<double> out;
  out.reserve(iterations.size());
  for (const IterationRecord& r : iterations) out.push_back(r.rms);
  return out;
}

IlcRunRecord run_ilc(const DiscreteStateSpace& plant, const IlcLaw& law,
                     const Trajectory& ystar, int iters, InitialInput u0_policy) {
  const Index N = ystar.size();
  const Index skip = law.skip;
  if (law.trajectory_length() != N || law.tracked_length() != N - skip)
    fail(ErrorCode::shape_mismatch,
         fmt::format("law is {}x{} (skip {}) but the trajectory has {} samples",
                     law.L.rows(), law.L.cols(), skip, N));
  if (iters < 0) fail(ErrorCode::invalid_parameter, "iteration count must be >= 0");

  IlcRunRecord rec;
  rec.skip = skip;
  rec.T = plant.T;
  Eigen::VectorXd u =
      u0_policy == InitialInput::desired ? ystar.samples : Eigen::VectorXd::Zero(N);
  const double norm = std::sqrt(static_cast<double>(N - skip));

  for (int j = 0; j <= iters; ++j) {
    IterationRecord r;
    r.y = simulate(plant, u);
    r.e = ystar.samples.tail(N - skip) - r.y.tail(N - skip);
    r.rms = r.e.norm() / norm;
    if (!r.y.allFinite() || !std::isfinite(r.rms) ||
        (j > 0 && r.rms > 1e12 * std::max(rec.iterations.front().rms, 1e-300))) {
      rec.diverged_at = j;
      break;
    }
    r.u = u;
    if (j < iters) u += law.L * r.e;
    rec.iterations.push_back(std::move(r));
  }
  return rec;
}

double wiggle_metric(const IlcRunRecord& record, int iteration, Index window) {
  if (iteration < 0 || iteration >= static_cast<int>(record.iterations.size()))
    fail(ErrorCode::range_error, fmt::format("no iteration {} in the record", iteration));
  const IterationRecord& r = record.iterations[static_cast<std::size_t>(iteration)];
  const Index tracked = r.e.size();
  const Index w = std::clamp<Index>(window, 0, tracked);
  if (w == 0) return 0.0;
  return r.e.head(w).cwiseAbs().maxCoeff();
}

void write_run_csv(std::ostream& out, const IlcRunRecord& record, const Trajectory& ystar) {
  out << "iter,k,t,ystar,y,u,e\n";
  const Index N = ystar.size();
  for (std::size_t j = 0; j < record.iterations.size(); ++j) {
    const IterationRecord& r = record.iterations[j];
    for (Index k = 1; k <= N; ++k) {
      const double t = static_cast<double>(k) * record.T;
      out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},", j, k, t,
                         ystar.samples(k - 1), r.y(k - 1), r.u(k - 1));
      if (k > record.skip) out << fmt::format("{:.17g}", r.e(k - 1 - record.skip));
      out << '\n';
    }
  }
}

void write_run_summary_csv(std::ostream& out, const IlcRunRecord& record,
                           const Trajectory& ystar, Index wiggle_window) {
  out << "iter,rms,wiggle\n";
  for (std::size_t j = 0; j < record.iterations.size(); ++j)
    out << fmt::format("{},{:.17g},{:.17g}\n", j, record.iterations[j].rms,
                       wiggle_metric(record, static_cast<int>(j), wiggle_window));
}

}  // namespace ilcfr
