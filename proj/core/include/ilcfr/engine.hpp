#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ilcfr/law.hpp"
#include "ilcfr/lti.hpp"

namespace ilcfr {

/// Desired output y*(kT), k = 1..N.
struct Trajectory {
  Eigen::VectorXd samples;
  std::string generator;
  double omega = 0.0;  // only for periodic generators
  double T = 0.0;

  Index size() const { return samples.size(); }
};

/// pi (5 t^3 + 7.5 t^4 + 3 t^5)
double quintic_at(double t);
/// pi (1 - cos(omega t))^2
double raised_cos_sq_at(double omega, double t);

Trajectory gen_quintic(double T, Index N);
Trajectory gen_raised_cos_sq(double omega, double T, Index N);
Trajectory gen_sine(double omega, double T, Index N);

enum class InitialInput { desired, zero };

struct IterationRecord {
  Eigen::VectorXd u;  // u(0..N-1)
  Eigen::VectorXd y;  // y(1..N)
  Eigen::VectorXd e;  // tracked error, steps skip+1..N
  double rms = 0.0;   // |e| / sqrt(N - skip)
};

struct IlcRunRecord {
  std::vector<IterationRecord> iterations;  // run 0 is the initial run
  Index skip = 0;
  double T = 0.0;
  /// Iteration at which the run blew up (non-finite, or rms beyond 1e12
  /// times the initial rms); the offending record is not stored.
  std::optional<int> diverged_at;

  std::vector<double> rms() const;
};

/**
 * Runs `iters` learning updates u_{j+1} = u_j + L e_j against `plant`,
 * simulating every run by state propagation from x(0) = 0.
 */
IlcRunRecord run_ilc(const DiscreteStateSpace& plant, const IlcLaw& law,
                     const Trajectory& ystar, int iters,
                     InitialInput u0_policy = InitialInput::desired);

/// Max |y - y*| over the first `window` tracked steps of one iteration.
double wiggle_metric(const IlcRunRecord& record, int iteration, Index window);

/// Columns iter,k,t,ystar,y,u,e (e is blank on skipped steps).
void write_run_csv(std::ostream& out, const IlcRunRecord& record, const Trajectory& ystar);
/// Columns iter,rms,wiggle.
void write_run_summary_csv(std::ostream& out, const IlcRunRecord& record,
                           const Trajectory& ystar, Index wiggle_window);

}  // namespace ilcfr
