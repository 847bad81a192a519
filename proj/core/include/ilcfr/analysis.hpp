#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ilcfr/law.hpp"
#include "ilcfr/lifted.hpp"
#include "ilcfr/lti.hpp"

namespace ilcfr {

struct StabilityReport {
  Eigen::VectorXd sigma;  // descending
  double rho = 0.0;
  bool monotonic_ok = false;   // sigma_max < 1
  bool convergent_ok = false;  // rho < 1

  double sigma_max() const { return sigma.size() ? sigma(0) : 0.0; }
  Eigen::VectorXd first_six() const;
  Eigen::VectorXd last_six() const;
  /// Two-row "first and last six singular values" table.
  std::string format_table(std::string_view title) const;
};

StabilityReport stability_report(const IterationMatrix& E);

enum class ProbeWave { sine, cosine };

struct DeviationPoint {
  double omega = 0.0;
  double rms = 0.0;
};

/**
 * Feeds u(k) = sin(omega k T) (or cos), k = 0..M.cols()-1, through M and
 * compares y(k), k = 1..eval_count, against the steady-state response
 * M_G sin(omega k T + theta_G). eval_count = 0 means every row of M.
 */
std::vector<DeviationPoint> freq_deviation_sweep(const Eigen::Ref<const Eigen::MatrixXd>& M,
                                                 const DiscreteStateSpace& ss,
                                                 std::span<const double> omegas,
                                                 ProbeWave wave, Index eval_count = 0);

enum class PlantParameter { a, omega0, xi };

std::string_view to_string(PlantParameter p);
std::optional<PlantParameter> parse_plant_parameter(std::string_view s);

/// Where a metric crosses 1 between two grid points. `entering` means the
/// metric drops below 1 as the percentage increases.
struct Crossing {
  double percent = 0.0;
  bool entering = false;
};

struct RobustnessCurve {
  PlantParameter param = PlantParameter::a;
  std::vector<double> percent;
  std::vector<double> sigma_max;
  std::vector<double> rho;
  std::vector<Crossing> sigma_crossings;
  std::vector<Crossing> rho_crossings;
};

struct SweepSetup {
  BenchmarkParams nominal;
  double T = 0.02;
  Index N = 51;
  int jobs = 1;
  double resolution = 0.5;  // bisection stops below this many percent
};

/// Scales one benchmark parameter, holds the law fixed, and tracks
/// sigma_max and rho of I - P_1 L over the grid (percent of nominal).
RobustnessCurve robustness_sweep(const SweepSetup& setup, const IlcLaw& law,
                                 PlantParameter param, std::span<const double> grid);

/// Both metrics at a single plant.
struct SweepPoint {
  double sigma_max = 0.0;
  double rho = 0.0;
};
SweepPoint evaluate_plant(const SweepSetup& setup, const IlcLaw& law, PlantParameter param,
                          double percent);

/// "<159%", "> 47% and <119%", ">51%", "all" or "none".
std::string describe_region(const std::vector<Crossing>& crossings, bool below_at_start);

std::vector<double> percent_grid(double first, double last, double step);

void write_sweep_csv(std::ostream& out, std::span<const RobustnessCurve> curves);

}  // namespace ilcfr
