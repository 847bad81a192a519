#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ilcfr/analysis.hpp"
#include "ilcfr/engine.hpp"
#include "ilcfr/fir.hpp"
#include "ilcfr/law.hpp"
#include "ilcfr/tuner.hpp"
#include "ilcfr_cli/config.hpp"

namespace ilcfr::cli {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  int jobs = 1;
  std::ostream* log = nullptr;
};

/// Discretized plant and its lifted Toeplitz matrix for one trajectory length.
struct Plant {
  DiscreteStateSpace ss;
  LiftedMatrix P;
  Eigen::MatrixXd P1;  // first `skip` rows removed
};

Plant make_plant(const PlantConfig& cfg, Index N);

struct DesignedLaw {
  LawVariant variant = LawVariant::fir_banded;
  std::string symbol;  // F1, Ff1, Pc1^-1, ...
  IlcLaw law;
  Eigen::MatrixXd P1;  // the row-deleted Toeplitz the law is analysed against
  std::optional<FirDesign> fir;
  bool tuned = false;

  std::string lhs = "P1";

  std::string title() const { return "I - " + lhs + "*" + symbol; }
};

DesignedLaw design_law(const ExperimentConfig& cfg, LawVariant variant);
TuneSpec make_tune_spec(const ExperimentConfig& cfg, LawVariant variant, Index rows,
                        Index cols);
/// Tunes in place (symbol becomes F_o1, P_oc1^-1, ...); returns the tuner result.
TuneResult tune_law(const ExperimentConfig& cfg, DesignedLaw& law);

/// Writes CSV artifacts prefixed with the resolved config as '#' lines.
class ArtifactWriter {
 public:
  ArtifactWriter(const ExperimentConfig& cfg, std::filesystem::path dir);
  std::ofstream open(const std::string& file) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::string header_;
  std::filesystem::path dir_;
};

struct DesignResult {
  DesignedLaw law;
  StabilityReport report;
};

struct TuneOutcome {
  DesignedLaw law;
  TuneResult result;
  StabilityReport report;
};

struct SimulationOutcome {
  DesignedLaw law;
  Trajectory ystar;
  IlcRunRecord record;
};

struct SweepOutcome {
  DesignedLaw law;
  std::vector<RobustnessCurve> curves;
};

struct DeviationCurve {
  std::string matrix;  // P, Pc, Pec
  ProbeWave wave = ProbeWave::sine;
  std::vector<DeviationPoint> points;
};

struct SweepResult {
  std::vector<SweepOutcome> robustness;
  std::vector<DeviationCurve> deviation;
};

std::vector<DesignResult> cmd_design(const ExperimentConfig& cfg, const RunOptions& opt);
std::vector<TuneOutcome> cmd_tune(const ExperimentConfig& cfg, const RunOptions& opt);
std::vector<SimulationOutcome> cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opt);
SweepResult cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt);

Trajectory make_trajectory(const TrajectoryConfig& cfg, double T, Index N);
std::vector<DeviationCurve> deviation_curves(const ExperimentConfig& cfg);

}  // namespace ilcfr::cli
