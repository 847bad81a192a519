#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ilcfr/analysis.hpp"
#include "ilcfr/engine.hpp"
#include "ilcfr/law.hpp"
#include "ilcfr/tuner.hpp"

namespace ilcfr::cli {

/// A corner-relative block; resolved against the learning matrix size.
struct BlockSpec {
  enum class Anchor { upper_left, upper_right, lower_left, lower_right, explicit_rect };
  Anchor anchor = Anchor::upper_left;
  Index height = 0;
  Index width = 0;
  BlockRect rect;  // explicit_rect only

  BlockRect resolve(Index rows, Index cols) const;
  std::string to_string() const;
};

struct PlantConfig {
  BenchmarkParams params;
  double sample_rate = 100.0;  // Hz
  Index N = 101;
  Index skip = 1;

  double T() const { return 1.0 / sample_rate; }
};

struct LawConfig {
  std::vector<LawVariant> approaches{LawVariant::fir_banded};
  Index extended_factor = 10;
  /// Extended circulant: keep the leading N x N block of the inverse (true)
  /// or analyse the full extended system (false).
  bool reduce = true;
};

struct FirConfig {
  std::optional<Index> m;  // 1-based center tap; default ceil(n/2) + 1
  std::optional<Index> n;  // taps; default N
  int grid_first_deg = 0;
  int grid_last_deg = 179;
};

struct TuneConfig {
  bool enabled = false;
  double target = 0.55;
  StepRule rule = StepRule::line_search;
  int max_iters = 5000;
  double step_init = 1e-2;
  double shrink = 0.5;
  double grad_tol = 1e-10;
  double landing_tol = 1e-3;
  std::uint64_t seed = 1;
  std::map<LawVariant, std::vector<BlockSpec>> blocks;
};

struct TrajectoryConfig {
  bool enabled = false;
  std::string kind = "quintic";  // quintic | raised_cos_sq | sine
  double omega = 0.0;
  InitialInput u0 = InitialInput::desired;
  int iterations = 10;
  Index wiggle_window = 10;
};

struct SweepConfig {
  bool enabled = false;
  std::vector<PlantParameter> params{PlantParameter::a, PlantParameter::omega0,
                                     PlantParameter::xi};
  double first = 1.0;
  double last = 300.0;
  double step = 1.0;
  double resolution = 0.5;
};

struct DeviationConfig {
  bool enabled = false;
  Index samples = 100;  // length of the probe signal / matrix size
  Index factor = 10;    // extended circulant size multiplier
  double omega_min = 0.0;
  double omega_max = 0.0;  // 0 means Nyquist
  int points = 500;
};

struct ExperimentConfig {
  std::string name = "experiment";
  PlantConfig plant;
  LawConfig law;
  FirConfig fir;
  TuneConfig tune;
  TrajectoryConfig trajectory;
  SweepConfig sweep;
  DeviationConfig deviation;
};

/// Parses the INI-style experiment format. Unknown sections/keys and bad
/// values throw Error(config_error) naming the source, line or field.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical, fully-resolved text of a config (parses back to the same config).
std::string render_config(const ExperimentConfig& cfg);

}  // namespace ilcfr::cli
