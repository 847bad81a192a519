#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ilcfr_cli/pipeline.hpp"

namespace ilcfr::cli {

/// Experiment configs compiled into the binary from configs/*.cfg.
struct EmbeddedConfig {
  std::string_view name;  // file stem, e.g. "table1"
  std::string_view text;
};

std::span<const EmbeddedConfig> embedded_configs();
ExperimentConfig embedded_config(std::string_view name);

struct Check {
  std::string stage;
  std::string quantity;
  std::string expected;
  std::string achieved;
  std::string tolerance;
  bool pass = false;
};

struct Manifest {
  std::vector<Check> checks;
  bool all_pass() const;
  void write_csv(std::ostream& out) const;
};

/// Runs every pinned experiment into opt.out_dir/<stage>/ and compares the
/// results against the reference values. Writes opt.out_dir/manifest.csv.
Manifest cmd_reproduce_all(const RunOptions& opt);

}  // namespace ilcfr::cli
