#include "ilcfr_cli/reproduce.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ilcfr/error.hpp"

namespace ilcfr::cli {

ExperimentConfig embedded_config(std::string_view name) {
  for (const EmbeddedConfig& c : embedded_configs())
    if (c.name == name) {
      std::istringstream in{std::string(c.text)};
      return parse_config(in, std::string(name) + ".cfg");
    }
  fail(ErrorCode::config_error, fmt::format("no built-in config named '{}'", name));
}

bool Manifest::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void Manifest::write_csv(std::ostream& out) const {
  auto cell = [](std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
  };
  out << "stage,check,expected,achieved,tolerance,status\n";
  for (const Check& c : checks)
    out << fmt::format("{},{},{},{},{},{}\n", cell(c.stage), cell(c.quantity), cell(c.expected),
                       cell(c.achieved), cell(c.tolerance), c.pass ? "PASS" : "FAIL");
}

namespace {

std::string num(double v) { return fmt::format("{:.6g}", v); }

Check relative(std::string stage, std::string what, double expected, double achieved, double rel) {
  return {std::move(stage), std::move(what), num(expected), num(achieved),
          fmt::format("{:g}% rel", rel * 100.0),
          std::abs(achieved - expected) <= rel * std::abs(expected)};
}

Check at_most(std::string stage, std::string what, double bound, double achieved) {
  return {std::move(stage), std::move(what), fmt::format("<= {:g}", bound), num(achieved), "bound",
          achieved <= bound};
}

Check within(std::string stage, std::string what, double lo, double hi, double achieved) {
  return {std::move(stage), std::move(what), fmt::format("[{:g}; {:g}]", lo, hi), num(achieved),
          "band", achieved >= lo && achieved <= hi};
}

Check holds(std::string stage, std::string what, std::string expected, std::string achieved,
            bool pass) {
  return {std::move(stage), std::move(what), std::move(expected), std::move(achieved), "exact",
          pass};
}

struct ExpectedRegion {
  LawVariant law;
  PlantParameter param;
  bool sigma;  // false: spectral radius
  std::string text;
  std::vector<Crossing> crossings;
};

const std::vector<ExpectedRegion>& expected_regions() {
  using P = PlantParameter;
  using L = LawVariant;
  static const std::vector<ExpectedRegion> table = {
      {L::circulant, P::a, true, "<143%", {{143, false}}},
      {L::circulant, P::omega0, true, ">47% and <119%", {{47, true}, {119, false}}},
      {L::circulant, P::xi, true, ">51%", {{51, true}}},
      {L::fir_banded, P::a, true, "<159%", {{159, false}}},
      {L::fir_banded, P::omega0, true, ">52% and <130%", {{52, true}, {130, false}}},
      {L::fir_banded, P::xi, true, ">52%", {{52, true}}},
      {L::circulant, P::a, false, "<187%", {{187, false}}},
      {L::circulant, P::omega0, false, ">32% and <136%", {{32, true}, {136, false}}},
      {L::circulant, P::xi, false, ">48%", {{48, true}}},
      {L::fir_banded, P::a, false, "<176%", {{176, false}}},
      {L::fir_banded, P::omega0, false, "<136%", {{136, false}}},
      {L::fir_banded, P::xi, false, ">7%", {{7, true}}},
  };
  return table;
}

bool crossings_match(const std::vector<Crossing>& got, const std::vector<Crossing>& want,
                     double tol) {
  if (got.size() != want.size()) return false;
  for (std::size_t k = 0; k < got.size(); ++k)
    if (got[k].entering != want[k].entering || std::abs(got[k].percent - want[k].percent) > tol)
      return false;
  return true;
}

const DesignResult& find(const std::vector<DesignResult>& r, LawVariant v) {
  for (const auto& x : r)
    if (x.law.variant == v) return x;
  fail(ErrorCode::config_error, fmt::format("stage has no {} law", to_string(v)));
}

const TuneOutcome& find(const std::vector<TuneOutcome>& r, LawVariant v) {
  for (const auto& x : r)
    if (x.law.variant == v) return x;
  fail(ErrorCode::config_error, fmt::format("stage has no {} law", to_string(v)));
}

const SimulationOutcome& find(const std::vector<SimulationOutcome>& r, LawVariant v) {
  for (const auto& x : r)
    if (x.law.variant == v) return x;
  fail(ErrorCode::config_error, fmt::format("stage has no {} law", to_string(v)));
}

double sigma_at(const StabilityReport& r, Index k) { return k < r.sigma.size() ? r.sigma(k) : 0.0; }

/// Largest rms_j / rms_{j-1} for j >= 2, ignoring steps already at round-off.
double worst_decay_ratio(const std::vector<double>& rms) {
  double worst = 0.0;
  for (std::size_t j = 2; j < rms.size(); ++j) {
    if (rms[j - 1] <= 1e-10 * rms[0]) break;
    worst = std::max(worst, rms[j] / rms[j - 1]);
  }
  return worst;
}

void design_stage(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt,
                  std::vector<Check>& out) {
  const auto r = cmd_design(cfg, opt);
  if (name == "table1" || name == "table2") {
    const auto& d = find(r, name == "table1" ? LawVariant::fir_banded : LawVariant::fir_full);
    out.push_back(relative(name, "sigma1", 17.9361, sigma_at(d.report, 0), 0.01));
    out.push_back(at_most(name, "sigma2", 1e-8, sigma_at(d.report, 1)));
  } else if (name == "table3") {
    const auto& d = find(r, LawVariant::circulant);
    out.push_back(relative(name, "sigma1", 84.2474, sigma_at(d.report, 0), 0.01));
    out.push_back(relative(name, "sigma2", 1.7244, sigma_at(d.report, 1), 0.02));
    out.push_back(relative(name, "sigma3", 0.2341, sigma_at(d.report, 2), 0.05));
  } else if (name == "table4") {
    const auto& d = find(r, LawVariant::circulant_extended);
    out.push_back(holds(name, "dimension", "1009", std::to_string(d.report.sigma.size()),
                        d.report.sigma.size() == 1009));
    out.push_back(relative(name, "sigma1", 85.2206, sigma_at(d.report, 0), 0.01));
    out.push_back(relative(name, "sigma2", 1.7435, sigma_at(d.report, 1), 0.02));
    out.push_back(relative(name, "sigma3", 0.2388, sigma_at(d.report, 2), 0.05));
    out.push_back(at_most(name, "sigma4", 1e-10, sigma_at(d.report, 3)));
  } else if (name == "fir12") {
    const auto& d = find(r, LawVariant::fir_banded);
    const auto& res = d.law.fir->report.residuals;
    out.push_back(at_most(name, "max |1 - GF|", 5e-3, *std::max_element(res.begin(), res.end())));
  }
}

void tune_stage(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt,
                std::vector<Check>& out) {
  const auto r = cmd_tune(cfg, opt);
  struct Row {
    LawVariant law;
    double sigma2;
  };
  double lo = 0.545, hi = 0.555;
  std::vector<Row> rows;
  if (name == "table5") rows = {{LawVariant::fir_banded, 0.3080}};
  if (name == "table6") rows = {{LawVariant::circulant, 0.3291}};
  if (name == "table7") rows = {{LawVariant::fir_banded, 0.1463}};
  if (name == "table8") rows = {{LawVariant::circulant, 0.9348}};
  if (name == "table7" || name == "table8") lo = 0.9527, hi = 0.9627;
  for (const Row& row : rows) {
    const auto& t = find(r, row.law);
    out.push_back(within(name, "sigma1", lo, hi, sigma_at(t.report, 0)));
    out.push_back(relative(name, "sigma2", row.sigma2, sigma_at(t.report, 1), 0.10));
  }
}

void simulate_stage(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt,
                    std::vector<Check>& out) {
  const auto r = cmd_simulate(cfg, opt);
  const auto& fir = find(r, LawVariant::fir_banded);
  const auto& circ = find(r, LawVariant::circulant);
  const auto rf = fir.record.rms();
  const auto rc = circ.record.rms();
  if (name == "fig3") {
    out.push_back(at_most(name, "F_o1 rms ratio after iteration 1", 0.55, worst_decay_ratio(rf)));
    out.push_back(at_most(name, "P_oc1^-1 rms ratio after iteration 1", 0.55, worst_decay_ratio(rc)));
    double spread = 1.0;
    for (std::size_t j = 0; j < std::min(rf.size(), rc.size()); ++j)
      spread = std::max(spread, std::max(rf[j], rc[j]) / std::min(rf[j], rc[j]));
    out.push_back(at_most(name, "max rms ratio between laws", 2.0, spread));
  } else if (name == "fig4") {
    const Index w = cfg.trajectory.wiggle_window;
    const double peak = fir.ystar.samples.cwiseAbs().maxCoeff();
    const double wf1 = wiggle_metric(fir.record, 1, w), wc1 = wiggle_metric(circ.record, 1, w);
    out.push_back(holds(name, "iteration 1 wiggle circulant > FIR", "true",
                        fmt::format("{} vs {}", num(wc1), num(wf1)), wc1 > wf1));
    out.push_back(at_most(name, "iteration 3 wiggle circulant / peak", 1e-2,
                          wiggle_metric(circ.record, 3, w) / peak));
    out.push_back(at_most(name, "iteration 3 wiggle FIR / peak", 1e-2,
                          wiggle_metric(fir.record, 3, w) / peak));
  } else if (name == "fig8") {
    out.push_back(holds(name, "iteration 1 rms circulant < FIR", "true",
                        fmt::format("{} vs {}", num(rc[1]), num(rf[1])), rc[1] < rf[1]));
    out.push_back(at_most(name, "F_o1 rms(60) / rms(0)", 1e-3, rf.at(60) / rf[0]));
  }
}

void sweep_stage(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt,
                 std::vector<Check>& out) {
  const auto r = cmd_sweep(cfg, opt);
  if (name == "fig1") {
    const Index N = cfg.deviation.samples;
    const double T = cfg.plant.T();
    const auto ss = zoh_discretize(build_benchmark(cfg.plant.params), T);
    const auto h = markov_parameters(ss, N);
    const LiftedMatrix Pc = circulant_matrix(h);
    const LiftedMatrix Pec = extended_circulant(ss, N, cfg.deviation.factor);
    std::vector<double> periodic, between;
    for (Index q = 0; q <= N / 2; ++q) {
      periodic.push_back(2.0 * std::numbers::pi * q / (N * T));
      if (2 * q + 1 <= N) between.push_back(2.0 * std::numbers::pi * (q + 0.5) / (N * T));
    }
    double worst = 0.0;
    for (ProbeWave wave : {ProbeWave::sine, ProbeWave::cosine})
      for (const auto& p : freq_deviation_sweep(Pc.data, ss, periodic, wave))
        worst = std::max(worst, p.rms);
    out.push_back(at_most(name, "Pc deviation at periodic frequencies", 1e-8, worst));
    const auto dc = freq_deviation_sweep(Pc.data, ss, between, ProbeWave::sine);
    const auto de = freq_deviation_sweep(Pec.data, ss, between, ProbeWave::sine, N);
    std::size_t below = 0;
    for (std::size_t k = 0; k < dc.size(); ++k) below += de[k].rms < dc[k].rms;
    out.push_back(holds(name, "Pec below Pc between periodic frequencies",
                        fmt::format("{}/{}", dc.size(), dc.size()),
                        fmt::format("{}/{}", below, dc.size()), below == dc.size()));
    return;
  }
  for (const ExpectedRegion& want : expected_regions()) {
    const SweepOutcome* law = nullptr;
    for (const auto& o : r.robustness)
      if (o.law.variant == want.law) law = &o;
    if (!law) fail(ErrorCode::config_error, "sweep stage is missing a law");
    for (const RobustnessCurve& c : law->curves) {
      if (c.param != want.param) continue;
      const auto& got = want.sigma ? c.sigma_crossings : c.rho_crossings;
      const bool below = want.sigma ? c.sigma_max.front() < 1.0 : c.rho.front() < 1.0;
      Check chk{name,
                fmt::format("{} {} {}", law->law.symbol, want.sigma ? "sigma_max" : "rho",
                            to_string(want.param)),
                want.text,
                describe_region(got, below),
                "5 pct points",
                crossings_match(got, want.crossings, 5.0)};
      out.push_back(std::move(chk));
    }
  }
}

}  // namespace

Manifest cmd_reproduce_all(const RunOptions& opt) {
  std::ostream& log = opt.log ? *opt.log : std::cout;
  Manifest manifest;
  struct Entry {
    const char* name;
    void (*run)(const std::string&, const ExperimentConfig&, const RunOptions&,
                std::vector<Check>&);
  };
  static const Entry stages[] = {
      {"table1", design_stage},     {"table2", design_stage},   {"table3", design_stage},
      {"table4", design_stage},     {"fir12", design_stage},    {"table5", tune_stage},
      {"table6", tune_stage},       {"table7", tune_stage},     {"table8", tune_stage},
      {"fig1", sweep_stage},        {"fig3", simulate_stage},   {"fig4", simulate_stage},
      {"fig8", simulate_stage},     {"tables9-10", sweep_stage},
  };
  for (const Entry& s : stages) {
    RunOptions sub = opt;
    sub.out_dir = opt.out_dir / s.name;
    std::ostringstream stage_log;
    sub.log = &stage_log;
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t before = manifest.checks.size();
    try {
      s.run(s.name, embedded_config(s.name), sub, manifest.checks);
    } catch (const std::exception& e) {
      manifest.checks.push_back({s.name, "stage completed", "no error", e.what(), "exact", false});
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print(log, "== {} ({:.1f} s)\n{}", s.name, secs, stage_log.str());
    for (std::size_t k = before; k < manifest.checks.size(); ++k) {
      const Check& c = manifest.checks[k];
      fmt::print(log, "{} {}: {} expected {} ({})\n", c.pass ? "PASS" : "FAIL", c.quantity,
                 c.achieved, c.expected, c.tolerance);
    }
    log << '\n';
  }
  std::filesystem::create_directories(opt.out_dir);
  std::ofstream out(opt.out_dir / "manifest.csv", std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write manifest.csv");
  manifest.write_csv(out);
  const auto failed = std::count_if(manifest.checks.begin(), manifest.checks.end(),
                                    [](const Check& c) { return !c.pass; });
  fmt::print(log, "{} of {} checks passed\n", manifest.checks.size() - failed,
             manifest.checks.size());
  return manifest;
}

}  // namespace ilcfr::cli
