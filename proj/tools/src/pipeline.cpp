#include "ilcfr_cli/pipeline.hpp"

#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ilcfr/error.hpp"

namespace ilcfr::cli {
namespace fs = std::filesystem;

namespace {

std::ostream& null_stream() {
  static std::ostream sink(nullptr);
  return sink;
}

std::ostream& log_of(const RunOptions& opt) { return opt.log ? *opt.log : null_stream(); }

std::string file_tag(const DesignedLaw& law) {
  return std::string(to_string(law.variant)) + (law.tuned ? "_tuned" : "");
}

void write_sigma_csv(std::ostream& out, const StabilityReport& r) {
  out << fmt::format("# rho,{:.17g}\n", r.rho);
  out << "index,sigma\n";
  for (Index k = 0; k < r.sigma.size(); ++k) out << fmt::format("{},{:.17g}\n", k + 1, r.sigma(k));
}

bool unreduced_extended(const ExperimentConfig& cfg, LawVariant v) {
  return v == LawVariant::circulant_extended && !cfg.law.reduce;
}

/// Laws used by simulate and sweep: tuned when the config has a [tune] section.
std::vector<DesignedLaw> prepared_laws(const ExperimentConfig& cfg, std::ostream& log) {
  std::vector<DesignedLaw> laws;
  for (LawVariant v : cfg.law.approaches) {
    DesignedLaw law = design_law(cfg, v);
    if (cfg.tune.enabled) {
      TuneResult r = tune_law(cfg, law);
      fmt::print(log, "tuned {}: sigma_max {:.4f} after {} steps\n", law.symbol,
                 r.trace.back().sigma_max, r.trace.size() - 1);
    }
    laws.push_back(std::move(law));
  }
  return laws;
}

}  // namespace

Plant make_plant(const PlantConfig& cfg, Index N) {
  Plant p{zoh_discretize(build_benchmark(cfg.params), cfg.T()), {}, {}};
  p.P = toeplitz_matrix(markov_parameters(p.ss, N));
  p.P1 = p.P.data.bottomRows(N - cfg.skip);
  return p;
}

DesignedLaw design_law(const ExperimentConfig& cfg, LawVariant variant) {
  const PlantConfig& pc = cfg.plant;
  const Index N = pc.N;
  const Index skip = pc.skip;
  DesignedLaw out;
  out.variant = variant;
  const Index length = unreduced_extended(cfg, variant) ? N * cfg.law.extended_factor : N;
  const Plant plant = make_plant(pc, length);
  out.P1 = plant.P1;

  switch (variant) {
    case LawVariant::fir_banded: {
      const Index n = cfg.fir.n.value_or(N);
      const Index m = cfg.fir.m.value_or(default_center(n));
      const auto grid = freq_grid_degrees(plant.ss, cfg.fir.grid_first_deg, cfg.fir.grid_last_deg);
      FirDesign d = design_fir(grid, m, n, pc.T());
      out.law = build_fir_law(fir_to_learning_matrix(d.filter, N), skip, variant);
      out.fir = std::move(d);
      out.symbol = "F1";
      break;
    }
    case LawVariant::fir_full: {
      const auto grid = freq_grid_degrees(plant.ss, cfg.fir.grid_first_deg, cfg.fir.grid_last_deg);
      FullMatrixDesign d = design_full_matrix(grid, N, pc.T());
      out.law = build_fir_law(d.matrix, skip, variant);
      out.fir = std::move(d.design);
      out.symbol = "Ff1";
      break;
    }
    case LawVariant::circulant:
      out.law = build_circulant_law(circulant_matrix(markov_parameters(plant.ss, N)), skip);
      out.symbol = "Pc1^-1";
      break;
    case LawVariant::circulant_extended: {
      const LiftedMatrix Pec = extended_circulant(plant.ss, N, cfg.law.extended_factor);
      out.law = build_circulant_law(Pec, skip, cfg.law.reduce ? N : 0);
      out.symbol = "Pec1^-1";
      if (!cfg.law.reduce) out.lhs = "Pe1";
      break;
    }
  }
  return out;
}

TuneSpec make_tune_spec(const ExperimentConfig& cfg, LawVariant variant, Index rows, Index cols) {
  TuneSpec spec;
  spec.target_sigma = cfg.tune.target;
  spec.rule = cfg.tune.rule;
  spec.max_iters = cfg.tune.max_iters;
  spec.step_init = cfg.tune.step_init;
  spec.shrink = cfg.tune.shrink;
  spec.grad_tol = cfg.tune.grad_tol;
  spec.landing_tol = cfg.tune.landing_tol;
  spec.seed = cfg.tune.seed;
  auto it = cfg.tune.blocks.find(variant);
  if (it == cfg.tune.blocks.end())
    fail(ErrorCode::config_error,
         fmt::format("[tune] has no blocks_{}", to_string(variant)));
  for (const BlockSpec& b : it->second) {
    const BlockRect r = b.resolve(rows, cols);
    if (r.row_begin < 0 || r.col_begin < 0 || r.row_end > rows || r.col_end > cols)
      fail(ErrorCode::config_error,
           fmt::format("[tune] block '{}' does not fit a {}x{} learning matrix", b.to_string(),
                       rows, cols));
    spec.blocks.push_back(r);
  }
  return spec;
}

TuneResult tune_law(const ExperimentConfig& cfg, DesignedLaw& law) {
  const TuneSpec spec =
      make_tune_spec(cfg, law.variant, law.law.L.rows(), law.law.L.cols());
  TuneResult r = steepest_descent_tune(law.P1, law.law, spec);
  law.law = r.law;
  law.tuned = true;
  switch (law.variant) {
    case LawVariant::fir_banded: law.symbol = "F_o1"; break;
    case LawVariant::fir_full: law.symbol = "Ff_o1"; break;
    case LawVariant::circulant: law.symbol = "P_oc1^-1"; break;
    case LawVariant::circulant_extended: law.symbol = "P_oec1^-1"; break;
  }
  return r;
}

ArtifactWriter::ArtifactWriter(const ExperimentConfig& cfg, fs::path dir) : dir_(std::move(dir)) {
  std::istringstream text(render_config(cfg));
  std::string line;
  while (std::getline(text, line))
    if (!line.empty()) header_ += "# " + line + "\n";
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + dir_.string() + ": " + ec.message());
}

std::ofstream ArtifactWriter::open(const std::string& file) const {
  std::ofstream out(dir_ / file, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + (dir_ / file).string());
  out << header_;
  return out;
}

std::vector<DesignResult> cmd_design(const ExperimentConfig& cfg, const RunOptions& opt) {
  ArtifactWriter w(cfg, opt.out_dir);
  std::ostream& log = log_of(opt);
  std::vector<DesignResult> results;
  for (LawVariant v : cfg.law.approaches) {
    DesignedLaw law = design_law(cfg, v);
    StabilityReport report = stability_report(iteration_matrix(law.P1, law.law.L));
    const std::string tag = cfg.name + "_" + file_tag(law);
    {
      auto out = w.open(tag + "_law.csv");
      write_law_csv(out, law.law);
    }
    {
      auto out = w.open(tag + "_sigma.csv");
      write_sigma_csv(out, report);
    }
    if (law.fir) {
      auto out = w.open(tag + "_fir.csv");
      write_fir_csv(out, law.fir->filter);
      fmt::print(log, "FIR fit: {} taps, center {}, max |1 - GF| {:.3e}, condition {:.3e}{}\n",
                 law.fir->filter.size(), law.fir->filter.center(),
                 *std::max_element(law.fir->report.residuals.begin(),
                                   law.fir->report.residuals.end()),
                 law.fir->report.condition, law.fir->report.used_fallback ? " (QR)" : "");
    }
    fmt::print(log, "{}\n", report.format_table(law.title()));
    results.push_back({std::move(law), std::move(report)});
  }
  return results;
}

std::vector<TuneOutcome> cmd_tune(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!cfg.tune.enabled) fail(ErrorCode::config_error, "tune needs a [tune] section");
  ArtifactWriter w(cfg, opt.out_dir);
  std::ostream& log = log_of(opt);
  std::vector<TuneOutcome> results;
  for (LawVariant v : cfg.law.approaches) {
    DesignedLaw law = design_law(cfg, v);
    TuneResult r = tune_law(cfg, law);
    StabilityReport report = stability_report(iteration_matrix(law.P1, law.law.L));
    const std::string tag = cfg.name + "_" + file_tag(law);
    {
      auto out = w.open(tag + "_law.csv");
      write_law_csv(out, law.law);
    }
    {
      auto out = w.open(tag + "_trace.csv");
      write_trace_csv(out, r.trace);
    }
    {
      auto out = w.open(tag + "_sigma.csv");
      write_sigma_csv(out, report);
    }
    fmt::print(log, "{}: {} steps, {}{}\n", law.symbol, r.trace.size() - 1,
               r.converged ? "reached target" : "stopped before target",
               r.jitter_retries ? fmt::format(", {} jitter retries", r.jitter_retries) : "");
    fmt::print(log, "{}\n", report.format_table(law.title()));
    results.push_back({std::move(law), std::move(r), std::move(report)});
  }
  return results;
}

Trajectory make_trajectory(const TrajectoryConfig& cfg, double T, Index N) {
  if (cfg.kind == "quintic") return gen_quintic(T, N);
  if (cfg.kind == "raised_cos_sq") return gen_raised_cos_sq(cfg.omega, T, N);
  if (cfg.kind == "sine") return gen_sine(cfg.omega, T, N);
  fail(ErrorCode::config_error, "unknown trajectory kind '" + cfg.kind + "'");
}

std::vector<SimulationOutcome> cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!cfg.trajectory.enabled) fail(ErrorCode::config_error, "simulate needs a [trajectory] section");
  ArtifactWriter w(cfg, opt.out_dir);
  std::ostream& log = log_of(opt);
  std::vector<SimulationOutcome> results;
  for (DesignedLaw& law : prepared_laws(cfg, log)) {
    const Index N = law.law.trajectory_length();
    const Plant plant = make_plant(cfg.plant, 1);
    Trajectory ystar = make_trajectory(cfg.trajectory, cfg.plant.T(), N);
    IlcRunRecord rec = run_ilc(plant.ss, law.law, ystar, cfg.trajectory.iterations,
                               cfg.trajectory.u0);
    const std::string tag = cfg.name + "_" + file_tag(law);
    {
      auto out = w.open(tag + "_run.csv");
      write_run_csv(out, rec, ystar);
    }
    {
      auto out = w.open(tag + "_summary.csv");
      write_run_summary_csv(out, rec, ystar, cfg.trajectory.wiggle_window);
    }
    fmt::print(log, "L = {}: rms by iteration\n", law.symbol);
    const auto rms = rec.rms();
    for (std::size_t j = 0; j < rms.size(); ++j)
      fmt::print(log, "  {:>4}  {:.4e}  wiggle {:.4e}\n", j, rms[j],
                 wiggle_metric(rec, static_cast<int>(j), cfg.trajectory.wiggle_window));
    if (rec.diverged_at) fmt::print(log, "  diverged at iteration {}\n", *rec.diverged_at);
    results.push_back({std::move(law), std::move(ystar), std::move(rec)});
  }
  return results;
}

std::vector<DeviationCurve> deviation_curves(const ExperimentConfig& cfg) {
  const DeviationConfig& d = cfg.deviation;
  const double T = cfg.plant.T();
  const Index N = d.samples;
  const auto ss = zoh_discretize(build_benchmark(cfg.plant.params), T);
  const auto h = markov_parameters(ss, N);
  const LiftedMatrix P = toeplitz_matrix(h);
  const LiftedMatrix Pc = circulant_matrix(h);
  const LiftedMatrix Pec = extended_circulant(ss, N, d.factor);

  const double hi = d.omega_max > 0.0 ? d.omega_max : std::numbers::pi / T;
  std::vector<double> omegas(static_cast<std::size_t>(d.points));
  for (int k = 0; k < d.points; ++k)
    omegas[k] = d.points == 1 ? d.omega_min : d.omega_min + (hi - d.omega_min) * k / (d.points - 1);

  std::vector<DeviationCurve> curves;
  for (ProbeWave wave : {ProbeWave::sine, ProbeWave::cosine}) {
    curves.push_back({"P", wave, freq_deviation_sweep(P.data, ss, omegas, wave)});
    curves.push_back({"Pc", wave, freq_deviation_sweep(Pc.data, ss, omegas, wave)});
    curves.push_back({"Pec", wave, freq_deviation_sweep(Pec.data, ss, omegas, wave, N)});
  }
  return curves;
}

SweepResult cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!cfg.sweep.enabled && !cfg.deviation.enabled)
    fail(ErrorCode::config_error, "sweep needs a [sweep] or [deviation] section");
  ArtifactWriter w(cfg, opt.out_dir);
  std::ostream& log = log_of(opt);
  SweepResult result;

  if (cfg.sweep.enabled) {
    const auto grid = percent_grid(cfg.sweep.first, cfg.sweep.last, cfg.sweep.step);
    auto thresholds = w.open(cfg.name + "_thresholds.csv");
    thresholds << "law,param,metric,region\n";
    for (DesignedLaw& law : prepared_laws(cfg, log)) {
      SweepSetup setup;
      setup.nominal = cfg.plant.params;
      setup.T = cfg.plant.T();
      setup.N = law.law.trajectory_length();
      setup.jobs = std::max(1, opt.jobs);
      setup.resolution = cfg.sweep.resolution;
      SweepOutcome o{std::move(law), {}};
      for (PlantParameter p : cfg.sweep.params) {
        RobustnessCurve c = robustness_sweep(setup, o.law.law, p, grid);
        const std::string sr = describe_region(c.sigma_crossings, c.sigma_max.front() < 1.0);
        const std::string rr = describe_region(c.rho_crossings, c.rho.front() < 1.0);
        fmt::print(log, "L = {:<9} {:<7} sigma_max<1: {:<18} rho<1: {}\n", o.law.symbol,
                   to_string(p), sr, rr);
        thresholds << fmt::format("{},{},sigma_max,{}\n", o.law.symbol, to_string(p), sr)
                   << fmt::format("{},{},rho,{}\n", o.law.symbol, to_string(p), rr);
        o.curves.push_back(std::move(c));
      }
      auto out = w.open(cfg.name + "_" + file_tag(o.law) + "_sweep.csv");
      write_sweep_csv(out, o.curves);
      result.robustness.push_back(std::move(o));
    }
  }

  if (cfg.deviation.enabled) {
    result.deviation = deviation_curves(cfg);
    auto out = w.open(cfg.name + "_deviation.csv");
    out << "matrix,wave,omega,rms\n";
    for (const DeviationCurve& c : result.deviation) {
      double worst = 0.0;
      for (const DeviationPoint& p : c.points) {
        out << fmt::format("{},{},{:.17g},{:.17g}\n", c.matrix,
                           c.wave == ProbeWave::sine ? "sin" : "cos", p.omega, p.rms);
        worst = std::max(worst, p.rms);
      }
      fmt::print(log, "deviation {:<3} {}: max rms {:.4e}\n", c.matrix,
                 c.wave == ProbeWave::sine ? "sin" : "cos", worst);
    }
  }
  return result;
}

}  // namespace ilcfr::cli
