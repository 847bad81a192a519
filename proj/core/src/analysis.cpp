#include "ilcfr/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "ilcfr/error.hpp"

namespace ilcfr {

Eigen::VectorXd StabilityReport::first_six() const {
  return sigma.head(std::min<Index>(6, sigma.size()));
}

Eigen::VectorXd StabilityReport::last_six() const {
  return sigma.tail(std::min<Index>(6, sigma.size()));
}

namespace {

std::string table_number(double v) {
  if (v == 0.0) return "0";
  if (std::abs(v) >= 1e-3) return fmt::format("{:.4f}", v);
  return fmt::format("{:.4e}", v);
}

}  // namespace

std::string StabilityReport::format_table(std::string_view title) const {
  std::string out = fmt::format("First and last six singular values of ({})\n", title);
  const Index n = sigma.size();
  auto row = [&](Index begin, Index count) {
    std::string order = "Order          ";
    std::string value = "Singular value ";
    for (Index k = begin; k < begin + count; ++k) {
      order += fmt::format(" {:>11}", fmt::format("s{}", k + 1));
      value += fmt::format(" {:>11}", table_number(sigma(k)));
    }
    out += order + "\n" + value + "\n";
  };
  row(0, std::min<Index>(6, n));
  if (n > 6) row(std::max<Index>(6, n - 6), n - std::max<Index>(6, n - 6));
  out += fmt::format("spectral radius {}  sigma_max<1: {}  rho<1: {}\n", table_number(rho),
                     monotonic_ok ? "yes" : "no", convergent_ok ? "yes" : "no");
  return out;
}

StabilityReport stability_report(const IterationMatrix& E) {
  StabilityReport r;
  r.sigma = E.sigma;
  r.rho = E.rho;
  r.monotonic_ok = r.sigma_max() < 1.0;
  r.convergent_ok = r.rho < 1.0;
  return r;
}

std::vector<DeviationPoint> freq_deviation_sweep(const Eigen::Ref<const Eigen::MatrixXd>& M,
                                                 const DiscreteStateSpace& ss,
                                                 std::span<const double> omegas,
                                                 ProbeWave wave, Index eval_count) {
  const Index rows = eval_count > 0 ? std::min(eval_count, M.rows()) : M.rows();
  const Index cols = M.cols();
  std::vector<DeviationPoint> out;
  out.reserve(omegas.size());
  Eigen::VectorXd u(cols);
  for (double omega : omegas) {
    const FreqSample g = freq_response(ss, omega);
    for (Index k = 0; k < cols; ++k) {
      const double arg = omega * static_cast<double>(k) * ss.T;
      u(k) = wave == ProbeWave::sine ? std::sin(arg) : std::cos(arg);
    }
    const Eigen::VectorXd y = M.topRows(rows) * u;
    double acc = 0.0;
    for (Index r = 0; r < rows; ++r) {
      const double arg = omega * static_cast<double>(r + 1) * ss.T + g.phase;
      const double yss =
          g.magnitude * (wave == ProbeWave::sine ? std::sin(arg) : std::cos(arg));
      acc += (y(r) - yss) * (y(r) - yss);
    }
    out.push_back({omega, std::sqrt(acc / static_cast<double>(rows))});
  }
  return out;
}

std::string_view to_string(PlantParameter p) {
  switch (p) {
    case PlantParameter::a: return "a";
    case PlantParameter::omega0: return "omega0";
    case PlantParameter::xi: return "xi";
  }
  return "unknown";
}

std::optional<PlantParameter> parse_plant_parameter(std::string_view s) {
  for (PlantParameter p : {PlantParameter::a, PlantParameter::omega0, PlantParameter::xi})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

SweepPoint evaluate_plant(const SweepSetup& setup, const IlcLaw& law, PlantParameter param,
                          double percent) {
  BenchmarkParams p = setup.nominal;
  const double scale = percent / 100.0;
  switch (param) {
    case PlantParameter::a: p.a *= scale; break;
    case PlantParameter::omega0: p.omega0 *= scale; break;
    case PlantParameter::xi: p.xi *= scale; break;
  }
  const DiscreteStateSpace ss = zoh_discretize(build_benchmark(p), setup.T);
  const LiftedMatrix P = toeplitz_matrix(markov_parameters(ss, setup.N));
  const IterationMatrix E = iteration_matrix(P, law);
  return {E.sigma(0), E.rho};
}

namespace {

// Bisection on the percentage between a bracketing pair.
double refine_crossing(const SweepSetup& setup, const IlcLaw& law, PlantParameter param,
                       double lo, double hi, bool use_sigma, bool lo_below) {
  while (hi - lo > setup.resolution) {
    const double mid = 0.5 * (lo + hi);
    const SweepPoint pt = evaluate_plant(setup, law, param, mid);
    const bool below = (use_sigma ? pt.sigma_max : pt.rho) < 1.0;
    if (below == lo_below)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<Crossing> find_crossings(const SweepSetup& setup, const IlcLaw& law,
                                     PlantParameter param, const std::vector<double>& grid,
                                     const std::vector<double>& metric, bool use_sigma) {
  std::vector<Crossing> out;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const bool before = metric[k - 1] < 1.0;
    const bool after = metric[k] < 1.0;
    if (before == after) continue;
    out.push_back({refine_crossing(setup, law, param, grid[k - 1], grid[k], use_sigma, before),
                   !before && after});
  }
  return out;
}

}  // namespace

RobustnessCurve robustness_sweep(const SweepSetup& setup, const IlcLaw& law,
                                 PlantParameter param, std::span<const double> grid) {
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1]))
      fail(ErrorCode::invalid_parameter, "sweep grid must be strictly increasing");
  for (double g : grid)
    if (!(g > 0.0)) fail(ErrorCode::invalid_parameter, "sweep percentages must be > 0");

  RobustnessCurve c;
  c.param = param;
  c.percent.assign(grid.begin(), grid.end());
  c.sigma_max.resize(grid.size());
  c.rho.resize(grid.size());

  // Points are independent; results land in their grid slot.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < grid.size(); k = next++) {
      const SweepPoint pt = evaluate_plant(setup, law, param, grid[k]);
      c.sigma_max[k] = pt.sigma_max;
      c.rho[k] = pt.rho;
    }
  };
  const int jobs = std::max(1, std::min<int>(setup.jobs, static_cast<int>(grid.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  c.sigma_crossings = find_crossings(setup, law, param, c.percent, c.sigma_max, true);
  c.rho_crossings = find_crossings(setup, law, param, c.percent, c.rho, false);
  return c;
}

std::string describe_region(const std::vector<Crossing>& crossings, bool below_at_start) {
  if (crossings.empty()) return below_at_start ? "all" : "none";
  std::vector<std::string> parts;
  bool inside = below_at_start;
  double lower = -1.0;
  for (const Crossing& c : crossings) {
    if (c.entering) {
      lower = c.percent;
      inside = true;
    } else {
      if (lower >= 0.0)
        parts.push_back(fmt::format(">{:.0f}% and <{:.0f}%", lower, c.percent));
      else
        parts.push_back(fmt::format("<{:.0f}%", c.percent));
      lower = -1.0;
      inside = false;
    }
  }
  if (inside && lower >= 0.0) parts.push_back(fmt::format(">{:.0f}%", lower));
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? "; " : "") + parts[k];
  return out;
}

std::vector<double> percent_grid(double first, double last, double step) {
  if (!(step > 0.0) || !(last >= first))
    fail(ErrorCode::invalid_parameter, "percent grid needs step > 0 and last >= first");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((last - first) / step + 1e-9));
  for (long k = 0; k <= count; ++k) out.push_back(first + static_cast<double>(k) * step);
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const RobustnessCurve> curves) {
  out << "param,percent,sigma_max,rho\n";
  for (const RobustnessCurve& c : curves)
    for (std::size_t k = 0; k < c.percent.size(); ++k)
      out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", to_string(c.param), c.percent[k],
                         c.sigma_max[k], c.rho[k]);
}

}  // namespace ilcfr
