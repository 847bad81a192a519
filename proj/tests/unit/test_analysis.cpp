#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ilcfr/analysis.hpp"
#include "ilcfr/error.hpp"
#include "ilcfr/fir.hpp"
#include "ilcfr/law.hpp"
#include "ilcfr/lifted.hpp"
#include "ilcfr/tuner.hpp"

using namespace ilcfr;
using namespace ilcfr::testing;

namespace {

IlcLaw fir_law50() {
  const auto ss = benchmark_plant(0.02);
  const auto d = design_fir(freq_grid_degrees(ss), default_center(51), 51, 0.02);
  return build_fir_law(fir_to_learning_matrix(d.filter, 51), 1);
}

IlcLaw tuned_fir_law50() {
  const auto ss = benchmark_plant(0.02);
  const Eigen::MatrixXd P1 = toeplitz_matrix(markov_parameters(ss, 51)).data.bottomRows(50);
  TuneSpec spec;
  spec.blocks = {upper_left_block(2, 2)};
  return steepest_descent_tune(P1, fir_law50(), spec).law;
}

}  // namespace

TEST(Report, ZeroIterationMatrix) {
  IterationMatrix E;
  E.E = Eigen::MatrixXd::Zero(8, 8);
  E.sigma = Eigen::VectorXd::Zero(8);
  E.rho = 0.0;
  const StabilityReport r = stability_report(E);
  EXPECT_TRUE(r.monotonic_ok);
  EXPECT_TRUE(r.convergent_ok);
  EXPECT_EQ(r.sigma_max(), 0.0);
  EXPECT_EQ(r.first_six().size(), 6);
  EXPECT_EQ(r.last_six().size(), 6);
}

TEST(Report, TableLayout) {
  IterationMatrix E;
  E.sigma = Eigen::VectorXd::LinSpaced(10, 10.0, 1.0);
  E.sigma(9) = 2.5e-9;
  E.rho = 1.5;
  const std::string t = stability_report(E).format_table("I - P1*F1");
  EXPECT_NE(t.find("(I - P1*F1)"), std::string::npos);
  EXPECT_NE(t.find("s1"), std::string::npos);
  EXPECT_NE(t.find("s10"), std::string::npos);
  EXPECT_EQ(t.find("s11"), std::string::npos);
  EXPECT_NE(t.find("10.0000"), std::string::npos);
  EXPECT_NE(t.find("2.5000e-09"), std::string::npos);
  EXPECT_NE(t.find("rho<1: no"), std::string::npos);
  EXPECT_NE(t.find("sigma_max<1: no"), std::string::npos);
}

TEST(Report, ShortSpectrumHasOneRow) {
  IterationMatrix E;
  E.sigma = Eigen::VectorXd::Constant(3, 0.5);
  const std::string t = stability_report(E).format_table("x");
  EXPECT_EQ(t.find("s4"), std::string::npos);
}

TEST(Deviation, ToeplitzDeviatesAndExtendedBeatsCirculant) {
  const double T = 0.01;
  const Index N = 100;
  const auto ss = benchmark_plant(T);
  const auto h = markov_parameters(ss, N);
  const LiftedMatrix P = toeplitz_matrix(h);
  const LiftedMatrix Pc = circulant_matrix(h);
  const LiftedMatrix Pec = extended_circulant(ss, N, 10);

  std::vector<double> between;
  for (int q = 1; q < 20; ++q)
    between.push_back((q + 0.5) * 2.0 * std::numbers::pi / (static_cast<double>(N) * T));
  for (ProbeWave w : {ProbeWave::sine, ProbeWave::cosine}) {
    const auto dp = freq_deviation_sweep(P.data, ss, between, w);
    const auto dc = freq_deviation_sweep(Pc.data, ss, between, w);
    const auto de = freq_deviation_sweep(Pec.data, ss, between, w, N);
    for (std::size_t k = 0; k < between.size(); ++k) {
      EXPECT_GT(dp[k].rms, 0.0);
      EXPECT_LT(de[k].rms, dc[k].rms) << "omega=" << between[k];
      EXPECT_EQ(de[k].omega, between[k]);
    }
  }
}

TEST(Deviation, ExactSteadyStateGivesZero) {
  const double T = 0.01;
  const auto ss = benchmark_plant(T);
  const Index N = 50;
  const LiftedMatrix Pec = extended_circulant(ss, N, 40);
  const std::vector<double> w{2.0 * std::numbers::pi / (static_cast<double>(N) * T)};
  const auto d = freq_deviation_sweep(Pec.data, ss, w, ProbeWave::sine, N);
  EXPECT_LT(d[0].rms, 1e-12);
}

TEST(Sweep, ParameterNames) {
  for (PlantParameter p : {PlantParameter::a, PlantParameter::omega0, PlantParameter::xi})
    EXPECT_EQ(parse_plant_parameter(to_string(p)), p);
  EXPECT_FALSE(parse_plant_parameter("zeta"));
}

TEST(Sweep, NominalPointMatchesDirectEvaluation) {
  const IlcLaw law = fir_law50();
  const SweepSetup setup;
  const auto ss = benchmark_plant(0.02);
  const IterationMatrix E = iteration_matrix(toeplitz_matrix(markov_parameters(ss, 51)), law);
  for (PlantParameter p : {PlantParameter::a, PlantParameter::omega0, PlantParameter::xi}) {
    const SweepPoint pt = evaluate_plant(setup, law, p, 100.0);
    EXPECT_NEAR(pt.sigma_max, E.sigma(0), 1e-12);
    EXPECT_NEAR(pt.rho, E.rho, 1e-12);
  }
}

TEST(Sweep, RhoBoundedBySigmaAndRegionsNest) {
  const IlcLaw law = tuned_fir_law50();
  SweepSetup setup;
  const auto grid = percent_grid(10, 300, 10);
  for (PlantParameter p : {PlantParameter::a, PlantParameter::omega0, PlantParameter::xi}) {
    const RobustnessCurve c = robustness_sweep(setup, law, p, grid);
    ASSERT_EQ(c.percent.size(), grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      EXPECT_LE(c.rho[k], c.sigma_max[k] * (1 + 1e-9)) << to_string(p) << " " << grid[k];
      if (c.sigma_max[k] < 1.0) {
        EXPECT_LT(c.rho[k], 1.0);
      }
    }
  }
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  const IlcLaw law = fir_law50();
  SweepSetup one, three;
  three.jobs = 3;
  const auto grid = percent_grid(20, 200, 20);
  const RobustnessCurve a = robustness_sweep(one, law, PlantParameter::a, grid);
  const RobustnessCurve b = robustness_sweep(three, law, PlantParameter::a, grid);
  EXPECT_EQ(a.sigma_max, b.sigma_max);
  EXPECT_EQ(a.rho, b.rho);
  ASSERT_EQ(a.sigma_crossings.size(), b.sigma_crossings.size());
  for (std::size_t k = 0; k < a.sigma_crossings.size(); ++k)
    EXPECT_EQ(a.sigma_crossings[k].percent, b.sigma_crossings[k].percent);
}

TEST(Sweep, CrossingsAreBracketedAndRefined) {
  const IlcLaw law = tuned_fir_law50();
  SweepSetup setup;
  setup.resolution = 0.25;
  const auto grid = percent_grid(10, 300, 10);
  const RobustnessCurve c = robustness_sweep(setup, law, PlantParameter::a, grid);
  ASSERT_FALSE(c.sigma_crossings.empty());
  for (const Crossing& x : c.sigma_crossings) {
    const double below = evaluate_plant(setup, law, PlantParameter::a,
                                        x.entering ? x.percent + 0.25 : x.percent - 0.25)
                             .sigma_max;
    const double above = evaluate_plant(setup, law, PlantParameter::a,
                                        x.entering ? x.percent - 0.25 : x.percent + 0.25)
                             .sigma_max;
    EXPECT_LT(below, 1.0);
    EXPECT_GE(above, 1.0);
  }
}

TEST(Sweep, RejectsBadGrids) {
  const IlcLaw law = fir_law50();
  const SweepSetup setup;
  const std::vector<double> down{50, 40};
  const std::vector<double> zero{0, 10};
  EXPECT_THROW(robustness_sweep(setup, law, PlantParameter::a, down), Error);
  EXPECT_THROW(robustness_sweep(setup, law, PlantParameter::a, zero), Error);
}

TEST(Region, Descriptions) {
  EXPECT_EQ(describe_region({}, true), "all");
  EXPECT_EQ(describe_region({}, false), "none");
  EXPECT_EQ(describe_region({{159.2, false}}, true), "<159%");
  EXPECT_EQ(describe_region({{51.0, true}}, false), ">51%");
  EXPECT_EQ(describe_region({{47.0, true}, {119.0, false}}, false), ">47% and <119%");
}

TEST(Region, PercentGrid) {
  const auto g = percent_grid(1, 300, 1);
  ASSERT_EQ(g.size(), 300u);
  EXPECT_EQ(g.front(), 1.0);
  EXPECT_EQ(g.back(), 300.0);
  EXPECT_EQ(percent_grid(100, 100, 1).size(), 1u);
  EXPECT_THROW(percent_grid(10, 5, 1), Error);
  EXPECT_THROW(percent_grid(1, 5, 0), Error);
}

TEST(SweepCsv, Header) {
  RobustnessCurve c;
  c.param = PlantParameter::xi;
  c.percent = {100};
  c.sigma_max = {0.5};
  c.rho = {0.25};
  std::stringstream s;
  write_sweep_csv(s, std::span<const RobustnessCurve>(&c, 1));
  EXPECT_EQ(s.str(), "param,percent,sigma_max,rho\nxi,100,0.5,0.25\n");
}
