#include <algorithm>
#include <random>
#include <sstream>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ilcfr/error.hpp"
#include "ilcfr/fir.hpp"
#include "ilcfr/law.hpp"
#include "ilcfr/tuner.hpp"

using namespace ilcfr;
using namespace ilcfr::testing;

namespace {

double sigma_max(const Eigen::MatrixXd& P1, const Eigen::MatrixXd& L) {
  Eigen::MatrixXd E = -P1 * L;
  E.diagonal().array() += 1.0;
  return singular_values(E)(0);
}

struct Bench {
  Eigen::MatrixXd P1;
  IlcLaw fir;
  IlcLaw circ;
};

Bench bench(double T, Index N) {
  const auto ss = benchmark_plant(T);
  const auto h = markov_parameters(ss, N);
  Bench b;
  b.P1 = toeplitz_matrix(h).data.bottomRows(N - 1);
  const auto d = design_fir(freq_grid_degrees(ss), default_center(N), N, T);
  b.fir = build_fir_law(fir_to_learning_matrix(d.filter, N), 1);
  b.circ = build_circulant_law(circulant_matrix(h), 1);
  return b;
}

const Bench& bench50() {
  static const Bench b = bench(0.02, 51);
  return b;
}

TuneSpec spec_for(std::vector<BlockRect> blocks, StepRule rule = StepRule::line_search) {
  TuneSpec s;
  s.blocks = std::move(blocks);
  s.rule = rule;
  return s;
}

}  // namespace

TEST(StepRuleNames, RoundTrip) {
  for (StepRule r : {StepRule::line_search, StepRule::backtracking, StepRule::polyak})
    EXPECT_EQ(parse_step_rule(to_string(r)), r);
  EXPECT_FALSE(parse_step_rule("armijo"));
}

TEST(Blocks, CornerHelpers) {
  EXPECT_EQ(upper_left_block(2, 3), (BlockRect{0, 2, 0, 3}));
  EXPECT_EQ(upper_right_block(5, 5, 50), (BlockRect{0, 5, 45, 50}));
  const BlockRect r{1, 3, 2, 4};
  EXPECT_TRUE(r.contains(1, 2));
  EXPECT_FALSE(r.contains(3, 2));
  EXPECT_FALSE(r.contains(1, 4));
}

TEST(Sensitivity, MatchesCentralDifferences) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<Index> size(5, 20);
  int checked = 0;
  while (checked < 20) {
    const Index n = size(rng);
    const Eigen::MatrixXd P1 = random_matrix(rng, n, n + 1) / std::sqrt(double(n));
    const Eigen::MatrixXd L = random_matrix(rng, n + 1, n) / std::sqrt(double(n));
    Eigen::MatrixXd E = -P1 * L;
    E.diagonal().array() += 1.0;
    const Eigen::VectorXd s = singular_values(E);
    if (s(0) - s(1) <= 1e-3) continue;

    const Eigen::MatrixXd S = sigma_sensitivity(P1, L);
    Eigen::MatrixXd fd(L.rows(), L.cols());
    const double delta = 1e-6;
    for (Index i = 0; i < L.rows(); ++i)
      for (Index j = 0; j < L.cols(); ++j) {
        Eigen::MatrixXd Lp = L, Lm = L;
        Lp(i, j) += delta;
        Lm(i, j) -= delta;
        fd(i, j) = (sigma_max(P1, Lp) - sigma_max(P1, Lm)) / (2.0 * delta);
      }
    EXPECT_LT((S - fd).norm() / S.norm(), 1e-4) << "n=" << n;
    ++checked;
  }
}

TEST(Sensitivity, RepeatedSingularValueIsNonsmooth) {
  try {
    sigma_sensitivity(Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Zero(4, 4));
    FAIL() << "expected nonsmooth point";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::nonsmooth_point);
  }
  EXPECT_THROW(leading_singular(Eigen::MatrixXd::Zero(3, 4), Eigen::MatrixXd::Zero(3, 3)), Error);
}

TEST(Sensitivity, FirLawConcentratesUpperLeft) {
  const Bench& b = bench50();
  const Eigen::MatrixXd S = sigma_sensitivity(b.P1, b.fir.L).cwiseAbs();
  Index r, c;
  S.maxCoeff(&r, &c);
  EXPECT_LT(r, 3);
  EXPECT_LT(c, 3);
}

TEST(Recommendation, SingleDominantEntry) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Constant(6, 6, 1e-3);
  S(0, 0) = -5.0;
  const auto blocks = block_recommendation(S, 1);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0], (BlockRect{0, 1, 0, 1}));
}

TEST(Recommendation, FirLawUpperLeftOnly) {
  const Bench& b = bench50();
  const auto blocks = block_recommendation(sigma_sensitivity(b.P1, b.fir.L), 4);
  ASSERT_FALSE(blocks.empty());
  EXPECT_EQ(blocks[0].row_begin, 0);
  EXPECT_EQ(blocks[0].col_begin, 0);
  for (const BlockRect& r : blocks)
    EXPECT_FALSE(r.row_end == b.fir.L.rows() && r.col_end == b.fir.L.cols());
}

TEST(Recommendation, CirculantLawNeedsUpperRight) {
  const Bench& b = bench50();
  const auto blocks = block_recommendation(sigma_sensitivity(b.P1, b.circ.L), 20);
  const Index cols = b.circ.L.cols();
  const bool ul = std::any_of(blocks.begin(), blocks.end(), [](const BlockRect& r) {
    return r.row_begin == 0 && r.col_begin == 0;
  });
  const bool ur = std::any_of(blocks.begin(), blocks.end(), [&](const BlockRect& r) {
    return r.row_begin == 0 && r.col_end == cols;
  });
  EXPECT_TRUE(ul);
  EXPECT_TRUE(ur);
}

TEST(Tune, FirTwoByTwoReachesTarget) {
  const Bench& b = bench50();
  const TuneSpec spec = spec_for({upper_left_block(2, 2)});
  const TuneResult r = steepest_descent_tune(b.P1, b.fir, spec);
  ASSERT_TRUE(r.converged);
  const IterationMatrix E = iteration_matrix(b.P1, r.law.L);
  EXPECT_LE(E.sigma(0), 0.55);
  EXPECT_GE(E.sigma(0), 0.55 * (1.0 - 1e-3));
  EXPECT_LT(E.rho, 1.0);
  EXPECT_LT(E.sigma.maxCoeff(), 1.0);
}

TEST(Tune, CirculantTwoBlocksReachesTarget) {
  const Bench& b = bench50();
  const Index cols = b.circ.L.cols();
  const TuneSpec spec = spec_for({upper_left_block(5, 5), upper_right_block(5, 5, cols)});
  const TuneResult r = steepest_descent_tune(b.P1, b.circ, spec);
  ASSERT_TRUE(r.converged);
  const IterationMatrix E = iteration_matrix(b.P1, r.law.L);
  EXPECT_LE(E.sigma(0), 0.55);
  EXPECT_GE(E.sigma(0), 0.55 * (1.0 - 1e-3));
  EXPECT_LT(E.rho, 1.0);
}

TEST(Tune, MaskedEntriesOnlyAndMonotoneTrace) {
  const Bench& b = bench50();
  const Index cols = b.circ.L.cols();
  const std::vector<BlockRect> blocks{upper_left_block(5, 5), upper_right_block(5, 5, cols)};
  for (StepRule rule : {StepRule::line_search, StepRule::backtracking, StepRule::polyak}) {
    TuneSpec spec = spec_for(blocks, rule);
    spec.max_iters = 200;
    const TuneResult r = steepest_descent_tune(b.P1, b.circ, spec);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < b.circ.L.rows(); ++i) {
        const bool inside = std::any_of(blocks.begin(), blocks.end(),
                                        [&](const BlockRect& k) { return k.contains(i, j); });
        if (!inside) {
          ASSERT_EQ(r.law.L(i, j), b.circ.L(i, j)) << to_string(rule);
        }
      }
    ASSERT_GE(r.trace.size(), 2u);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      EXPECT_LT(r.trace[k].sigma_max, r.trace[k - 1].sigma_max) << to_string(rule);
      EXPECT_EQ(r.trace[k].iter, static_cast<int>(k));
    }
  }
}

TEST(Tune, EveryRuleLandsInTheBand) {
  const Bench& b = bench50();
  for (StepRule rule : {StepRule::line_search, StepRule::backtracking, StepRule::polyak}) {
    const TuneResult r = steepest_descent_tune(b.P1, b.fir, spec_for({upper_left_block(2, 2)}, rule));
    EXPECT_TRUE(r.converged) << to_string(rule);
    EXPECT_LE(r.trace.back().sigma_max, 0.55) << to_string(rule);
    EXPECT_GE(r.trace.back().sigma_max, 0.55 * (1.0 - 1e-3)) << to_string(rule);
  }
}

TEST(Tune, DeterministicUnderFixedSeed) {
  const Bench& b = bench50();
  TuneSpec spec = spec_for({upper_left_block(2, 2)});
  spec.seed = 99;
  const TuneResult a = steepest_descent_tune(b.P1, b.fir, spec);
  const TuneResult c = steepest_descent_tune(b.P1, b.fir, spec);
  ASSERT_EQ(a.trace.size(), c.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    EXPECT_EQ(a.trace[k].sigma_max, c.trace[k].sigma_max);
    EXPECT_EQ(a.trace[k].step, c.trace[k].step);
  }
  EXPECT_EQ(a.law.L, c.law.L);
}

TEST(Tune, AlreadyBelowTargetTakesNoSteps) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd P1 = random_matrix(rng, 3, 3) + 3.0 * Eigen::MatrixXd::Identity(3, 3);
  const IlcLaw law{P1.inverse(), LawVariant::fir_banded, 0};
  const TuneResult r = steepest_descent_tune(P1, law, spec_for({upper_left_block(3, 3)}));
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_LT(r.trace[0].sigma_max, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.law.L, law.L);
}

TEST(Tune, RejectsBadSpecs) {
  const Bench& b = bench50();
  EXPECT_THROW(steepest_descent_tune(b.P1, b.fir, spec_for({})), Error);
  EXPECT_THROW(steepest_descent_tune(b.P1, b.fir, spec_for({BlockRect{0, 2, 49, 52}})), Error);
  TuneSpec bad = spec_for({upper_left_block(2, 2)});
  bad.target_sigma = 1.5;
  EXPECT_THROW(steepest_descent_tune(b.P1, b.fir, bad), Error);
  EXPECT_THROW(steepest_descent_tune(b.P1.topRows(10), b.fir, spec_for({upper_left_block(2, 2)})),
               Error);
}

TEST(TraceCsv, Header) {
  std::stringstream s;
  write_trace_csv(s, {{0, 2.0, 0.0, 1.0}, {1, 1.0, 0.5, 0.25}});
  std::string line;
  std::getline(s, line);
  EXPECT_EQ(line, "iter,sigma_max,step,grad_norm");
  std::getline(s, line);
  EXPECT_EQ(line, "0,2,0,1");
}
