#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ilcfr/law.hpp"

namespace ilcfr {

/// Half-open, 0-based rectangle [row_begin, row_end) x [col_begin, col_end)
/// into a (column-deleted) learning matrix.
struct BlockRect {
  Index row_begin = 0;
  Index row_end = 0;
  Index col_begin = 0;
  Index col_end = 0;

  Index rows() const { return row_end - row_begin; }
  Index cols() const { return col_end - col_begin; }
  bool contains(Index i, Index j) const {
    return i >= row_begin && i < row_end && j >= col_begin && j < col_end;
  }
  friend bool operator==(const BlockRect&, const BlockRect&) = default;
};

/// Upper-left / upper-right corner blocks of a rows x cols matrix.
BlockRect upper_left_block(Index height, Index width);
BlockRect upper_right_block(Index height, Index width, Index matrix_cols);

/// How far to move along the masked negative gradient each iteration.
///   line_search  minimise sigma_max along the ray (golden section; the
///                function is convex in L, so the line minimum is unique)
///   backtracking first decrease found by shrinking step_init
///   polyak       (sigma_max - target) / |S|^2, shrunk until it decreases
enum class StepRule { line_search, backtracking, polyak };

std::string_view to_string(StepRule r);
std::optional<StepRule> parse_step_rule(std::string_view s);

struct TuneSpec {
  std::vector<BlockRect> blocks;
  double target_sigma = 0.55;
  StepRule rule = StepRule::line_search;
  /// First trial step, relative: alpha = step_init * sigma_max / |S_masked|,
  /// i.e. the gains move by step_init * sigma_max.
  double step_init = 1e-2;
  double shrink = 0.5;
  int max_iters = 5000;
  double grad_tol = 1e-10;
  /// A step that would undershoot target * (1 - landing_tol) is bisected so
  /// the final sigma_max lands in [target * (1 - landing_tol), target].
  double landing_tol = 1e-3;
  std::uint64_t seed = 1;
};

struct TuneStep {
  int iter = 0;
  double sigma_max = 0.0;
  double step = 0.0;  // alpha in L <- L - alpha * S_masked
  double grad_norm = 0.0;
};

struct TuneResult {
  IlcLaw law;
  std::vector<TuneStep> trace;
  bool converged = false;
  int jitter_retries = 0;
};

/// Leading singular triplet of E = I - P1 L; throws nonsmooth_point when
/// sigma_1 - sigma_2 < gap_tol. Only the two largest entries of `sigma` are
/// meaningful (they come from the eigenvalues of E^T E).
struct LeadingSingular {
  Eigen::VectorXd sigma;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};
LeadingSingular leading_singular(const Eigen::Ref<const Eigen::MatrixXd>& P1,
                                 const Eigen::Ref<const Eigen::MatrixXd>& L,
                                 double gap_tol = 1e-9);

/// dsigma_max / dL(i, j) = -(P1^T u)_i v_j.
Eigen::MatrixXd sigma_sensitivity(const Eigen::Ref<const Eigen::MatrixXd>& P1,
                                  const Eigen::Ref<const Eigen::MatrixXd>& L);

/**
 * Steepest descent on sigma_max(I - P1 L) over the entries of L inside
 * spec.blocks. Every accepted step strictly decreases sigma_max. Stops at
 * target, on a vanishing masked gradient, when no decrease can be found, or
 * after max_iters; the last (best) point is returned either way.
 */
TuneResult steepest_descent_tune(const Eigen::Ref<const Eigen::MatrixXd>& P1,
                                 const IlcLaw& law, const TuneSpec& spec);

/// Smallest corner-anchored rectangles covering the `count` largest |S|.
std::vector<BlockRect> block_recommendation(const Eigen::Ref<const Eigen::MatrixXd>& S,
                                            Index count);

void write_trace_csv(std::ostream& out, const std::vector<TuneStep>& trace);

}  // namespace ilcfr
