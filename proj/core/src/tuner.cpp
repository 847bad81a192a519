#include "ilcfr/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "ilcfr/error.hpp"

namespace ilcfr {

std::string_view to_string(StepRule r) {
  switch (r) {
    case StepRule::line_search: return "line_search";
    case StepRule::backtracking: return "backtracking";
    case StepRule::polyak: return "polyak";
  }
  return "unknown";
}

std::optional<StepRule> parse_step_rule(std::string_view s) {
  for (StepRule r : {StepRule::line_search, StepRule::backtracking, StepRule::polyak})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

BlockRect upper_left_block(Index height, Index width) { return {0, height, 0, width}; }

BlockRect upper_right_block(Index height, Index width, Index matrix_cols) {
  return {0, height, matrix_cols - width, matrix_cols};
}

LeadingSingular leading_singular(const Eigen::Ref<const Eigen::MatrixXd>& P1,
                                 const Eigen::Ref<const Eigen::MatrixXd>& L,
                                 double gap_tol) {
  if (P1.cols() != L.rows() || P1.rows() != L.cols())
    fail(ErrorCode::shape_mismatch,
         fmt::format("P_1 is {}x{} but L is {}x{}", P1.rows(), P1.cols(), L.rows(), L.cols()));
  Eigen::MatrixXd E = -P1 * L;
  E.diagonal().array() += 1.0;

  // Eigenpairs of E^T E: cheaper than a full SVD and accurate for the
  // leading pair, which is all the gradient needs.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(E.transpose() * E);
  if (eig.info() != Eigen::Success)
    fail(ErrorCode::singular_evaluation, "eigen-decomposition of E^T E failed");
  const Index n = E.cols();
  LeadingSingular out;
  out.sigma = eig.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
  out.v = eig.eigenvectors().col(n - 1);
  if (out.sigma(0) > 0.0) {
    out.u = E * out.v / out.sigma(0);
  } else {
    out.u = Eigen::VectorXd::Unit(E.rows(), 0);
  }
  if (out.sigma.size() > 1 && out.sigma(0) - out.sigma(1) < gap_tol)
    fail(ErrorCode::nonsmooth_point,
         fmt::format("sigma_max={:.6g} is repeated (gap {:.3e})", out.sigma(0),
                     out.sigma(0) - out.sigma(1)));
  return out;
}

Eigen::MatrixXd sigma_sensitivity(const Eigen::Ref<const Eigen::MatrixXd>& P1,
                                  const Eigen::Ref<const Eigen::MatrixXd>& L) {
  const LeadingSingular s = leading_singular(P1, L);
  return -(P1.transpose() * s.u) * s.v.transpose();
}

namespace {

class BlockMask {
 public:
  BlockMask(const std::vector<BlockRect>& blocks, Index rows, Index cols)
      : mask_(Eigen::MatrixXd::Zero(rows, cols)) {
    if (blocks.empty()) fail(ErrorCode::invalid_parameter, "no tuning blocks given");
    for (const BlockRect& b : blocks) {
      if (b.row_begin < 0 || b.col_begin < 0 || b.row_end > rows || b.col_end > cols ||
          b.rows() <= 0 || b.cols() <= 0)
        fail(ErrorCode::invalid_parameter,
             fmt::format("block [{},{})x[{},{}) outside the {}x{} learning matrix",
                         b.row_begin, b.row_end, b.col_begin, b.col_end, rows, cols));
      mask_.block(b.row_begin, b.col_begin, b.rows(), b.cols()).setOnes();
    }
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& P1, const LeadingSingular& s) const {
    return (-(P1.transpose() * s.u) * s.v.transpose()).cwiseProduct(mask_);
  }

  const Eigen::MatrixXd& mask() const { return mask_; }

 private:
  Eigen::MatrixXd mask_;
};

}  // namespace

TuneResult steepest_descent_tune(const Eigen::Ref<const Eigen::MatrixXd>& P1_in,
                                 const IlcLaw& law, const TuneSpec& spec) {
  if (!(spec.target_sigma > 0.0 && spec.target_sigma < 1.0))
    fail(ErrorCode::invalid_parameter, "target sigma must lie in (0, 1)");
  if (!(spec.shrink > 0.0 && spec.shrink < 1.0))
    fail(ErrorCode::invalid_parameter, "shrink factor must lie in (0, 1)");
  if (!(spec.step_init > 0.0) || spec.max_iters < 0)
    fail(ErrorCode::invalid_parameter, "step_init must be > 0 and max_iters >= 0");

  if (P1_in.cols() != law.L.rows() || P1_in.rows() != law.L.cols())
    fail(ErrorCode::shape_mismatch, fmt::format("P_1 is {}x{} but L is {}x{}", P1_in.rows(),
                                                P1_in.cols(), law.L.rows(), law.L.cols()));
  const Eigen::MatrixXd P1 = P1_in;
  const BlockMask mask(spec.blocks, law.L.rows(), law.L.cols());
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  TuneResult result{law, {}, false, 0};
  Eigen::MatrixXd& L = result.law.L;

  // Repeated sigma_max: nudge the tunable entries and retry.
  auto evaluate = [&](Eigen::MatrixXd& gains) {
    for (int attempt = 0;; ++attempt) {
      try {
        return leading_singular(P1, gains);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::nonsmooth_point || attempt >= 3) throw;
        for (Index j = 0; j < gains.cols(); ++j)
          for (Index i = 0; i < gains.rows(); ++i)
            if (mask.mask()(i, j) != 0.0) gains(i, j) += 1e-10 * unit(rng);
        ++result.jitter_retries;
      }
    }
  };

  {
    Eigen::MatrixXd E = -P1 * L;
    E.diagonal().array() += 1.0;
    const double sigma0 = singular_values(E)(0);
    if (sigma0 <= spec.target_sigma) {
      result.trace.push_back({0, sigma0, 0.0, 0.0});
      result.converged = true;
      return result;
    }
  }

  LeadingSingular cur = evaluate(L);
  Eigen::MatrixXd grad = mask.gradient(P1, cur);
  result.trace.push_back({0, cur.sigma(0), 0.0, grad.norm()});

  struct Probe {
    double alpha = 0.0;
    Eigen::MatrixXd gains;
    LeadingSingular s;
  };
  auto probe_at = [&](double alpha) {
    Probe p{alpha, L - alpha * grad, {}};
    p.s = evaluate(p.gains);
    return p;
  };
  auto better = [](const Probe& a, const Probe& b) { return a.s.sigma(0) < b.s.sigma(0); };

  const double floor_sigma = spec.target_sigma * (1.0 - spec.landing_tol);
  for (int it = 1; it <= spec.max_iters && cur.sigma(0) > spec.target_sigma; ++it) {
    const double gnorm = grad.norm();
    if (gnorm < spec.grad_tol) break;
    const double f0 = cur.sigma(0);
    const double tiny = 1e-14 * (1.0 + L.norm()) / gnorm;

    double alpha = spec.rule == StepRule::polyak
                       ? (f0 - spec.target_sigma) / (gnorm * gnorm)
                       : spec.step_init * f0 / gnorm;
    Probe best = probe_at(alpha);
    while (best.s.sigma(0) >= f0 && alpha > tiny) {
      alpha *= spec.shrink;
      best = probe_at(alpha);
    }
    if (best.s.sigma(0) >= f0) break;

    if (spec.rule == StepRule::line_search && best.s.sigma(0) > spec.target_sigma) {
      // Bracket the minimum of the convex line function, then golden section.
      double lo = 0.0;
      Probe far = probe_at(2.0 * best.alpha);
      while (better(far, best)) {
        lo = best.alpha;
        best = std::move(far);
        far = probe_at(2.0 * best.alpha);
      }
      double hi = far.alpha;
      constexpr double kGolden = 0.6180339887498949;
      Probe x1 = probe_at(hi - kGolden * (hi - lo));
      Probe x2 = probe_at(lo + kGolden * (hi - lo));
      while (hi - lo > 1e-10 * hi && best.s.sigma(0) > spec.target_sigma) {
        if (better(x1, x2)) {
          hi = x2.alpha;
          x2 = std::move(x1);
          x1 = probe_at(hi - kGolden * (hi - lo));
          if (better(x1, best)) best = x1;
        } else {
          lo = x1.alpha;
          x1 = std::move(x2);
          x2 = probe_at(lo + kGolden * (hi - lo));
          if (better(x2, best)) best = x2;
        }
        if (better(x1, best)) best = x1;
        if (better(x2, best)) best = x2;
      }
    }

    if (best.s.sigma(0) < floor_sigma) {
      // Bisect the step so sigma_max lands just under the target.
      double lo = 0.0, hi = best.alpha;
      for (int k = 0; k < 200 && best.s.sigma(0) < floor_sigma; ++k) {
        Probe mid = probe_at(0.5 * (lo + hi));
        if (mid.s.sigma(0) > spec.target_sigma) {
          lo = mid.alpha;
        } else {
          hi = mid.alpha;
          best = std::move(mid);
        }
      }
    }

    L = std::move(best.gains);
    cur = std::move(best.s);
    grad = mask.gradient(P1, cur);
    result.trace.push_back({it, cur.sigma(0), best.alpha, grad.norm()});
  }
  result.converged = cur.sigma(0) <= spec.target_sigma;
  return result;
}

std::vector<BlockRect> block_recommendation(const Eigen::Ref<const Eigen::MatrixXd>& S,
                                            Index count) {
  const Index rows = S.rows(), cols = S.cols();
  const Index total = rows * cols;
  count = std::clamp<Index>(count, 0, total);
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  // column-major linear index; stable so ties resolve deterministically
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(S(a % rows, a / rows)) > std::abs(S(b % rows, b / rows));
  });

  // One candidate rectangle per quadrant, anchored at its corner:
  // 0 upper-left, 1 upper-right, 2 lower-left, 3 lower-right.
  struct Extent {
    bool used = false;
    Index rmin = 0, rmax = 0, cmin = 0, cmax = 0;
  };
  Extent ext[4];
  for (Index k = 0; k < count; ++k) {
    const Index i = order[static_cast<std::size_t>(k)] % rows;
    const Index j = order[static_cast<std::size_t>(k)] / rows;
    const int q = (2 * rows > 2 * i + 1 ? 0 : 2) + (2 * cols > 2 * j + 1 ? 0 : 1);
    Extent& e = ext[q];
    if (!e.used) {
      e = {true, i, i, j, j};
    } else {
      e.rmin = std::min(e.rmin, i);
      e.rmax = std::max(e.rmax, i);
      e.cmin = std::min(e.cmin, j);
      e.cmax = std::max(e.cmax, j);
    }
  }
  std::vector<BlockRect> out;
  for (int q = 0; q < 4; ++q) {
    if (!ext[q].used) continue;
    const bool top = q < 2, left = (q % 2) == 0;
    BlockRect r;
    r.row_begin = top ? 0 : ext[q].rmin;
    r.row_end = top ? ext[q].rmax + 1 : rows;
    r.col_begin = left ? 0 : ext[q].cmin;
    r.col_end = left ? ext[q].cmax + 1 : cols;
    out.push_back(r);
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TuneStep>& trace) {
  out << "iter,sigma_max,step,grad_norm\n";
  for (const TuneStep& s : trace)
    out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", s.iter, s.sigma_max, s.step,
                       s.grad_norm);
}

}  // namespace ilcfr
