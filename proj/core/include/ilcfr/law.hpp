#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "ilcfr/lifted.hpp"

namespace ilcfr {

enum class LawVariant { fir_banded, fir_full, circulant, circulant_extended };

std::string_view to_string(LawVariant v);
std::optional<LawVariant> parse_law_variant(std::string_view s);

/// Learning gain matrix for u_{j+1} = u_j + L e_j. L is N x (N - skip): the
/// first `skip` error samples are never learned.
struct IlcLaw {
  Eigen::MatrixXd L;
  LawVariant variant = LawVariant::fir_banded;
  Index skip = 0;

  Index trajectory_length() const { return L.rows(); }
  Index tracked_length() const { return L.cols(); }
};

/// E = I - P_1 L_1 with its singular values (descending) and spectral radius.
struct IterationMatrix {
  Eigen::MatrixXd E;
  Eigen::VectorXd sigma;
  double rho = 0.0;
};

IlcLaw build_fir_law(const LiftedMatrix& F, Index skip,
                     LawVariant variant = LawVariant::fir_banded);

/**
 * Inverts a circulant (or extended circulant) by dense LU. With
 * `reduce_to > 0` the leading reduce_to x reduce_to block of the inverse is
 * kept before the first `skip` columns are dropped, which turns an extended
 * circulant into a law for the original trajectory length.
 */
IlcLaw build_circulant_law(const LiftedMatrix& Pc, Index skip, Index reduce_to = 0);

IterationMatrix iteration_matrix(const LiftedMatrix& P, const IlcLaw& law);

/// Same, from an already row-deleted P_1 and a raw L.
IterationMatrix iteration_matrix(const Eigen::Ref<const Eigen::MatrixXd>& P1,
                                 const Eigen::Ref<const Eigen::MatrixXd>& L);

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& M);
double spectral_radius(const Eigen::Ref<const Eigen::MatrixXd>& M);

void write_law_csv(std::ostream& out, const IlcLaw& law);
IlcLaw read_law_csv(std::istream& in);

}  // namespace ilcfr
