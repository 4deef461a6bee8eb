#pragma once

#include <Eigen/Dense>

namespace mtl {

/// T x T matrices of the general multi-task problem.
///   C_ii = (T-1) gamma2 / T + eta_i,  C_ij = -gamma2 / T
///   L_ii = 1,                          L_ij = rho
///   B = C^{-1} o L (elementwise),      V_t = kappa_t (C^{-1})_tt
struct CouplingMatrices {
  Eigen::MatrixXd C;
  Eigen::MatrixXd C_inv;
  Eigen::MatrixXd L;
  Eigen::MatrixXd B;
  Eigen::VectorXd V;
};

/// Throws InvalidArgument on size mismatch and NotPositiveDefinite when
/// C(eta) is not positive definite.
CouplingMatrices coupling_matrices(const Eigen::VectorXd& eta, double gamma2,
                                   double rho, const Eigen::VectorXd& kappa);

/// True when C(eta) admits a Cholesky factorization.
bool coupling_positive_definite(const Eigen::VectorXd& eta, double gamma2);

}  // namespace mtl
