#include "mtl/coupling.hpp"

#include "mtl/error.hpp"

namespace mtl {

namespace {

Eigen::MatrixXd build_c(const Eigen::VectorXd& eta, double gamma2) {
  const auto t = eta.size();
  const double n = static_cast<double>(t);
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(t, t, -gamma2 / n);
  for (Eigen::Index i = 0; i < t; ++i) c(i, i) = (n - 1.0) * gamma2 / n + eta[i];
  return c;
}

}  // namespace

bool coupling_positive_definite(const Eigen::VectorXd& eta, double gamma2) {
  if (eta.size() == 0 || !eta.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(build_c(eta, gamma2));
  return llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0;
}

CouplingMatrices coupling_matrices(const Eigen::VectorXd& eta, double gamma2,
                                   double rho, const Eigen::VectorXd& kappa) {
  const auto t = eta.size();
  if (t == 0 || kappa.size() != t) {
    throw InvalidArgument("coupling_matrices: eta and kappa must have equal, nonzero length");
  }
  CouplingMatrices m;
  m.C = build_c(eta, gamma2);
  Eigen::LLT<Eigen::MatrixXd> llt(m.C);
  if (llt.info() != Eigen::Success ||
      !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0)) {
    throw NotPositiveDefinite("coupling_matrices: C(eta) is not positive definite");
  }
  m.C_inv = llt.solve(Eigen::MatrixXd::Identity(t, t));
  m.C_inv = 0.5 * (m.C_inv + m.C_inv.transpose());
  m.L = Eigen::MatrixXd::Constant(t, t, rho);
  m.L.diagonal().setOnes();
  m.B = m.C_inv.cwiseProduct(m.L);
  m.V = kappa.cwiseProduct(m.C_inv.diagonal());
  return m;
}

}  // namespace mtl
