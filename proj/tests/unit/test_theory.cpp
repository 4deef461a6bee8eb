#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mtl/coupling.hpp"
#include "mtl/error.hpp"
#include "mtl/theory.hpp"
#include "oracles.hpp"

using namespace mtl;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

ScalarProblem scalar(double alpha, double kappa, double rho, double g1, double g2,
                     LossKind loss = LossKind::squared,
                     ModelKind model = ModelKind::linear_regression) {
  ScalarProblem p;
  p.alpha = alpha;
  p.kappa = kappa;
  p.rho = rho;
  p.gamma1 = g1;
  p.gamma2 = g2;
  p.loss = loss;
  p.model = model;
  return p;
}

oracle::ScalarParams params(const ScalarProblem& p) {
  return {p.alpha, p.kappa, p.rho, p.gamma1, p.gamma2, p.loss, p.model};
}

}  // namespace

TEST(Coupling, NoCouplingIsDiagonal) {
  const Eigen::Vector3d eta(0.5, 1.0, 2.0), kappa(0.3, 0.3, 0.6);
  const auto m = coupling_matrices(eta, 0.0, 0.4, kappa);
  EXPECT_TRUE(m.C.isApprox(Eigen::Matrix3d(eta.asDiagonal())));
  EXPECT_NEAR(m.V[2], 0.6 / 2.0, 1e-15);
  EXPECT_NEAR(m.B(0, 1), 0.0, 1e-15);
}

TEST(Coupling, EqualEtaReducesToSymmetricCoefficients) {
  for (int T : {2, 3, 7})
    for (double rho : {0.0, 0.3, 0.9, 1.0}) {
      const double eta = 0.7, g2 = 1.3, kappa = 0.4;
      const auto m = coupling_matrices(Eigen::VectorXd::Constant(T, eta), g2, rho,
                                       Eigen::VectorXd::Constant(T, kappa));
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(T);
      const double quad = ones.dot(m.B.ldlt().solve(ones)) / T;
      EXPECT_NEAR(quad, symmetric_q_coefficient(T, eta, g2, rho), 1e-12) << T << ' ' << rho;
      for (int t = 0; t < T; ++t)
        EXPECT_NEAR(m.V[t], symmetric_moreau_parameter(T, eta, kappa, g2), 1e-13);
    }
}

TEST(Coupling, RejectsIndefiniteC) {
  const Eigen::Vector2d eta(-0.4, -0.4), kappa(1, 1);
  EXPECT_FALSE(coupling_positive_definite(eta, 1.0));
  EXPECT_THROW(coupling_matrices(eta, 1.0, 0.5, kappa), NotPositiveDefinite);
  EXPECT_TRUE(coupling_positive_definite(Eigen::Vector2d(-0.2, 0.5), 1.0));
}

TEST(Theory, ObjectivesMatchDirectFormulas) {
  const QuadratureGrid g(48);
  for (ModelKind m : {ModelKind::linear_regression, ModelKind::binary_classification}) {
    const auto p = scalar(2.0, 0.6, 0.7, 0.1, 0.8, LossKind::squared, m);
    const auto o = params(p);
    for (double T : {1.0, 3.0, 50.0})
      EXPECT_NEAR(symmetric_objective(T, p, 0.9, 0.4, 0.6, g),
                  oracle::symmetric_phi(o, T, 0.9, 0.4, 0.6), 1e-12);
    EXPECT_NEAR(symmetric_objective(kInf, p, 0.9, 0.4, 0.6, g),
                oracle::infinite_phi(o, 0.9, 0.4, 0.6), 1e-12);
    EXPECT_NEAR(separate_objective(p, 0.55, 0.9, 0.4, 0.6, g),
                oracle::separate_phi(o, 0.55, 0.9, 0.4, 0.6), 1e-12);
  }
  const auto lg = scalar(1.0, 0.5, 0.8, 0.01, 0.5, LossKind::logistic,
                         ModelKind::binary_classification);
  EXPECT_NEAR(symmetric_objective(2.0, lg, 1.1, 0.7, 0.3, g),
              oracle::symmetric_phi(params(lg), 2.0, 1.1, 0.7, 0.3), 1e-7);

  GeneralProblem gp;
  gp.alpha = {4.0, 2.0};
  gp.kappa = {1.0, 0.5};
  gp.rho = 0.6;
  gp.gamma1 = 0.05;
  gp.gamma2 = 1.0;
  const oracle::GeneralParams go{gp.alpha, gp.kappa, gp.rho, gp.gamma1, gp.gamma2, gp.model};
  const Eigen::Vector2d q(0.8, 0.5), r(0.3, 0.6), eta(0.4, 0.9);
  EXPECT_NEAR(general_objective(gp, q, r, eta, g), oracle::general_phi(go, q, r, eta), 1e-12);
}

TEST(Theory, SymmetricSaddleMatchesGridSearch) {
  struct Case {
    ScalarProblem p;
    double T;
  };
  const Case cases[] = {
      {scalar(2.0, 0.5, 0.85, 0.1, 0.5), 3.0},
      {scalar(5.0, 2.0, 0.8, 0.01, 2.0), 3.0},
      {scalar(2.0, 1.0, 0.75, 0.05, 0.2, LossKind::squared, ModelKind::binary_classification), 10.0},
  };
  for (const auto& c : cases) {
    const auto sol = solve_symmetric(c.T, c.p);
    ASSERT_TRUE(sol.converged);
    const auto o = params(c.p);
    const double ref = oracle::scalar_saddle_value(
        [&](double q, double r, double eta) { return oracle::symmetric_phi(o, c.T, q, r, eta); });
    EXPECT_NEAR(sol.value, ref, 1e-3 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Theory, LogisticSaddleIsLocalSaddleOfDirectObjective) {
  // A full grid search over the logistic objective is too slow; check the
  // value and local minimality of max_eta phi around the solver's point.
  const auto p = scalar(1.0, 0.4, 0.8, 1e-2, 0.5, LossKind::logistic,
                        ModelKind::binary_classification);
  const auto sol = solve_symmetric(2.0, p);
  ASSERT_TRUE(sol.converged);
  const auto o = params(p);
  auto upper = [&](double q, double r) {
    const double u = oracle::golden_min(
        [&](double u) { return -oracle::symmetric_phi(o, 2.0, q, r, std::exp(u)); },
        std::log(1e-6), std::log(1e6), 80);
    return oracle::symmetric_phi(o, 2.0, q, r, std::exp(u));
  };
  const double q = sol.q[0], r = sol.r[0];
  const double v = upper(q, r);
  EXPECT_NEAR(v, sol.value, 1e-4);
  for (double dq : {-0.03, 0.0, 0.03})
    for (double dr : {-0.03, 0.0, 0.03}) {
      if (dq == 0.0 && dr == 0.0) continue;
      EXPECT_GE(upper(q + dq, std::max(0.0, r + dr)), v - 1e-7) << dq << ' ' << dr;
    }
}

TEST(Theory, InfiniteAndSeparateSaddlesMatchGridSearch) {
  const auto p = scalar(2.0, 0.5, 0.85, 0.1, 0.5);
  const auto o = params(p);
  const auto inf = solve_infinite_T(p);
  ASSERT_TRUE(inf.converged);
  EXPECT_NEAR(inf.value,
              oracle::scalar_saddle_value([&](double q, double r, double e) {
                return oracle::infinite_phi(o, q, r, e);
              }),
              1e-3);
  const auto sep = solve_separate_asymptotic(p, 0.9);
  ASSERT_TRUE(sep.converged);
  EXPECT_NEAR(sep.value,
              oracle::scalar_saddle_value([&](double q, double r, double e) {
                return oracle::separate_phi(o, 0.9, q, r, e);
              }),
              1e-3);
}

TEST(Theory, GeneralSaddleMatchesGridSearch) {
  GeneralProblem gp;
  gp.alpha = {4.0, 2.0};
  gp.kappa = {1.0, 0.5};
  gp.rho = 0.7;
  gp.gamma1 = 0.05;
  gp.gamma2 = 1.0;
  const auto sol = solve_general(gp);
  ASSERT_TRUE(sol.converged);
  const double ref = oracle::general_saddle_value({gp.alpha, gp.kappa, gp.rho, gp.gamma1, gp.gamma2, gp.model});
  EXPECT_NEAR(sol.value, ref, 1e-3 * std::max(1.0, std::abs(ref)));
}

TEST(Theory, GeneralSaddleNearFullKnownDimension) {
  // Here the supremum over eta sits on the C(eta) boundary for many x away
  // from the saddle; the solve must still land on the interior saddle.
  GeneralProblem gp;
  gp.alpha = {4.0, 2.0};
  gp.kappa = {3.9, 1.95};
  gp.rho = 0.7;
  gp.gamma1 = 0.005;
  gp.gamma2 = 1.0;
  gp.model = ModelKind::binary_classification;
  const auto sol = solve_general(gp);
  ASSERT_TRUE(sol.converged);
  EXPECT_LT(sol.residual, 1e-6);
  EXPECT_TRUE(coupling_positive_definite(sol.eta, gp.gamma2));
  gp.kappa = {3.85, 1.925};
  const auto near = solve_general(gp);
  ASSERT_TRUE(near.converged);
  EXPECT_NEAR(sol.value, near.value, 1e-3);
  EXPECT_NEAR(sol.q[0], near.q[0], 1e-2);
}

TEST(Theory, GeneralWithEqualTasksMatchesSymmetric) {
  GeneralProblem gp;
  gp.alpha = {2.0, 2.0, 2.0};
  gp.kappa = {0.5, 0.5, 0.5};
  gp.rho = 0.85;
  gp.gamma1 = 0.1;
  gp.gamma2 = 0.5;
  const auto g = solve_general(gp);
  const auto s = solve_symmetric(3.0, scalar(2.0, 0.5, 0.85, 0.1, 0.5));
  ASSERT_TRUE(g.converged && s.converged);
  EXPECT_NEAR(g.value / 3.0, s.value, 1e-8);
  for (int t = 0; t < 3; ++t) {
    EXPECT_NEAR(g.q[t], s.q[0], 1e-6);
    EXPECT_NEAR(g.r[t], s.r[0], 1e-6);
  }
}

TEST(Theory, LargeTApproachesLimit) {
  const auto p = scalar(2.0, 0.5, 0.85, 0.1, 0.5);
  const auto big = solve_symmetric(1e7, p);
  const auto lim = solve_infinite_T(p);
  EXPECT_NEAR(big.q[0], lim.q[0], 1e-5);
  EXPECT_NEAR(big.r[0], lim.r[0], 1e-5);
  EXPECT_EQ(lim.source, TheorySource::infinite_tasks);
  EXPECT_EQ(solve_symmetric(kInf, p).source, TheorySource::infinite_tasks);
}

TEST(Theory, SingleTaskIgnoresCoupling) {
  const auto a = solve_symmetric(1.0, scalar(2.0, 0.5, 0.85, 0.1, 0.0));
  const auto b = solve_symmetric(1.0, scalar(2.0, 0.5, 0.85, 0.1, 5.0));
  EXPECT_NEAR(a.q[0], b.q[0], 1e-6);
  EXPECT_NEAR(a.r[0], b.r[0], 1e-6);
  EXPECT_NEAR(a.value, b.value, 1e-8);
}

TEST(Theory, LimitMatchesSeparateAtExtremeSimilarity) {
  const auto same = scalar(2.0, 0.5, 1.0, 0.1, 0.5);
  const auto a = solve_infinite_T(same), b = solve_separate_asymptotic(same, 1.0);
  EXPECT_NEAR(a.value, b.value, 1e-9);
  EXPECT_NEAR(a.q[0], b.q[0], 1e-6);

  const auto unrelated = scalar(2.0, 0.5, 0.0, 0.1, 0.5, LossKind::squared,
                                ModelKind::binary_classification);
  const auto c = solve_infinite_T(unrelated), d = solve_separate_asymptotic(unrelated, 0.0);
  EXPECT_NEAR(c.value, d.value, 1e-9);
  EXPECT_NEAR(c.r[0], d.r[0], 1e-6);
}

TEST(Theory, ValidateRejectsUnsupportedProblems) {
  EXPECT_THROW(validate(scalar(1.0, 1.5, 0.5, 0.1, 0.1)), InvalidArgument);
  EXPECT_THROW(validate(scalar(1.0, 0.5, 0.0, 0.1, 0.1)), InvalidArgument);
  EXPECT_NO_THROW(validate(scalar(1.0, 0.5, 0.0, 0.1, 0.1, LossKind::squared,
                                  ModelKind::binary_classification)));
  GeneralProblem gp;
  gp.alpha = {1.0, 2.0};
  gp.kappa = {0.5};
  EXPECT_THROW(validate(gp), InvalidArgument);
}
