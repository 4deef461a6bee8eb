#pragma once

#include <vector>

#include "mtl/losses.hpp"
#include "mtl/model.hpp"

namespace mtl {

/// Nodes and weights of a Gaussian rule; weights sum to the mass of the
/// underlying measure.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Hermite rule for the standard normal density (weights sum to 1).
GaussRule gauss_hermite_rule(int order);
/// Gaussian rule for the half-line measure phi(x) dx on [0, inf) (weights
/// sum to 1/2), built by discretized Stieltjes + Golub-Welsch.
GaussRule half_gauss_hermite_rule(int order);
/// Gauss-Legendre rule on [lo, hi].
GaussRule gauss_legendre_rule(int order, double lo, double hi);

/// Tensorized Gaussian quadrature over independent standard normals.
struct QuadratureGrid {
  static constexpr int kDefaultOrder = 48;
  static constexpr int kMinOrder = 8;
  static constexpr int kMaxOrder = 256;

  int order = 0;
  GaussRule full;  // standard normal on R
  GaussRule half;  // standard normal restricted to [0, inf)
  GaussRule panel;  // Gauss-Legendre on [0,1] with max(4, order/8) nodes

  /// Throws InvalidArgument outside [kMinOrder, kMaxOrder].
  explicit QuadratureGrid(int order = kDefaultOrder);
};

/// Label channel Y = phi((S sqrt(k/a) + Z sqrt(1 - k/a)) / sqrt(rho)).
struct LabelChannel {
  ModelKind model = ModelKind::linear_regression;
  double kappa_over_alpha = 1.0;
  double rho = 1.0;
};

/// E[M_{l(Y;.)}(rH + qS; b)] and its partial derivatives.
struct ExpectedEnvelope {
  double value = 0.0;
  double d_q = 0.0;
  double d_r = 0.0;
  double d_b = 0.0;
};

/// Evaluates the expectation by rotating (S, Z) onto the label direction
/// G = S c + Z d (c = sqrt(k/a), d = sqrt(1 - k/a)), so that
/// rH + qS = q c G + s W with s = sqrt(r^2 + q^2 d^2) and W independent of G.
/// Regression integrates (G, W) on the full Gauss-Hermite grid. For
/// classification Y = sign(G); the loss symmetry l(-1;x) = l(1;-x) folds the
/// G < 0 half onto G > 0, leaving a smooth integrand on the half-line rule.
/// For the logistic loss the W integral switches to composite Gauss-Legendre
/// panels graded towards the envelope's bends when those are sharp.
ExpectedEnvelope expected_envelope(const LossKernel& loss,
                                   const LabelChannel& channel, double q,
                                   double r, double b,
                                   const QuadratureGrid& grid);

double expected_moreau(const LossKernel& loss, const LabelChannel& channel,
                       double q, double r, double b,
                       const QuadratureGrid& grid);

/// Reference route: plain 3-D tensor Gauss-Hermite over (S, Z, H). Slower
/// and, for classification, only algebraically convergent because of the
/// sign discontinuity. Used to cross-check the rotated evaluation.
double expected_moreau_tensor(const LossKernel& loss,
                              const LabelChannel& channel, double q, double r,
                              double b, const QuadratureGrid& grid);

}  // namespace mtl
