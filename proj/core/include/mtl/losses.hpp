#pragma once

#include "mtl/model.hpp"

namespace mtl {

/// Moreau envelope M(a;b) = min_x l(y;x) + (x-a)^2/(2b) evaluated together
/// with the quantities the saddle solvers need.
struct Envelope {
  double value = 0.0;      // M(a;b)
  double prox = 0.0;       // argmin x
  double grad = 0.0;       // dM/da = (a - prox)/b
  double curvature = 0.0;  // d2M/da2 = l''(prox) / (1 + b l''(prox))
  double grad_b = 0.0;     // dM/db = -(prox - a)^2 / (2 b^2)
};

/// Scalar loss kernel for the squared loss 0.5 (x - y)^2 and the logistic
/// loss log(1 + exp(-x y)). Stateless apart from the kind; cheap to copy.
class LossKernel {
 public:
  explicit LossKernel(LossKind kind) : kind_(kind) {}

  LossKind kind() const { return kind_; }

  double value(double y, double x) const;
  double derivative(double y, double x) const;
  double second_derivative(double y, double x) const;

  /// Unique minimizer of l(y;x) + (x-a)^2/(2b). Requires b > 0.
  double prox(double y, double a, double b) const;
  double moreau(double y, double a, double b) const;
  double moreau_grad(double y, double a, double b) const;
  Envelope envelope(double y, double a, double b) const;

 private:
  LossKind kind_;
};

namespace logistic {
/// log(1 + exp(z)) without overflow; switches form at |z| = 30.
double softplus(double z);
/// 1 / (1 + exp(-z)) without overflow.
double sigmoid(double z);
/// Safeguarded Newton for x - a + b l'(y;x) = 0 on the bracket spanned by
/// a and a + b y. Returns the number of iterations through `iterations`.
double prox(double y, double a, double b, int* iterations = nullptr);
}  // namespace logistic

}  // namespace mtl
