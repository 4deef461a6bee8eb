#include "mtl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtl/error.hpp"

namespace mtl {

namespace logistic {

namespace {
constexpr double kCutoff = 30.0;
constexpr int kMaxIterations = 200;
}  // namespace

double softplus(double z) {
  if (z > kCutoff) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double prox(double y, double a, double b, int* iterations) {
  if (y == 0.0) {
    if (iterations) *iterations = 0;
    return a;
  }
  // x* = a + b y s with s in (0,1), so the root lies between a and a + b y.
  double lo = std::min(a, a + b * y);
  double hi = std::max(a, a + b * y);
  const double tol = 1e-12 * std::max(1.0, std::abs(a));
  auto residual = [&](double x) { return x - a - b * y * sigmoid(-x * y); };

  double x = a;
  double last = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < kMaxIterations; ++it) {
    const double g = residual(x);
    if (std::abs(g) <= tol) break;
    // Newton can cycle across the sigmoid's inflection; bisect whenever it
    // fails to halve the residual.
    const bool slow = std::abs(g) > 0.5 * last;
    last = std::abs(g);
    if (g > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double s = sigmoid(x * y);
    const double slope = 1.0 + b * y * y * s * (1.0 - s);
    double next = x - g / slope;
    if (slow || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  if (iterations) *iterations = it;
  return x;
}

}  // namespace logistic

double LossKernel::value(double y, double x) const {
  if (kind_ == LossKind::squared) return 0.5 * (x - y) * (x - y);
  return logistic::softplus(-x * y);
}

double LossKernel::derivative(double y, double x) const {
  if (kind_ == LossKind::squared) return x - y;
  return -y * logistic::sigmoid(-x * y);
}

double LossKernel::second_derivative(double y, double x) const {
  if (kind_ == LossKind::squared) return 1.0;
  const double s = logistic::sigmoid(x * y);
  return y * y * s * (1.0 - s);
}

double LossKernel::prox(double y, double a, double b) const {
  if (!(b > 0.0)) throw InvalidArgument("prox: b must be > 0");
  if (kind_ == LossKind::squared) return (a + b * y) / (1.0 + b);
  return logistic::prox(y, a, b);
}

double LossKernel::moreau(double y, double a, double b) const {
  if (!(b > 0.0)) throw InvalidArgument("moreau: b must be > 0");
  if (kind_ == LossKind::squared) return (a - y) * (a - y) / (2.0 * (1.0 + b));
  const double x = logistic::prox(y, a, b);
  return value(y, x) + (x - a) * (x - a) / (2.0 * b);
}

double LossKernel::moreau_grad(double y, double a, double b) const {
  if (!(b > 0.0)) throw InvalidArgument("moreau_grad: b must be > 0");
  if (kind_ == LossKind::squared) return (a - y) / (1.0 + b);
  return (a - logistic::prox(y, a, b)) / b;
}

Envelope LossKernel::envelope(double y, double a, double b) const {
  if (!(b > 0.0)) throw InvalidArgument("envelope: b must be > 0");
  Envelope e;
  if (kind_ == LossKind::squared) {
    const double d = a - y;
    e.prox = (a + b * y) / (1.0 + b);
    e.value = d * d / (2.0 * (1.0 + b));
    e.grad = d / (1.0 + b);
    e.curvature = 1.0 / (1.0 + b);
    e.grad_b = -d * d / (2.0 * (1.0 + b) * (1.0 + b));
    return e;
  }
  const double x = logistic::prox(y, a, b);
  const double h = second_derivative(y, x);
  e.prox = x;
  e.value = value(y, x) + (x - a) * (x - a) / (2.0 * b);
  e.grad = (a - x) / b;
  e.curvature = h / (1.0 + b * h);
  e.grad_b = -0.5 * e.grad * e.grad;
  return e;
}

}  // namespace mtl
