#include "mtl/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtl/error.hpp"

namespace mtl {

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix, weights
// are mass * (first eigenvector component)^2.
GaussRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                       double mass) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) jacobi(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = off[i];
    jacobi(i + 1, i) = off[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()[i];
    const double v = eig.eigenvectors()(0, i);
    rule.weights[i] = mass * v * v;
  }
  return rule;
}

// Orthonormal probabilists' Hermite values psi_0..psi_{n} at x.
void hermite_orthonormal(int n, double x, std::vector<double>& psi) {
  psi.assign(n + 1, 0.0);
  psi[0] = 1.0;
  if (n >= 1) psi[1] = x;
  for (int k = 1; k < n; ++k) {
    psi[k + 1] = (x * psi[k] - std::sqrt(static_cast<double>(k)) * psi[k - 1]) /
                 std::sqrt(static_cast<double>(k + 1));
  }
}

}  // namespace

GaussRule gauss_hermite_rule(int order) {
  if (order < 1) throw InvalidArgument("gauss_hermite_rule: order must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd off(std::max(order - 1, 0));
  for (int k = 0; k + 1 < order; ++k) off[k] = std::sqrt(static_cast<double>(k + 1));
  GaussRule rule = golub_welsch(diag, off, 1.0);

  // Newton polish on psi_n, then Christoffel weights 1 / sum psi_k^2, which
  // keeps full relative accuracy for the tiny tail weights.
  std::vector<double> psi;
  const double sqrt_n = std::sqrt(static_cast<double>(order));
  for (int i = 0; i < order; ++i) {
    double x = rule.nodes[i];
    for (int it = 0; it < 4; ++it) {
      hermite_orthonormal(order, x, psi);
      const double dx = psi[order] / (sqrt_n * psi[order - 1]);
      x -= dx;
      if (std::abs(dx) < 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    hermite_orthonormal(order - 1, x, psi);
    double sum = 0.0;
    for (int k = 0; k < order; ++k) sum += psi[k] * psi[k];
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / sum;
  }
  // Exact symmetry about zero.
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

GaussRule gauss_legendre_rule(int order, double lo, double hi) {
  if (order < 1) throw InvalidArgument("gauss_legendre_rule: order must be >= 1");
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  for (int i = 0; i < order; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.nodes[i] = mid - half * z;
    rule.weights[i] = 2.0 * half / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

GaussRule half_gauss_hermite_rule(int order) {
  if (order < 1) {
    throw InvalidArgument("half_gauss_hermite_rule: order must be >= 1");
  }
  // Discretize phi(x) dx on [0, L] with composite Gauss-Legendre. The order-n
  // nodes stay below ~sqrt(4n) + 4, far inside L.
  const double length = std::max(40.0, 2.0 * std::sqrt(4.0 * order) + 10.0);
  const int panels = static_cast<int>(std::ceil(length / 0.25));
  const GaussRule panel_rule = gauss_legendre_rule(20, 0.0, 1.0);
  std::vector<double> x;
  std::vector<double> w;
  x.reserve(panels * panel_rule.size());
  w.reserve(panels * panel_rule.size());
  const double width = length / panels;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (int p = 0; p < panels; ++p) {
    for (int i = 0; i < panel_rule.size(); ++i) {
      const double xi = (p + panel_rule.nodes[i]) * width;
      x.push_back(xi);
      w.push_back(panel_rule.weights[i] * width * inv_sqrt_2pi *
                  std::exp(-0.5 * xi * xi));
    }
  }
  const std::size_t m = x.size();

  // Stieltjes procedure on orthonormal polynomials:
  // sqrt(beta_{k+1}) pi_{k+1} = (x - alpha_k) pi_k - sqrt(beta_k) pi_{k-1}.
  double mass = 0.0;
  for (double wj : w) mass += wj;
  Eigen::VectorXd alpha(order);
  Eigen::VectorXd off(std::max(order - 1, 0));
  std::vector<double> prev(m, 0.0);
  std::vector<double> cur(m, 1.0 / std::sqrt(mass));
  std::vector<double> next(m);
  double prev_off = 0.0;
  for (int k = 0; k < order; ++k) {
    double a = 0.0;
    for (std::size_t j = 0; j < m; ++j) a += w[j] * x[j] * cur[j] * cur[j];
    alpha[k] = a;
    if (k + 1 == order) break;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      next[j] = (x[j] - a) * cur[j] - prev_off * prev[j];
      norm2 += w[j] * next[j] * next[j];
    }
    const double b = std::sqrt(norm2);
    off[k] = b;
    for (std::size_t j = 0; j < m; ++j) {
      prev[j] = cur[j];
      cur[j] = next[j] / b;
    }
    prev_off = b;
  }
  return golub_welsch(alpha, off, mass);
}

QuadratureGrid::QuadratureGrid(int order_) : order(order_) {
  if (order < kMinOrder || order > kMaxOrder) {
    throw InvalidArgument("QuadratureGrid: order must lie in [" +
                          std::to_string(kMinOrder) + ", " +
                          std::to_string(kMaxOrder) + "]");
  }
  full = gauss_hermite_rule(order);
  half = half_gauss_hermite_rule(order);
  panel = gauss_legendre_rule(std::max(4, order / 8), 0.0, 1.0);
}

namespace {

constexpr double kTail = 9.0;       // |W| beyond this carries < 1e-18 mass
constexpr double kSharpWidth = 0.25;  // bends narrower than this get panels

// Composite Gauss-Legendre nodes for E[f(W)], W ~ N(0,1), on [-kTail, kTail]
// with unit panels plus panels graded geometrically towards each centre.
void graded_normal_rule(const double* centres, int count, double width,
                        const GaussRule& panel, std::vector<double>& x,
                        std::vector<double>& w) {
  std::vector<double> cuts;
  for (double c = -kTail; c <= kTail; c += 1.0) cuts.push_back(c);
  for (int i = 0; i < count; ++i) {
    const double c = centres[i];
    if (!(std::abs(c) < kTail + 1.0)) continue;
    cuts.push_back(c);
    for (double off = width; off < 1.0; off *= 2.0) {
      cuts.push_back(c - off);
      cuts.push_back(c + off);
    }
  }
  for (double& c : cuts) c = std::clamp(c, -kTail, kTail);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a < 1e-14; }),
             cuts.end());
  x.clear();
  w.clear();
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double len = cuts[k + 1] - lo;
    for (int i = 0; i < panel.size(); ++i) {
      const double xi = lo + len * panel.nodes[i];
      x.push_back(xi);
      w.push_back(len * panel.weights[i] * inv_sqrt_2pi * std::exp(-0.5 * xi * xi));
    }
  }
}

void check_channel(const LabelChannel& channel, double b) {
  if (!(b > 0.0)) throw InvalidArgument("expected_envelope: b must be > 0");
  if (!(channel.kappa_over_alpha >= 0.0 && channel.kappa_over_alpha <= 1.0)) {
    throw InvalidArgument("expected_envelope: kappa/alpha must lie in [0,1]");
  }
  if (channel.model == ModelKind::linear_regression && !(channel.rho > 0.0)) {
    throw InvalidArgument(
        "expected_envelope: regression labels need rho > 0 (scale 1/sqrt(rho))");
  }
}

}  // namespace

ExpectedEnvelope expected_envelope(const LossKernel& loss,
                                   const LabelChannel& channel, double q,
                                   double r, double b,
                                   const QuadratureGrid& grid) {
  check_channel(channel, b);
  const double c = std::sqrt(channel.kappa_over_alpha);
  const double d2 = std::max(0.0, 1.0 - channel.kappa_over_alpha);
  const double s = std::sqrt(r * r + q * q * d2);
  const bool regression = channel.model == ModelKind::linear_regression;
  GaussRule graded;
  const double outer_scale = regression ? 1.0 : 2.0;
  const double label_scale = regression ? 1.0 / std::sqrt(channel.rho) : 0.0;
  // Below this s the W-derivative is taken in its Stein limit E[M''].
  const bool stein = s < 1e-12;

  ExpectedEnvelope out;
  double e_gm1 = 0.0;  // E[G M']
  double e_wm1 = 0.0;  // E[W M'] / s, or E[M''] in the Stein limit
  // The logistic envelope M(y; a) bends near a = 0 and a = -b y over a width
  // of about 1/|y|; once that is narrow on the W scale, Gauss-Hermite cannot
  // resolve it and a graded composite rule takes over.
  const bool bends = loss.kind() == LossKind::logistic && !stein;
  // With y proportional to G the same bends turn into a |G|-like kink at
  // G = 0, of width about sqrt(rho)/s, or sqrt(rho/b) where b y^2 ~ 1.
  const double kink =
      regression ? std::sqrt(channel.rho) * std::min(1.0 / s, 1.0 / std::sqrt(b)) : 1.0;
  if (regression && bends) {
    const double centre = 0.0;
    graded_normal_rule(&centre, 1, std::min(kink, kSharpWidth), grid.panel,
                       graded.nodes, graded.weights);
  }
  const GaussRule& outer =
      !graded.nodes.empty() ? graded : (regression ? grid.full : grid.half);
  std::vector<double> gx, gw;
  for (int i = 0; i < outer.size(); ++i) {
    const double g = outer.nodes[i];
    const double wg = outer_scale * outer.weights[i];
    const double y = regression ? g * label_scale : 1.0;
    const double mean = q * c * g;
    const double* nodes = grid.full.nodes.data();
    const double* weights = grid.full.weights.data();
    int count = grid.full.size();
    const double width = 1.0 / (std::abs(y) * s);
    if (bends && y != 0.0 && width < kSharpWidth) {
      const double centres[2] = {-mean / s, (-b * y - mean) / s};
      graded_normal_rule(centres, 2, width, grid.panel, gx, gw);
      nodes = gx.data();
      weights = gw.data();
      count = static_cast<int>(gx.size());
    }
    double v = 0.0, m1 = 0.0, mw = 0.0, mb = 0.0;
    for (int j = 0; j < count; ++j) {
      const double wj = weights[j];
      const double wn = nodes[j];
      const Envelope e = loss.envelope(y, mean + s * wn, b);
      v += wj * e.value;
      m1 += wj * e.grad;
      mw += wj * (stein ? e.curvature : e.grad * wn);
      mb += wj * e.grad_b;
    }
    out.value += wg * v;
    e_gm1 += wg * g * m1;
    e_wm1 += wg * mw;
    out.d_b += wg * mb;
  }
  const double w_factor = stein ? 1.0 : 1.0 / s;
  out.d_q = c * e_gm1 + q * d2 * e_wm1 * w_factor;
  out.d_r = r * e_wm1 * w_factor;
  return out;
}

double expected_moreau(const LossKernel& loss, const LabelChannel& channel,
                       double q, double r, double b,
                       const QuadratureGrid& grid) {
  return expected_envelope(loss, channel, q, r, b, grid).value;
}

double expected_moreau_tensor(const LossKernel& loss,
                              const LabelChannel& channel, double q, double r,
                              double b, const QuadratureGrid& grid) {
  check_channel(channel, b);
  const double c = std::sqrt(channel.kappa_over_alpha);
  const double d = std::sqrt(std::max(0.0, 1.0 - channel.kappa_over_alpha));
  const double scale = 1.0 / std::sqrt(channel.rho > 0.0 ? channel.rho : 1.0);
  const GaussRule& rule = grid.full;
  double total = 0.0;
  for (int i = 0; i < rule.size(); ++i) {      // S
    for (int j = 0; j < rule.size(); ++j) {    // Z
      const double latent = rule.nodes[i] * c + rule.nodes[j] * d;
      const double y = channel.model == ModelKind::linear_regression
                           ? scale * latent
                           : (latent >= 0.0 ? 1.0 : -1.0);
      double inner = 0.0;
      for (int k = 0; k < rule.size(); ++k) {  // H
        inner += rule.weights[k] *
                 loss.moreau(y, r * rule.nodes[k] + q * rule.nodes[i], b);
      }
      total += rule.weights[i] * rule.weights[j] * inner;
    }
  }
  return total;
}

}  // namespace mtl
