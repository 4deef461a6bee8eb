#include "mtl/saddle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mtl::saddle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fd_step(double v) { return 1e-5 * std::max(1.0, std::abs(v)); }

// Replaces every eigenvalue by -max(|lambda|, floor); returns the ascent step
// -H'^{-1} g, which is a Newton step wherever H is already negative definite.
VectorXd ascent_step(const MatrixXd& h, const VectorXd& g) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (h + h.transpose()));
  const VectorXd& lam = eig.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double floor = 1e-10 * scale;
  VectorXd coeff = eig.eigenvectors().transpose() * g;
  for (int i = 0; i < coeff.size(); ++i) {
    coeff[i] /= std::max(std::abs(lam[i]), floor);
  }
  return eig.eigenvectors() * coeff;
}

// Positive-definite counterpart for the outer minimization.
VectorXd descent_step(const MatrixXd& h, const VectorXd& g) {
  return -ascent_step(h, g);
}

VectorXd select(const VectorXd& v, const Mask& keep) {
  VectorXd out(keep.count());
  for (int i = 0, j = 0; i < v.size(); ++i) {
    if (keep[i]) out[j++] = v[i];
  }
  return out;
}

}  // namespace

VectorXd Objective::dual_lower() const { return VectorXd::Constant(duals(), -kInf); }
VectorXd Objective::dual_upper() const { return VectorXd::Constant(duals(), kInf); }

InnerResult maximize_dual(const Objective& f, const VectorXd& x,
                          const VectorXd& y0, const Options& opts) {
  const int d = f.duals();
  const VectorXd lo = f.dual_lower();
  const VectorXd hi = f.dual_upper();

  InnerResult res;
  res.y = y0.cwiseMax(lo).cwiseMin(hi);
  if (!f.dual_feasible(res.y)) res.y = f.initial_dual();
  res.value = f.value(x, res.y);
  res.at_bound = Mask::Constant(d, false);

  VectorXd gx(2 * f.pairs());
  VectorXd gy(d);
  for (int it = 0; it < opts.max_inner; ++it) {
    f.gradient(x, res.y, gx, gy);
    Mask free(d);
    for (int i = 0; i < d; ++i) {
      const bool at_lo = res.y[i] <= lo[i] && gy[i] < 0.0;
      const bool at_hi = res.y[i] >= hi[i] && gy[i] > 0.0;
      free[i] = !(at_lo || at_hi);
      res.at_bound[i] = !free[i];
    }
    res.gy = gy;
    double gmax = 0.0;
    for (int i = 0; i < d; ++i) {
      if (free[i]) gmax = std::max(gmax, std::abs(gy[i]));
    }
    if (gmax <= 1e-13 * std::max(1.0, std::abs(res.value))) {
      res.converged = true;
      return res;
    }

    // Finite-difference Hessian of the analytic dual gradient.
    MatrixXd h(d, d);
    for (int j = 0; j < d; ++j) {
      const double step = fd_step(res.y[j]);
      VectorXd yp = res.y, ym = res.y;
      yp[j] += step;
      ym[j] -= step;
      VectorXd gp(d), gm(d), tmp(2 * f.pairs());
      const bool fp = f.dual_feasible(yp);
      const bool fm = f.dual_feasible(ym);
      if (fp && fm) {
        f.gradient(x, yp, tmp, gp);
        f.gradient(x, ym, tmp, gm);
        h.col(j) = (gp - gm) / (2.0 * step);
      } else if (fp) {
        f.gradient(x, yp, tmp, gp);
        h.col(j) = (gp - gy) / step;
      } else {
        f.gradient(x, ym, tmp, gm);
        h.col(j) = (gy - gm) / step;
      }
    }
    MatrixXd hf(free.count(), free.count());
    for (int i = 0, a = 0; i < d; ++i) {
      if (!free[i]) continue;
      for (int j = 0, b = 0; j < d; ++j) {
        if (!free[j]) continue;
        hf(a, b++) = h(i, j);
      }
      ++a;
    }
    const VectorXd sf = ascent_step(hf, select(gy, free));
    VectorXd step = VectorXd::Zero(d);
    for (int i = 0, a = 0; i < d; ++i) {
      if (free[i]) step[i] = sf[a++];
    }
    const double cap = 10.0 * std::max(1.0, res.y.cwiseAbs().maxCoeff());
    const double smax = step.cwiseAbs().maxCoeff();
    if (smax > cap) step *= cap / smax;

    bool accepted = false;
    double t = 1.0;
    const double slack = 1e-13 * std::max(1.0, std::abs(res.value));
    VectorXd y_new;
    double v_new = 0.0;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      y_new = (res.y + t * step).cwiseMax(lo).cwiseMin(hi);
      if (!f.dual_feasible(y_new)) continue;
      v_new = f.value(x, y_new);
      if (std::isfinite(v_new) && v_new >= res.value - slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double moved = (y_new - res.y).cwiseAbs().maxCoeff();
    res.y = y_new;
    res.value = v_new;
    if (moved <= 1e-15 * std::max(1.0, res.y.cwiseAbs().maxCoeff())) {
      f.gradient(x, res.y, gx, res.gy);
      res.converged = true;
      return res;
    }
  }
  f.gradient(x, res.y, gx, res.gy);
  double gmax = 0.0;
  for (int i = 0; i < d; ++i) {
    if (!res.at_bound[i]) gmax = std::max(gmax, std::abs(res.gy[i]));
  }
  res.converged = gmax <= 1e-8 * std::max(1.0, std::abs(res.value));
  return res;
}

namespace {

struct OuterState {
  VectorXd x;
  InnerResult inner;
};

OuterState evaluate(const Objective& f, const VectorXd& x, const VectorXd& y0,
                    const Options& opts) {
  return {x, maximize_dual(f, x, y0, opts)};
}

VectorXd initial_point(const Objective& f, const Options& opts) {
  const int m = f.pairs();
  static constexpr double kLevels[] = {0.1, 0.4, 1.0, 2.5, 6.0};
  VectorXd best;
  double best_value = kInf;
  for (double q : kLevels) {
    for (double r : kLevels) {
      VectorXd x(2 * m);
      x.head(m).setConstant(q);
      x.tail(m).setConstant(r);
      const InnerResult in = maximize_dual(f, x, f.initial_dual(), opts);
      if (in.value < best_value) {
        best_value = in.value;
        best = x;
      }
    }
  }
  return best;
}

double projected_gradient(const VectorXd& x, const VectorXd& gx, Mask* free) {
  double pg = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const bool active = x[i] <= 0.0 && gx[i] > 0.0;
    if (free) (*free)[i] = !active;
    if (!active) pg = std::max(pg, std::abs(gx[i]));
  }
  return pg;
}

void finalize(const Objective& f, const OuterState& s, Result& out,
              const Options& opts, double last_step) {
  VectorXd gx(2 * f.pairs()), gy(f.duals());
  f.gradient(s.x, s.inner.y, gx, gy);
  Mask free(gx.size());
  const double pg = projected_gradient(s.x, gx, &free);
  double gyf = 0.0;
  for (int i = 0; i < gy.size(); ++i) {
    if (!s.inner.at_bound[i]) gyf = std::max(gyf, std::abs(gy[i]));
  }
  out.x = s.x;
  out.y = s.inner.y;
  out.value = s.inner.value;
  out.residual = std::max(pg, gyf);
  out.x_at_bound = !free;
  out.y_at_bound = s.inner.at_bound;
  out.converged = out.residual <= opts.residual_tol &&
                  last_step <= opts.variable_tol && std::isfinite(out.value);
}

Result solve_newton(const Objective& f, const Options& opts, VectorXd x0) {
  const int n = 2 * f.pairs();
  const int d = f.duals();
  OuterState s = evaluate(f, x0.cwiseMax(0.0), f.initial_dual(), opts);
  Result out;
  double last_step = kInf;
  int it = 0;
  for (; it < opts.max_outer; ++it) {
    VectorXd gx(n), gy(d);
    f.gradient(s.x, s.inner.y, gx, gy);
    Mask xfree(n);
    const double pg = projected_gradient(s.x, gx, &xfree);
    if (pg <= opts.gradient_tol * std::max(1.0, std::abs(s.inner.value)) &&
        last_step <= opts.variable_tol) {
      break;
    }

    // Hessian of V(x) = max_y Phi(x, y): Phi_xx - Phi_xy Phi_yy^{-1} Phi_yx,
    // from central differences of the analytic gradient at the dual optimum.
    const Mask yfree = !s.inner.at_bound;
    MatrixXd jxx(n, n), jyx(d, n), jxy(n, d), jyy(d, d);
    VectorXd gxp(n), gyp(d), gxm(n), gym(d);
    for (int j = 0; j < n; ++j) {
      const double step = fd_step(s.x[j]);
      VectorXd xp = s.x, xm = s.x;
      xp[j] += step;
      xm[j] -= step;
      f.gradient(xp, s.inner.y, gxp, gyp);
      f.gradient(xm, s.inner.y, gxm, gym);
      jxx.col(j) = (gxp - gxm) / (2.0 * step);
      jyx.col(j) = (gyp - gym) / (2.0 * step);
    }
    for (int j = 0; j < d; ++j) {
      if (!yfree[j]) {
        jxy.col(j).setZero();
        jyy.col(j).setZero();
        continue;
      }
      const double step = fd_step(s.inner.y[j]);
      VectorXd yp = s.inner.y, ym = s.inner.y;
      yp[j] += step;
      ym[j] -= step;
      if (f.dual_feasible(yp) && f.dual_feasible(ym)) {
        f.gradient(s.x, yp, gxp, gyp);
        f.gradient(s.x, ym, gxm, gym);
        jxy.col(j) = (gxp - gxm) / (2.0 * step);
        jyy.col(j) = (gyp - gym) / (2.0 * step);
      } else {
        const bool plus = f.dual_feasible(yp);
        f.gradient(s.x, plus ? yp : ym, gxp, gyp);
        const double sign = plus ? 1.0 : -1.0;
        jxy.col(j) = sign * (gxp - gx) / step;
        jyy.col(j) = sign * (gyp - gy) / step;
      }
    }
    MatrixXd hv = 0.5 * (jxx + jxx.transpose());
    if (yfree.count() > 0) {
      const int df = static_cast<int>(yfree.count());
      MatrixXd a(df, df), bxy(n, df);
      for (int i = 0, p = 0; i < d; ++i) {
        if (!yfree[i]) continue;
        bxy.col(p) = 0.5 * (jxy.col(i) + jyx.row(i).transpose());
        for (int j = 0, r = 0; j < d; ++j) {
          if (!yfree[j]) continue;
          a(p, r++) = 0.5 * (jyy(i, j) + jyy(j, i));
        }
        ++p;
      }
      // Phi_yy is negative definite at an interior dual maximum; guard with
      // the same eigenvalue floor used by the inner solver.
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a);
      VectorXd lam = eig.eigenvalues();
      const double floor = 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff());
      for (int i = 0; i < lam.size(); ++i) lam[i] = -std::max(-lam[i], floor);
      const MatrixXd a_inv = eig.eigenvectors() * lam.cwiseInverse().asDiagonal() *
                             eig.eigenvectors().transpose();
      hv -= bxy * a_inv * bxy.transpose();
    }

    const int nf = static_cast<int>(xfree.count());
    MatrixXd hf(nf, nf);
    for (int i = 0, a = 0; i < n; ++i) {
      if (!xfree[i]) continue;
      for (int j = 0, b = 0; j < n; ++j) {
        if (!xfree[j]) continue;
        hf(a, b++) = hv(i, j);
      }
      ++a;
    }
    const VectorXd sf = descent_step(hf, select(gx, xfree));
    VectorXd step = VectorXd::Zero(n);
    for (int i = 0, a = 0; i < n; ++i) {
      if (xfree[i]) step[i] = sf[a++];
    }
    const double cap = 2.0 * std::max(1.0, s.x.cwiseAbs().maxCoeff());
    const double smax = step.cwiseAbs().maxCoeff();
    if (smax > cap) step *= cap / smax;

    const double slack = 1e-13 * std::max(1.0, std::abs(s.inner.value));
    bool accepted = false;
    double t = 1.0;
    OuterState next;
    for (int k = 0; k < 50; ++k, t *= 0.5) {
      const VectorXd xn = (s.x + t * step).cwiseMax(0.0);
      next = evaluate(f, xn, s.inner.y, opts);
      if (std::isfinite(next.inner.value) &&
          next.inner.value <= s.inner.value + slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    last_step = (next.x - s.x).cwiseAbs().maxCoeff();
    s = std::move(next);
    if (last_step == 0.0) break;
  }
  out.outer_iterations = it;
  finalize(f, s, out, opts, last_step);
  return out;
}

Result solve_simplex(const Objective& f, const Options& opts, VectorXd x0) {
  const int n = 2 * f.pairs();
  VectorXd warm = f.initial_dual();
  int evaluations = 0;
  auto objective = [&](const VectorXd& x) {
    ++evaluations;
    const InnerResult in = maximize_dual(f, x.cwiseAbs(), warm, opts);
    if (in.converged) warm = in.y;
    return in.value;
  };

  std::vector<VectorXd> pts(n + 1, x0.cwiseAbs());
  std::vector<double> vals(n + 1);
  for (int i = 0; i < n; ++i) pts[i + 1][i] += 0.2 * std::max(1.0, std::abs(x0[i]));
  for (int i = 0; i <= n; ++i) vals[i] = objective(pts[i]);

  std::vector<int> order(n + 1);
  double last_size = kInf;
  while (evaluations < opts.max_evaluations) {
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[n - 1];
    double size = 0.0;
    for (int i = 0; i <= n; ++i) {
      size = std::max(size, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
    }
    last_size = size;
    if (size < 1e-10 * std::max(1.0, pts[best].cwiseAbs().maxCoeff())) break;

    VectorXd centroid = VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= n;
    const VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = objective(xr);
    if (fr < vals[best]) {
      const VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = objective(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      const VectorXd xc = outside ? VectorXd(centroid + 0.5 * (xr - centroid))
                                  : VectorXd(centroid + 0.5 * (pts[worst] - centroid));
      const double fc = objective(xc);
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          vals[i] = objective(pts[i]);
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  const OuterState s = evaluate(f, pts[best].cwiseAbs(), warm, opts);
  Result out;
  out.outer_iterations = evaluations;
  finalize(f, s, out, opts, last_size);
  return out;
}

}  // namespace

Result solve(const Objective& f, const Options& opts,
             const std::optional<VectorXd>& x0) {
  const VectorXd start = x0 ? *x0 : initial_point(f, opts);
  if (opts.method == Method::simplex) return solve_simplex(f, opts, start);
  return solve_newton(f, opts, start);
}

}  // namespace mtl::saddle
