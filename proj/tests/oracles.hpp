#pragma once

// Reference implementations used to pin expected values in tests.
// Everything here is deliberately independent of the library under test:
// plain Eigen calls, dense grids, quadrature by adaptive Simpson, and
// finite differences. Slow and simple on purpose.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// One-dimensional minimization: dense grid followed by golden-section
// refinement inside the winning bracket.

inline double golden_refine(const std::function<double(double)>& f, double lo, double hi,
                            int iters = 200) {
  const double inv_phi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-14; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2;
}

struct GridMin {
  double x;
  double fx;
};

inline GridMin grid_min(const std::function<double(double)>& f, double lo, double hi,
                        int points = 200001) {
  double best_x = lo, best_f = f(lo);
  for (int i = 1; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  const double h = (hi - lo) / (points - 1);
  const double x = golden_refine(f, std::max(lo, best_x - 2 * h), std::min(hi, best_x + 2 * h));
  return {x, f(x)};
}

/// All local grid minima whose value is within `slack` of the global
/// minimum (deduplicated by bracket), refined by golden section.
inline std::vector<GridMin> grid_global_minimizers(const std::function<double(double)>& f,
                                                   double lo, double hi, int points = 200001,
                                                   double slack = 1e-9) {
  std::vector<double> xs(points), fs(points);
  double fmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    xs[i] = lo + (hi - lo) * i / (points - 1);
    fs[i] = f(xs[i]);
    fmin = std::min(fmin, fs[i]);
  }
  std::vector<GridMin> out;
  for (int i = 1; i + 1 < points; ++i) {
    if (fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1] && fs[i] <= fmin + slack) {
      const double x = golden_refine(f, xs[i - 1], xs[i + 1]);
      out.push_back({x, f(x)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature.

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fb, double fm) {
  return (b - a) / 6 * (fa + 4 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a, double b, double fa,
                       double fb, double fm, double whole, double tol, int depth) {
  const double m = (a + b) / 2;
  const double lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, fm, flm);
  const double right = simpson(f, m, b, fm, fb, frm);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol)
    return left + right + (left + right - whole) / 15;
  return adaptive(f, a, m, fa, fm, flm, left, tol / 2, depth - 1) +
         adaptive(f, m, b, fm, fb, frm, right, tol / 2, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  const double m = (a + b) / 2;
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = detail::simpson(f, a, b, fa, fb, fm);
  return detail::adaptive(f, a, b, fa, fb, fm, whole, tol, 60);
}

/// E[g(z)] for z ~ N(mean, var) by quadrature over mean +- 12 sigma.
inline double normal_expect(const std::function<double(double)>& g, double mean, double var,
                            double tol = 1e-12) {
  const double sd = std::sqrt(var);
  const double inv_norm = 1.0 / (sd * std::sqrt(2 * M_PI));
  auto integrand = [&](double z) {
    const double u = (z - mean) / sd;
    return g(z) * inv_norm * std::exp(-0.5 * u * u);
  };
  return integrate(integrand, mean - 12 * sd, mean + 12 * sd, tol);
}

// ---------------------------------------------------------------------------
// Finite differences.

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

inline Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
                      double h = 1e-4) {
  const Eigen::Index d = x.size();
  Mat hess(d, d);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      if (i == j) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        hess(i, i) = (f(xp) - 2 * f0 + f(xm)) / (h * h);
      } else {
        Vec xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += h;
        xpp[j] += h;
        xpm[i] += h;
        xpm[j] -= h;
        xmp[i] -= h;
        xmp[j] += h;
        xmm[i] -= h;
        xmm[j] -= h;
        hess(i, j) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4 * h * h);
        hess(j, i) = hess(i, j);
      }
    }
  }
  return hess;
}

// ---------------------------------------------------------------------------
// Dense linear-model references.

/// Ridge solution (X^T X + lambda I) theta = X^T y by full-pivot LU.
inline Vec ridge_solution(const Mat& x, const Vec& y, double lambda) {
  const Mat gram = x.transpose() * x + lambda * Mat::Identity(x.cols(), x.cols());
  return gram.fullPivLu().solve(x.transpose() * y);
}

/// Random SPD matrix with eigenvalues in [lo, hi], from a seeded QR.
inline Mat random_spd(int d, unsigned seed, double lo = 0.5, double hi = 4.0) {
  std::srand(seed);
  const Mat a = Mat::Random(d, d);
  const Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  Vec evals(d);
  for (int i = 0; i < d; ++i) evals[i] = lo + (hi - lo) * (i + 0.5) / d;
  return q * evals.asDiagonal() * q.transpose();
}

}  // namespace oracle
