#pragma once

// Special functions backing the mode formulas: Bessel functions of the first
// kind with real non-negative order, generalized Laguerre polynomials, and
// Bessel zeros / first maxima for radial truncation and normalization.
//
// Accuracy contract: bessel_j better than 1e-10 absolute for nu <= 50,
// x <= 200; bessel_zero to 1e-9; laguerre exact up to rounding.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace evb::specfun {

// Bessel order. The beams only ever need nu = |l| or |l - alpha|, both >= 0.
struct Order {
  double nu;
  explicit Order(double value) : nu(value) {
    if (!std::isfinite(value) || value < 0.0)
      throw std::domain_error("Bessel order must be finite and non-negative, got " +
                              std::to_string(value));
  }
};

// J_nu(x), nu >= 0, x >= 0.
inline double bessel_j(Order order, double x) {
  if (!std::isfinite(x)) throw std::domain_error("bessel_j: non-finite argument");
  if (x < 0.0) throw std::domain_error("bessel_j: negative argument " + std::to_string(x));
  if (x == 0.0) return order.nu == 0.0 ? 1.0 : 0.0;
  return std::cyl_bessel_j(order.nu, x);
}

// dJ_nu/dx via J'_nu = (nu/x) J_nu - J_{nu+1}; only orders >= 0 are evaluated.
inline double bessel_j_prime(Order order, double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw std::domain_error("bessel_j_prime: argument must be finite and positive");
  return (order.nu / x) * bessel_j(order, x) - bessel_j(Order(order.nu + 1.0), x);
}

// Generalized Laguerre polynomial L_n^alpha(x) by the stable three-term
// recurrence (k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}.
inline double laguerre(int n, double alpha, double x) {
  if (n < 0) throw std::domain_error("laguerre: n must be non-negative");
  if (!std::isfinite(alpha) || !std::isfinite(x))
    throw std::domain_error("laguerre: non-finite input");
  if (n == 0) return 1.0;
  double lkm1 = 1.0;            // L_0
  double lk = 1.0 + alpha - x;  // L_1
  for (int k = 1; k < n; ++k) {
    const double lkp1 = ((2.0 * k + 1.0 + alpha - x) * lk - (k + alpha) * lkm1) / (k + 1.0);
    lkm1 = lk;
    lk = lkp1;
  }
  return lk;
}

namespace detail {

// Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must differ
// in sign. Refines to ~1e-13 relative.
template <class F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((flo < 0.0) != (fmid < 0.0)) {
      hi = mid;
    } else {
      lo = mid;
      flo = fmid;
    }
    if (hi - lo < 1e-13 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// m-th positive zero of J_nu (m >= 1). Sign-scan in steps well below the
// minimal zero spacing (~2.9 for nu ~ 0), then bisection plus Newton polish.
inline double bessel_zero(Order order, int m) {
  if (m < 1) throw std::domain_error("bessel_zero: m must be >= 1");
  const double nu = order.nu;
  // J_nu > 0 on (0, j_{nu,1}); start the scan inside that interval.
  double x = std::max(0.1, nu > 0.0 ? nu * (1.0 + 1e-3) : 0.1);
  double fx = bessel_j(order, x);
  while (fx == 0.0) {  // pathological start exactly on a zero
    x += 1e-6;
    fx = bessel_j(order, x);
  }
  const double step = 1.0;
  const double x_limit = x + 16.0 + (nu + 4.0 * std::cbrt(nu + 1.0) + 4.0) + step * 3.3 * m;
  int found = 0;
  while (x < x_limit) {
    const double x2 = x + step;
    const double f2 = bessel_j(order, x2);
    if ((fx < 0.0) != (f2 < 0.0)) {
      ++found;
      if (found == m) {
        double root = detail::bisect([&](double t) { return bessel_j(order, t); }, x, x2);
        for (int it = 0; it < 3; ++it) {  // Newton polish
          const double f = bessel_j(order, root);
          const double fp = bessel_j_prime(order, root);
          if (fp == 0.0) break;
          const double next = root - f / fp;
          if (next > x && next < x2) root = next;
        }
        return root;
      }
    }
    x = x2;
    fx = f2;
  }
  throw std::runtime_error("bessel_zero: failed to bracket zero m=" + std::to_string(m) +
                           " of order nu=" + std::to_string(nu));
}

// Peak value max_x J_nu(x), used to scale Bessel beams to unit peak
// amplitude. The global maximum sits at the first zero of J'_nu.
inline double bessel_peak(Order order) {
  if (order.nu == 0.0) return 1.0;  // J_0 peaks at the origin
  const double j1 = bessel_zero(order, 1);
  double lo = std::max(1e-8, 1e-3 * j1);
  double hi = j1 * (1.0 - 1e-9);
  if (bessel_j_prime(order, lo) <= 0.0 || bessel_j_prime(order, hi) >= 0.0)
    throw std::runtime_error("bessel_peak: derivative bracket failed for nu=" +
                             std::to_string(order.nu));
  const double xmax =
      detail::bisect([&](double t) { return bessel_j_prime(order, t); }, lo, hi);
  return bessel_j(order, xmax);
}

}  // namespace evb::specfun
