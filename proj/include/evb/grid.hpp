#pragma once

// Sampling grids. Cartesian grids include the axis (vortex cores vanish there
// analytically); polar grids offset the first radial node by half a cell so
// r = 0 is never touched. Quadrature weights carry the area element:
// trapezoid x trapezoid on Cartesian, midpoint-in-r x rectangle-in-phi with
// the r Jacobian on polar.

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "evb/modes.hpp"

namespace evb {

struct Grid {
  enum class Kind { cartesian, polar };

  Kind kind = Kind::cartesian;
  // cartesian: x, y in [-half_extent, half_extent], spacing 2 he / (n - 1)
  int nx = 0, ny = 0;
  double half_extent = 0.0;
  // polar: r_i = (i + 1/2) hr with hr = r_max / nr, phi_j = j 2 pi / nphi
  int nr = 0, nphi = 0;
  double r_max = 0.0;

  static Grid cartesian(int nx, int ny, double half_extent) {
    if (nx < 8 || ny < 8) throw std::domain_error("cartesian grid: counts must be >= 8");
    if (!(half_extent > 0.0)) throw std::domain_error("cartesian grid: extent must be > 0");
    Grid g;
    g.kind = Kind::cartesian;
    g.nx = nx;
    g.ny = ny;
    g.half_extent = half_extent;
    return g;
  }

  static Grid polar(int nr, int nphi, double r_max) {
    if (nr < 8 || nphi < 8) throw std::domain_error("polar grid: counts must be >= 8");
    if (!(r_max > 0.0)) throw std::domain_error("polar grid: r_max must be > 0");
    Grid g;
    g.kind = Kind::polar;
    g.nr = nr;
    g.nphi = nphi;
    g.r_max = r_max;
    return g;
  }

  bool is_polar() const { return kind == Kind::polar; }
  std::size_t size() const {
    return is_polar() ? static_cast<std::size_t>(nr) * nphi
                      : static_cast<std::size_t>(nx) * ny;
  }

  double hx() const { return 2.0 * half_extent / (nx - 1); }
  double hy() const { return 2.0 * half_extent / (ny - 1); }
  double hr() const { return r_max / nr; }
  double dphi() const { return 2.0 * pi / nphi; }
  // Smallest linear spacing, for resolution guards.
  double min_spacing() const {
    if (!is_polar()) return std::min(hx(), hy());
    return std::min(hr(), 0.5 * hr() * dphi());  // innermost arc length
  }

  double x(int ix) const { return -half_extent + ix * hx(); }
  double y(int iy) const { return -half_extent + iy * hy(); }
  double r(int ir) const { return (ir + 0.5) * hr(); }
  double phi(int iphi) const { return iphi * dphi(); }

  // Flat index layout: cartesian iy * nx + ix (rows of constant y),
  // polar ir * nphi + iphi (rings of constant r).
  std::size_t index(int a, int b) const {
    return is_polar() ? static_cast<std::size_t>(a) * nphi + b
                      : static_cast<std::size_t>(a) * nx + b;
  }

  struct Point {
    double x, y, r, phi;
  };

  Point point(std::size_t idx) const {
    Point p{};
    if (is_polar()) {
      const int ir = static_cast<int>(idx / nphi);
      const int ip = static_cast<int>(idx % nphi);
      p.r = r(ir);
      p.phi = phi(ip);
      p.x = p.r * std::cos(p.phi);
      p.y = p.r * std::sin(p.phi);
    } else {
      const int iy = static_cast<int>(idx / nx);
      const int ix = static_cast<int>(idx % nx);
      p.x = x(ix);
      p.y = y(iy);
      p.r = std::hypot(p.x, p.y);
      p.phi = std::atan2(p.y, p.x);
    }
    return p;
  }

  // Quadrature weight (area element included). The polar rule is composite
  // midpoint in r with an Euler-Maclaurin end correction at the axis (the
  // integrand r f(r) has a nonzero slope at r = 0 for l = 0 modes, which
  // would otherwise leave an O(h^2) error); weights 13/12, 7/8, 25/24 on the
  // three innermost rings cancel that term.
  double weight(std::size_t idx) const {
    if (is_polar()) {
      const int ir = static_cast<int>(idx / nphi);
      double c = 1.0;
      if (ir == 0)
        c = 13.0 / 12.0;
      else if (ir == 1)
        c = 7.0 / 8.0;
      else if (ir == 2)
        c = 25.0 / 24.0;
      return c * r(ir) * hr() * dphi();
    }
    const int iy = static_cast<int>(idx / nx);
    const int ix = static_cast<int>(idx % nx);
    const double wx = (ix == 0 || ix == nx - 1) ? 0.5 : 1.0;
    const double wy = (iy == 0 || iy == ny - 1) ? 0.5 : 1.0;
    return wx * wy * hx() * hy();
  }

  bool same_as(const Grid& o) const {
    if (kind != o.kind) return false;
    if (is_polar()) return nr == o.nr && nphi == o.nphi && r_max == o.r_max;
    return nx == o.nx && ny == o.ny && half_extent == o.half_extent;
  }
};

}  // namespace evb
