#pragma once

// Quadrature expectation values: norms, canonical and kinetic OAM, spot size,
// magnetic moment, centroid, kinetic momentum. All reductions run in flat
// node order so results are bit-reproducible.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "evb/field.hpp"
#include "evb/grid.hpp"

namespace evb {

inline double norm_integral(const FieldMap& field) {
  double s = 0.0;
  for (std::size_t i = 0; i < field.grid.size(); ++i)
    s += field.grid.weight(i) * std::norm(field.psi[i]);
  return s;
}

namespace detail {

// Azimuthal harmonic weights W_m = 2 pi sum_r w_r r |u_m(r)|^2 on a polar
// grid; index m runs over [-nphi/2, nphi/2).
inline std::vector<std::pair<int, double>> azimuthal_weights(const FieldMap& field) {
  const Grid& g = field.grid;
  if (!g.is_polar()) throw std::logic_error("azimuthal_weights: polar grid required");
  const int nphi = g.nphi;
  std::vector<std::pair<int, double>> out;
  out.reserve(nphi);
  std::vector<cplx> phase(nphi);
  for (int mi = 0; mi < nphi; ++mi) {
    const int m = (mi <= nphi / 2) ? mi : mi - nphi;
    double wm = 0.0;
    for (int j = 0; j < nphi; ++j) phase[j] = std::polar(1.0 / nphi, -m * g.phi(j));
    for (int ir = 0; ir < g.nr; ++ir) {
      cplx um(0.0, 0.0);
      const cplx* row = field.psi.data() + g.index(ir, 0);
      for (int j = 0; j < nphi; ++j) um += row[j] * phase[j];
      wm += g.r(ir) * g.hr() * std::norm(um);
    }
    out.emplace_back(m, 2.0 * pi * wm);
  }
  return out;
}

// <L_z> by 4th-order stencils: integral of x Im(psi* d_y psi) - y Im(psi* d_x psi).
inline double canonical_oam_stencil(const FieldMap& field) {
  const auto grad = transverse_gradient(field.grid, field.psi);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    const Grid::Point p = field.grid.point(i);
    const double w = field.grid.weight(i);
    const cplx ps = std::conj(field.psi[i]);
    num += w * (p.x * std::imag(ps * grad[i][1]) - p.y * std::imag(ps * grad[i][0]));
    den += w * std::norm(field.psi[i]);
  }
  if (den == 0.0) throw std::invalid_argument("canonical_oam: zero-norm field");
  return num / den;
}

}  // namespace detail

// <psi| -i d_phi |psi> / <psi|psi>. Polar grids use the azimuthal spectral
// decomposition and cross-check it against the stencil route (disagreement
// means the phase is under-resolved); Cartesian grids use stencils only.
inline double canonical_oam(const FieldMap& field) {
  if (!field.grid.is_polar()) return detail::canonical_oam_stencil(field);
  const auto weights = detail::azimuthal_weights(field);
  double num = 0.0, den = 0.0;
  for (const auto& [m, wm] : weights) {
    num += m * wm;
    den += wm;
  }
  if (den == 0.0) throw std::invalid_argument("canonical_oam: zero-norm field");
  const double spectral = num / den;
  const double stencil = detail::canonical_oam_stencil(field);
  if (std::abs(spectral - stencil) > 1e-3 * (1.0 + std::abs(spectral)))
    throw std::runtime_error("canonical_oam: spectral and stencil routes disagree (" +
                             std::to_string(spectral) + " vs " + std::to_string(stencil) +
                             "); phase under-resolved");
  return spectral;
}

// <script L_z> = integral of r j_phi / integral of rho (m = 1).
inline double kinetic_oam(const CurrentMap& cur) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < cur.grid.size(); ++i) {
    const Grid::Point p = cur.grid.point(i);
    const double w = cur.grid.weight(i);
    num += w * (p.x * cur.j[i][1] - p.y * cur.j[i][0]);
    den += w * cur.rho[i];
  }
  if (den == 0.0) throw std::invalid_argument("kinetic_oam: zero-norm current map");
  return num / den;
}

// <2 r^2 / w_m^2>; equals 2n + |l| + 1 for a pure Landau mode.
inline double spot_size(const FieldMap& field, const PhysicalContext& ctx) {
  const double wm = ctx.magnetic_length();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    const Grid::Point p = field.grid.point(i);
    const double w = field.grid.weight(i);
    const double rho = std::norm(field.psi[i]);
    num += w * p.r * p.r * rho;
    den += w * rho;
  }
  if (den == 0.0) throw std::invalid_argument("spot_size: zero-norm field");
  return 2.0 * num / (wm * wm * den);
}

// Mean squared radius; free-space helper for width fits.
inline double mean_square_radius(const FieldMap& field) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    const Grid::Point p = field.grid.point(i);
    const double w = field.grid.weight(i);
    const double rho = std::norm(field.psi[i]);
    num += w * p.r * p.r * rho;
    den += w * rho;
  }
  if (den == 0.0) throw std::invalid_argument("mean_square_radius: zero-norm field");
  return num / den;
}

// <M_z> = (e/2) integral (r x j)_z / integral rho = (e/2) <script L_z>.
inline double magnetic_moment(const CurrentMap& cur) {
  return 0.5 * electron_charge * kinetic_oam(cur);
}

struct CentroidMomentum {
  std::array<double, 2> centroid;
  std::array<double, 3> p;  // kinetic momentum expectation
};

// First moments of rho and the kinetic momentum <-i grad - e A>. The momentum
// is assembled twice (from the current map and from canonical-gradient plus
// A terms) and cross-checked; a mismatch flags gauge bookkeeping errors.
inline CentroidMomentum centroid_and_momentum(const FieldMap& field,
                                              const VectorPotential& pot) {
  const CurrentMap cur = density_current(field, pot);
  const Grid& g = field.grid;
  double den = 0.0;
  std::array<double, 2> cen{0.0, 0.0};
  std::array<double, 3> pj{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Grid::Point p = g.point(i);
    const double w = g.weight(i);
    den += w * cur.rho[i];
    cen[0] += w * p.x * cur.rho[i];
    cen[1] += w * p.y * cur.rho[i];
    pj[0] += w * cur.j[i][0];
    pj[1] += w * cur.j[i][1];
    pj[2] += w * cur.jz[i];
  }
  if (den == 0.0) throw std::invalid_argument("centroid_and_momentum: zero-norm field");
  for (auto& c : cen) c /= den;
  for (auto& c : pj) c /= den;

  // Independent transverse assembly: canonical part minus e <A>.
  const auto grad = detail::transverse_gradient(g, field.psi);
  std::array<double, 2> pb{0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = g.weight(i);
    const cplx ps = std::conj(field.psi[i]);
    const auto a = pot.at(g.point(i), i);
    pb[0] += w * (std::imag(ps * grad[i][0]) - electron_charge * a[0] * cur.rho[i]);
    pb[1] += w * (std::imag(ps * grad[i][1]) - electron_charge * a[1] * cur.rho[i]);
  }
  for (auto& c : pb) c /= den;
  const double scale = 1.0 + std::abs(pj[0]) + std::abs(pj[1]);
  if (std::abs(pb[0] - pj[0]) > 1e-9 * scale || std::abs(pb[1] - pj[1]) > 1e-9 * scale)
    throw std::runtime_error("centroid_and_momentum: momentum routes disagree");

  return CentroidMomentum{cen, pj};
}

inline CentroidMomentum centroid_and_momentum(const FieldMap& field) {
  return centroid_and_momentum(field, infer_potential(field));
}

struct ObservablesReport {
  double norm = 0.0;
  double L_canonical = 0.0;
  double L_kinetic = 0.0;
  double M_z = 0.0;
  std::optional<double> spot2;  // Landau contexts only
  std::array<double, 2> centroid{0.0, 0.0};
  std::array<double, 3> p_kinetic{0.0, 0.0, 0.0};
  double L_extrinsic = 0.0;  // <x><p_y> - <y><p_x>
};

inline ObservablesReport observables_report(const FieldMap& field,
                                            const VectorPotential& pot) {
  ObservablesReport rep;
  rep.norm = norm_integral(field);
  rep.L_canonical = canonical_oam(field);
  const CurrentMap cur = density_current(field, pot);
  rep.L_kinetic = kinetic_oam(cur);
  rep.M_z = 0.5 * electron_charge * rep.L_kinetic;
  if (field.meta.ctx.has_field()) rep.spot2 = spot_size(field, field.meta.ctx);
  const CentroidMomentum cm = centroid_and_momentum(field, pot);
  rep.centroid = cm.centroid;
  rep.p_kinetic = cm.p;
  rep.L_extrinsic = cm.centroid[0] * cm.p[1] - cm.centroid[1] * cm.p[0];
  return rep;
}

inline ObservablesReport observables_report(const FieldMap& field) {
  return observables_report(field, infer_potential(field));
}

}  // namespace evb
