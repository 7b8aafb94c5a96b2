#pragma once

// Grid sampling of modes and superpositions, probability density and current
// (vortex-gradient part and vector-potential part kept separate), and gauge
// transformations.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "evb/detail/stencil.hpp"
#include "evb/grid.hpp"
#include "evb/modes.hpp"

namespace evb {

struct Term {
  ModeSpec spec;
  cplx coeff{1.0, 0.0};
};

// How psi relates to the analytic terms. "modes" stores the full wavefunction
// (optionally with a carrier phase e^{i carrier_kz z} divided out);
// the envelope variants store z = 0 profiles advanced by per-mode phases
// exp(i delta_kz z) relative to the carrier.
enum class FieldSource { modes, envelope_paraxial, envelope_exact };

struct FieldMeta {
  PhysicalContext ctx;
  std::vector<Term> terms;
  FieldSource source = FieldSource::modes;
  double carrier_kz = 0.0;
  std::vector<double> gauge_chi;  // per-node gauge function, empty unless gauged

  bool gauged() const { return !gauge_chi.empty(); }
};

struct FieldMap {
  Grid grid;
  double z = 0.0;
  std::vector<cplx> psi;
  FieldMeta meta;
};

// ---------------------------------------------------------------------------
// Vector potential
// ---------------------------------------------------------------------------

// One signed place that turns context/flux parameters into A. Natural units:
// flux line A_phi = alpha / (e r) = -alpha / r; uniform field A_phi = B r / 2.
struct VectorPotential {
  enum class Kind { zero, flux_line, uniform };
  Kind kind = Kind::zero;
  double alpha = 0.0;
  double B = 0.0;
  // Gradient term accumulated by gauge transforms, sampled per node.
  std::vector<std::array<double, 2>> extra;

  std::array<double, 2> at(const Grid::Point& p, std::size_t idx) const {
    double a_phi = 0.0;
    switch (kind) {
      case Kind::zero: break;
      case Kind::flux_line:
        a_phi = (p.r > 0.0) ? alpha / (electron_charge * p.r) : 0.0;
        break;
      case Kind::uniform:
        a_phi = 0.5 * B * p.r;
        break;
    }
    std::array<double, 2> a{-a_phi * std::sin(p.phi), a_phi * std::cos(p.phi)};
    if (!extra.empty()) {
      a[0] += extra[idx][0];
      a[1] += extra[idx][1];
    }
    return a;
  }
};

inline VectorPotential infer_potential(const FieldMap& field) {
  VectorPotential pot;
  if (field.meta.ctx.has_field()) {
    pot.kind = VectorPotential::Kind::uniform;
    pot.B = field.meta.ctx.B;
    return pot;
  }
  for (const Term& t : field.meta.terms) {
    if (t.spec.family == ModeFamily::ab_bessel && t.spec.alpha != 0.0) {
      pot.kind = VectorPotential::Kind::flux_line;
      pot.alpha = t.spec.alpha;
      return pot;
    }
  }
  return pot;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_terms(const std::vector<Term>& terms) {
  if (terms.empty()) throw std::invalid_argument("superposition must be non-empty");
  double alpha = 0.0;
  bool have_ab = false;
  for (const Term& t : terms) {
    if (t.spec.family != ModeFamily::ab_bessel) continue;
    if (have_ab && t.spec.alpha != alpha)
      throw std::invalid_argument(
          "superposition mixes different flux parameters; the vector potential is ill-defined");
    alpha = t.spec.alpha;
    have_ab = true;
  }
}

// Per-term phase factor applied on top of the z = 0 profile for the envelope
// source models.
inline cplx envelope_phase(const FieldMeta& meta, const Term& t, double z) {
  if (meta.source == FieldSource::envelope_paraxial)
    return std::polar(1.0, delta_kz_paraxial(meta.ctx, t.spec.ell, t.spec.n) * z);
  const double dk = landau_kz_exact(meta.ctx, t.spec.ell, t.spec.n) - meta.ctx.k;
  return std::polar(1.0, dk * z);
}

}  // namespace detail

// Evaluates the superposition described by meta on a grid at height z. This
// is the reproducibility path: any analytic FieldMap can be rebuilt from its
// meta (the gauge phase is not applied; it is tied to the original grid).
inline FieldMap evaluate_superposition(const FieldMeta& meta, const Grid& grid, double z) {
  detail::validate_terms(meta.terms);
  FieldMap out;
  out.grid = grid;
  out.z = z;
  out.meta = meta;
  out.meta.gauge_chi.clear();
  out.psi.assign(grid.size(), cplx(0.0, 0.0));

  const bool envelope = meta.source != FieldSource::modes;
  const double z_eval = envelope ? 0.0 : z;

  for (const Term& term : meta.terms) {
    ModeEvaluator mode(term.spec, meta.ctx);
    cplx c = term.coeff;
    if (envelope)
      c *= detail::envelope_phase(meta, term, z);
    else if (meta.carrier_kz != 0.0)
      c *= std::polar(1.0, -meta.carrier_kz * z);

    if (grid.is_polar()) {
      // One radial evaluation per ring; the vortex factor is a phase table.
      std::vector<cplx> twist(grid.nphi);
      for (int j = 0; j < grid.nphi; ++j)
        twist[j] = std::polar(1.0, static_cast<double>(term.spec.ell) * grid.phi(j));
      for (int ir = 0; ir < grid.nr; ++ir) {
        const cplx rad = c * mode.radial(grid.r(ir), z_eval);
        cplx* row = out.psi.data() + grid.index(ir, 0);
        for (int j = 0; j < grid.nphi; ++j) row[j] += rad * twist[j];
      }
    } else {
      for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const Grid::Point p = grid.point(idx);
        out.psi[idx] += c * mode(p.r, p.phi, z_eval);
      }
    }
  }
  return out;
}

// Prepared point evaluator for a FieldMeta: one ModeEvaluator per term with
// the per-source z phases folded into the coefficients. Used where values are
// needed off the grid (vortex-core refinement). The gauge phase, when
// present, is a smooth unit-modulus factor and is deliberately not applied.
class MetaPointEvaluator {
 public:
  MetaPointEvaluator(const FieldMeta& meta, double z) : z_eval_(z) {
    detail::validate_terms(meta.terms);
    const bool envelope = meta.source != FieldSource::modes;
    if (envelope) z_eval_ = 0.0;
    for (const Term& term : meta.terms) {
      cplx c = term.coeff;
      if (envelope)
        c *= detail::envelope_phase(meta, term, z);
      else if (meta.carrier_kz != 0.0)
        c *= std::polar(1.0, -meta.carrier_kz * z);
      modes_.emplace_back(ModeEvaluator(term.spec, meta.ctx), c);
    }
  }

  cplx operator()(double x, double y) const {
    const double r = std::hypot(x, y);
    const double phi = std::atan2(y, x);
    cplx v(0.0, 0.0);
    for (const auto& [mode, c] : modes_) v += c * mode(r, phi, z_eval_);
    return v;
  }

 private:
  double z_eval_;
  std::vector<std::pair<ModeEvaluator, cplx>> modes_;
};

// Node-wise sum of coefficient-weighted modes at height z.
inline FieldMap sample(const std::vector<Term>& terms, const PhysicalContext& ctx,
                       const Grid& grid, double z) {
  FieldMeta meta;
  meta.ctx = ctx;
  meta.terms = terms;
  meta.source = FieldSource::modes;
  return evaluate_superposition(meta, grid, z);
}

inline FieldMap sample(const ModeSpec& spec, const PhysicalContext& ctx, const Grid& grid,
                       double z = 0.0) {
  return sample(std::vector<Term>{Term{spec, cplx(1.0, 0.0)}}, ctx, grid, z);
}

// ---------------------------------------------------------------------------
// Density and current
// ---------------------------------------------------------------------------

struct CurrentMap {
  Grid grid;
  std::vector<double> rho;
  std::vector<double> jz;
  std::vector<std::array<double, 2>> j;            // transverse, Cartesian components
  std::vector<std::array<double, 2>> j_vortex;     // Im(psi* grad psi)
  std::vector<std::array<double, 2>> j_potential;  // -e A rho
};

namespace detail {

// Transverse wavenumber scale of a term, for grid-resolution guards.
inline double transverse_scale(const Term& t, const PhysicalContext& ctx) {
  switch (t.spec.family) {
    case ModeFamily::free_bessel:
    case ModeFamily::ab_bessel:
      return t.spec.kappa;
    case ModeFamily::free_lg:
      return std::sqrt(2.0 * (2.0 * t.spec.n + std::abs(t.spec.ell) + 1.0)) / t.spec.w0;
    case ModeFamily::landau_lg:
      return std::sqrt(2.0 * (2.0 * t.spec.n + std::abs(t.spec.ell) + 1.0)) /
             ctx.magnetic_length();
  }
  return 0.0;
}

inline void check_resolution(const FieldMap& field) {
  double kt = 0.0;
  for (const Term& t : field.meta.terms)
    kt = std::max(kt, transverse_scale(t, field.meta.ctx));
  if (kt <= 0.0) return;
  const double h = field.grid.is_polar() ? field.grid.hr()
                                         : std::min(field.grid.hx(), field.grid.hy());
  if (kt * h >= pi / 4.0)
    throw std::invalid_argument(
        "grid too coarse for the 4th-order stencils: k_perp * h = " + std::to_string(kt * h) +
        " >= pi/4 (need at least 8 nodes per oscillation)");
  if (field.grid.is_polar()) {
    int lmax = 0;
    for (const Term& t : field.meta.terms) lmax = std::max(lmax, std::abs(t.spec.ell));
    if (lmax * field.grid.dphi() >= pi / 4.0)
      throw std::invalid_argument("polar grid too coarse azimuthally for ell = " +
                                  std::to_string(lmax));
  }
}

// Gradient of psi in Cartesian components at every node.
inline std::vector<std::array<cplx, 2>> transverse_gradient(const Grid& g,
                                                            const std::vector<cplx>& psi) {
  std::vector<std::array<cplx, 2>> grad(g.size());
  if (g.is_polar()) {
    for (int ir = 0; ir < g.nr; ++ir) {
      for (int j = 0; j < g.nphi; ++j) {
        const std::size_t idx = g.index(ir, j);
        const cplx dr = detail::deriv4([&](int i) { return psi[g.index(i, j)]; }, g.nr, ir,
                                       g.hr(), false);
        const cplx dphi = detail::deriv4([&](int i) { return psi[g.index(ir, i)]; }, g.nphi,
                                         j, g.dphi(), true);
        const double r = g.r(ir);
        const double c = std::cos(g.phi(j)), s = std::sin(g.phi(j));
        const cplx dphi_over_r = dphi / r;
        grad[idx][0] = c * dr - s * dphi_over_r;
        grad[idx][1] = s * dr + c * dphi_over_r;
      }
    }
  } else {
    for (int iy = 0; iy < g.ny; ++iy) {
      for (int ix = 0; ix < g.nx; ++ix) {
        const std::size_t idx = g.index(iy, ix);
        grad[idx][0] = detail::deriv4([&](int i) { return psi[g.index(iy, i)]; }, g.nx, ix,
                                      g.hx(), false);
        grad[idx][1] = detail::deriv4([&](int i) { return psi[g.index(i, ix)]; }, g.ny, iy,
                                      g.hy(), false);
      }
    }
  }
  return grad;
}

// Removes an accumulated gauge phase so the analytic meta matches psi again.
inline std::vector<cplx> ungauged_psi(const FieldMap& field) {
  std::vector<cplx> psi = field.psi;
  if (field.meta.gauged())
    for (std::size_t i = 0; i < psi.size(); ++i)
      psi[i] *= std::polar(1.0, field.meta.gauge_chi[i]);  // undo e^{i e chi} = e^{-i chi}
  return psi;
}

}  // namespace detail

// rho = |psi|^2 and the gauge-invariant probability current
//   j = Im(psi* grad psi) - e A rho,
// with the two parts stored separately (j = j_vortex + j_potential node-wise).
// The transverse gradient uses 4th-order stencils (one-sided at boundaries,
// periodic in phi); j_z comes from a z-difference of the analytic meta plus
// the carrier, so the map stays meaningful for envelope fields.
inline CurrentMap density_current(const FieldMap& field, const VectorPotential& pot) {
  detail::check_resolution(field);
  const Grid& g = field.grid;
  CurrentMap cur;
  cur.grid = g;
  const std::size_t n = g.size();
  cur.rho.resize(n);
  cur.jz.resize(n);
  cur.j.resize(n);
  cur.j_vortex.resize(n);
  cur.j_potential.resize(n);

  for (std::size_t i = 0; i < n; ++i) cur.rho[i] = std::norm(field.psi[i]);

  const auto grad = detail::transverse_gradient(g, field.psi);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx ps = std::conj(field.psi[i]);
    cur.j_vortex[i] = {std::imag(ps * grad[i][0]), std::imag(ps * grad[i][1])};
    const auto a = pot.at(g.point(i), i);
    cur.j_potential[i] = {-electron_charge * a[0] * cur.rho[i],
                          -electron_charge * a[1] * cur.rho[i]};
    cur.j[i] = {cur.j_vortex[i][0] + cur.j_potential[i][0],
                cur.j_vortex[i][1] + cur.j_potential[i][1]};
  }

  // j_z: carrier term plus the envelope z-derivative via a small central
  // difference of the analytic meta (the gauge phase is z-independent and
  // cancels inside Im(psi* d_z psi)).
  const double delta = 0.01 / std::max(field.meta.ctx.k, 1.0);
  std::vector<FieldMap> shifted;
  shifted.reserve(4);
  for (int s : {-2, -1, 1, 2})
    shifted.push_back(evaluate_superposition(field.meta, g, field.z + s * delta));
  const std::vector<cplx> center = detail::ungauged_psi(field);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx dz = (shifted[0].psi[i] - 8.0 * shifted[1].psi[i] + 8.0 * shifted[2].psi[i] -
                     shifted[3].psi[i]) /
                    (12.0 * delta);
    cur.jz[i] = field.meta.carrier_kz * cur.rho[i] + std::imag(std::conj(center[i]) * dz);
  }
  return cur;
}

inline CurrentMap density_current(const FieldMap& field) {
  return density_current(field, infer_potential(field));
}

// Closed-form radial profiles at the waist plane (z = 0), used as the oracle
// against the finite-difference path. Single modes only.
struct CurrentProfile {
  double rho;
  double j_phi;
  double j_z;
};

inline CurrentProfile analytic_current_profile(const ModeSpec& spec,
                                               const PhysicalContext& ctx, double r) {
  if (r < 0.0) throw std::domain_error("analytic_current_profile: r must be >= 0");
  ModeEvaluator mode(spec, ctx);
  const double amp = std::abs(mode.radial(r, 0.0));
  const double rho = amp * amp;
  CurrentProfile prof{rho, 0.0, 0.0};
  const double kz = mode.kz();
  switch (spec.family) {
    case ModeFamily::free_bessel:
      prof.j_phi = (r > 0.0) ? spec.ell / r * rho : 0.0;
      prof.j_z = kz * rho;
      break;
    case ModeFamily::ab_bessel:
      prof.j_phi = (r > 0.0) ? (spec.ell - spec.alpha) / r * rho : 0.0;
      prof.j_z = kz * rho;
      break;
    case ModeFamily::landau_lg: {
      const double w = ctx.magnetic_length();
      const double circ = spec.ell + ctx.sigma * 2.0 * r * r / (w * w);
      prof.j_phi = (r > 0.0) ? circ / r * rho : 0.0;
      prof.j_z = kz * rho;
      break;
    }
    case ModeFamily::free_lg: {
      prof.j_phi = (r > 0.0) ? spec.ell / r * rho : 0.0;
      const BeamGeometry geo = beam_geometry(spec.w0, ctx.k, 0.0);
      const double gouy_rate = (2.0 * spec.n + std::abs(spec.ell) + 1.0) / geo.zR;
      prof.j_z = rho * (ctx.k + 0.5 * ctx.k * r * r / (geo.zR * geo.zR) - gouy_rate);
      break;
    }
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Gauge transformation
// ---------------------------------------------------------------------------

namespace detail {

inline double wrap_pi(double a) {
  while (a > pi) a -= 2.0 * pi;
  while (a <= -pi) a += 2.0 * pi;
  return a;
}

// Winding of chi around the outer boundary of the grid. Single-valued smooth
// chi (resolved by the grid: per-edge change below pi) telescopes to zero.
inline double boundary_winding(const Grid& g, const std::vector<double>& chi) {
  std::vector<std::size_t> loop;
  if (g.is_polar()) {
    for (int j = 0; j < g.nphi; ++j) loop.push_back(g.index(g.nr - 1, j));
  } else {
    for (int ix = 0; ix < g.nx; ++ix) loop.push_back(g.index(0, ix));
    for (int iy = 1; iy < g.ny; ++iy) loop.push_back(g.index(iy, g.nx - 1));
    for (int ix = g.nx - 2; ix >= 0; --ix) loop.push_back(g.index(g.ny - 1, ix));
    for (int iy = g.ny - 2; iy >= 1; --iy) loop.push_back(g.index(iy, 0));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const double d = chi[loop[(i + 1) % loop.size()]] - chi[loop[i]];
    sum += wrap_pi(d);
  }
  return sum / (2.0 * pi);
}

}  // namespace detail

// psi' = psi exp(i e chi), A' = A + grad chi. Kinetic quantities computed from
// (psi', A') match those from (psi, A) within stencil error. Multivalued chi
// (nonzero winding around the boundary) is rejected.
inline std::pair<FieldMap, VectorPotential> gauge_transform(
    const FieldMap& field, const VectorPotential& pot,
    const std::function<double(double, double)>& chi) {
  const Grid& g = field.grid;
  std::vector<double> chi_s(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Grid::Point p = g.point(i);
    chi_s[i] = chi(p.x, p.y);
    if (!std::isfinite(chi_s[i]))
      throw std::invalid_argument("gauge_transform: chi is not finite on the grid");
  }
  const double winding = detail::boundary_winding(g, chi_s);
  if (std::abs(winding) > 0.25)
    throw std::invalid_argument("gauge_transform: chi is multivalued (winding " +
                                std::to_string(winding) + " around the boundary)");

  FieldMap out = field;
  for (std::size_t i = 0; i < g.size(); ++i)
    out.psi[i] *= std::polar(1.0, electron_charge * chi_s[i]);
  if (out.meta.gauge_chi.empty())
    out.meta.gauge_chi = chi_s;
  else
    for (std::size_t i = 0; i < g.size(); ++i) out.meta.gauge_chi[i] += chi_s[i];

  VectorPotential pot2 = pot;
  if (pot2.extra.empty()) pot2.extra.assign(g.size(), {0.0, 0.0});
  const auto grad = detail::transverse_gradient(
      g, [&] {
        std::vector<cplx> tmp(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) tmp[i] = chi_s[i];
        return tmp;
      }());
  for (std::size_t i = 0; i < g.size(); ++i) {
    pot2.extra[i][0] += std::real(grad[i][0]);
    pot2.extra[i][1] += std::real(grad[i][1]);
  }
  return {std::move(out), std::move(pot2)};
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

// Max |div j| over the smooth interior (one-sided boundary bands excluded).
// For stationary modes the transverse divergence vanishes analytically.
inline double max_transverse_divergence(const CurrentMap& cur) {
  const Grid& g = cur.grid;
  std::vector<cplx> jx(g.size()), jy(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    jx[i] = cur.j[i][0];
    jy[i] = cur.j[i][1];
  }
  const auto gx = detail::transverse_gradient(g, jx);
  const auto gy = detail::transverse_gradient(g, jy);
  double worst = 0.0;
  const int margin = 4;
  if (g.is_polar()) {
    for (int ir = margin; ir < g.nr - margin; ++ir)
      for (int j = 0; j < g.nphi; ++j) {
        const std::size_t idx = g.index(ir, j);
        worst = std::max(worst, std::abs(std::real(gx[idx][0]) + std::real(gy[idx][1])));
      }
  } else {
    for (int iy = margin; iy < g.ny - margin; ++iy)
      for (int ix = margin; ix < g.nx - margin; ++ix) {
        const std::size_t idx = g.index(iy, ix);
        worst = std::max(worst, std::abs(std::real(gx[idx][0]) + std::real(gy[idx][1])));
      }
  }
  return worst;
}

inline double max_current_magnitude(const CurrentMap& cur) {
  double m = 0.0;
  for (const auto& v : cur.j) m = std::max(m, std::hypot(v[0], v[1]));
  return m;
}

}  // namespace evb
