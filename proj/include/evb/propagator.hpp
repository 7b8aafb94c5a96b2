#pragma once

// Independent numerical oracle: paraxial propagation in free space or uniform
// B by azimuthal-harmonic decomposition plus radial Crank-Nicolson. With the
// carrier exp(i k z) factored out, each channel obeys
//   2 i k du/dz = -[u'' + u'/r - l^2 u / r^2] + B l u + (B^2 r^2 / 4) u,
// (B = 0 drops the last two terms). The radial operator is discretized in
// flux form on the half-offset grid, which keeps it Hermitian under the
// r-weighted inner product, so Crank-Nicolson conserves the norm exactly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evb/evolution.hpp"
#include "evb/field.hpp"

namespace evb {

struct PropagatorConfig {
  int nr = 1024;
  double r_max = 0.0;
  double dz = 0.0;
  int ell_min = 0;
  int ell_max = 0;
  double absorber_width = 0.0;  // outer fraction of r_max tapered; 0 = off

  void validate() const {
    if (nr < 16) throw std::domain_error("PropagatorConfig: nr must be >= 16");
    if (!(r_max > 0.0)) throw std::domain_error("PropagatorConfig: r_max must be > 0");
    if (!(dz > 0.0)) throw std::domain_error("PropagatorConfig: dz must be > 0");
    if (ell_min > ell_max) throw std::domain_error("PropagatorConfig: empty ell range");
    if (absorber_width < 0.0 || absorber_width > 0.5)
      throw std::domain_error("PropagatorConfig: absorber_width outside [0, 0.5]");
  }
};

struct ChannelSet {
  int ell_min = 0;
  int nr = 0;
  double r_max = 0.0;
  std::vector<std::vector<cplx>> u;  // u[ell - ell_min][ir]

  double hr() const { return r_max / nr; }
  double r(int i) const { return (i + 0.5) * hr(); }
  int channels() const { return static_cast<int>(u.size()); }
  int ell_of(int ch) const { return ell_min + ch; }

  double channel_norm(int ch) const {
    double s = 0.0;
    for (int i = 0; i < nr; ++i) s += r(i) * std::norm(u[ch][i]);
    return 2.0 * pi * s * hr();
  }
  double total_norm() const {
    double s = 0.0;
    for (int ch = 0; ch < channels(); ++ch) s += channel_norm(ch);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Decompose / recompose
// ---------------------------------------------------------------------------

// u_l(r) = (1/nphi) sum_j psi(r, phi_j) exp(-i l phi_j). Channels outside
// [ell_min, ell_max] must be empty to 1e-8 of the total norm.
inline ChannelSet decompose(const FieldMap& field, int ell_min, int ell_max) {
  const Grid& g = field.grid;
  if (!g.is_polar()) throw std::invalid_argument("decompose: polar grid required");
  if (ell_min > ell_max) throw std::invalid_argument("decompose: empty ell range");
  ChannelSet cs;
  cs.ell_min = ell_min;
  cs.nr = g.nr;
  cs.r_max = g.r_max;
  cs.u.assign(ell_max - ell_min + 1, std::vector<cplx>(g.nr, cplx(0.0, 0.0)));

  std::vector<cplx> phase(g.nphi);
  double norm_inside = 0.0, norm_total = 0.0;
  for (int mi = 0; mi < g.nphi; ++mi) {
    const int m = (mi <= g.nphi / 2) ? mi : mi - g.nphi;
    for (int j = 0; j < g.nphi; ++j) phase[j] = std::polar(1.0 / g.nphi, -m * g.phi(j));
    double wm = 0.0;
    for (int ir = 0; ir < g.nr; ++ir) {
      cplx um(0.0, 0.0);
      const cplx* row = field.psi.data() + g.index(ir, 0);
      for (int j = 0; j < g.nphi; ++j) um += row[j] * phase[j];
      wm += cs.r(ir) * std::norm(um);
      if (m >= ell_min && m <= ell_max) cs.u[m - ell_min][ir] = um;
    }
    norm_total += wm;
    if (m >= ell_min && m <= ell_max) norm_inside += wm;
  }
  if (norm_total > 0.0 && (norm_total - norm_inside) > 1e-8 * norm_total)
    throw std::runtime_error("decompose: " +
                             std::to_string((norm_total - norm_inside) / norm_total) +
                             " of the norm lies outside the channel truncation");
  return cs;
}

inline FieldMap recompose(const ChannelSet& cs, int nphi, const PhysicalContext& ctx,
                          double z) {
  FieldMap f;
  f.grid = Grid::polar(cs.nr, nphi, cs.r_max);
  f.z = z;
  f.meta.ctx = ctx;
  f.meta.source = FieldSource::modes;
  f.meta.carrier_kz = ctx.k;
  f.psi.assign(f.grid.size(), cplx(0.0, 0.0));
  for (int ch = 0; ch < cs.channels(); ++ch) {
    const int ell = cs.ell_of(ch);
    std::vector<cplx> twist(nphi);
    for (int j = 0; j < nphi; ++j)
      twist[j] = std::polar(1.0, static_cast<double>(ell) * f.grid.phi(j));
    for (int ir = 0; ir < cs.nr; ++ir) {
      cplx* row = f.psi.data() + f.grid.index(ir, 0);
      const cplx um = cs.u[ch][ir];
      for (int j = 0; j < nphi; ++j) row[j] += um * twist[j];
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Crank-Nicolson engine
// ---------------------------------------------------------------------------

class RadialPropagator {
 public:
  RadialPropagator(const PhysicalContext& ctx, const PropagatorConfig& cfg)
      : ctx_(ctx), cfg_(cfg) {
    cfg_.validate();
    const int n = cfg_.nr;
    const double h = cfg_.r_max / n;
    r_.resize(n);
    for (int i = 0; i < n; ++i) r_[i] = (i + 0.5) * h;
    // Flux-form radial Laplacian: at node i the fluxes live at r_(i +- 1/2);
    // the inner flux of the first node is zero, which encodes regularity at
    // the axis on the half-offset grid.
    lower_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    diag0_.assign(n, 0.0);
    const double h2 = h * h;
    for (int i = 0; i < n; ++i) {
      const double rm = (i == 0) ? 0.0 : r_[i] - 0.5 * h;
      const double rp = r_[i] + 0.5 * h;
      if (i > 0) lower_[i] = -rm / (r_[i] * h2);
      if (i < n - 1) upper_[i] = -rp / (r_[i] * h2);
      // Dirichlet at r_max: the (dropped) outer neighbor still contributes
      // its flux to the diagonal.
      diag0_[i] = (rm + rp) / (r_[i] * h2);
    }
    if (cfg_.absorber_width > 0.0) {
      mask_.assign(n, 1.0);
      const double edge = cfg_.r_max * (1.0 - cfg_.absorber_width);
      for (int i = 0; i < n; ++i)
        if (r_[i] > edge) {
          const double t = (r_[i] - edge) / (cfg_.r_max - edge);
          mask_[i] = 0.5 * (1.0 + std::cos(pi * t));
        }
    }
  }

  const PropagatorConfig& config() const { return cfg_; }

  // Mean phase advance rate <u|L|u>/<u|u> / (2k) of a channel; used for the
  // per-step phase guard.
  double mean_rate(const ChannelSet& cs, int ch) const {
    const auto diag = channel_diag(cs.ell_of(ch));
    const auto& u = cs.u[ch];
    const int n = cfg_.nr;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx lu = diag[i] * u[i];
      if (i > 0) lu += lower_[i] * u[i - 1];
      if (i < n - 1) lu += upper_[i] * u[i + 1];
      num += r_[i] * std::real(std::conj(u[i]) * lu);
      den += r_[i] * std::norm(u[i]);
    }
    return den > 0.0 ? num / den / (2.0 * ctx_.k) : 0.0;
  }

  void check_step_phase(const ChannelSet& cs) const {
    for (int ch = 0; ch < cs.channels(); ++ch) {
      const double rate = mean_rate(cs, ch);
      if (std::abs(rate * cfg_.dz) >= 0.1)
        throw std::domain_error("propagator: per-step phase |delta_kz dz| = " +
                                std::to_string(std::abs(rate * cfg_.dz)) +
                                " >= 0.1 for ell = " + std::to_string(cs.ell_of(ch)));
    }
  }

  // One Crank-Nicolson step of every channel:
  //   (1 + i gamma L) u' = (1 - i gamma L) u,  gamma = dz / (4k).
  // Aborts if the norm drifts more than 1e-6 in one step (absorber off).
  void advance(ChannelSet& cs) const {
    const int n = cfg_.nr;
    const double gamma = cfg_.dz / (4.0 * ctx_.k);
    std::vector<cplx> rhs(n), diagc(n), work(n);
    for (int ch = 0; ch < cs.channels(); ++ch) {
      auto& u = cs.u[ch];
      const auto diag = channel_diag(cs.ell_of(ch));
      const double before = mask_.empty() ? cs.channel_norm(ch)
                                          : std::numeric_limits<double>::quiet_NaN();
      for (int i = 0; i < n; ++i) {
        cplx lu = diag[i] * u[i];
        if (i > 0) lu += lower_[i] * u[i - 1];
        if (i < n - 1) lu += upper_[i] * u[i + 1];
        rhs[i] = u[i] - cplx(0.0, gamma) * lu;
        diagc[i] = 1.0 + cplx(0.0, gamma) * diag[i];
      }
      thomas_solve(diagc, gamma, rhs, u, work);
      if (!mask_.empty())
        for (int i = 0; i < n; ++i) u[i] *= mask_[i];
      if (mask_.empty() && before != 0.0) {
        const double after = cs.channel_norm(ch);
        // negated comparison so a NaN norm also trips the abort
        if (!(std::abs(after - before) <= 1e-6 * before))
          throw std::runtime_error(
              "propagator: norm drift " + std::to_string((after - before) / before) +
              " in one step (ell = " + std::to_string(cs.ell_of(ch)) +
              ", dz = " + std::to_string(cfg_.dz) + "); unstable configuration");
      }
    }
  }

 private:
  std::vector<double> channel_diag(int ell) const {
    const int n = cfg_.nr;
    std::vector<double> d(n);
    const double l2 = static_cast<double>(ell) * ell;
    const double B = ctx_.B;
    for (int i = 0; i < n; ++i)
      d[i] = diag0_[i] + l2 / (r_[i] * r_[i]) + B * ell + 0.25 * B * B * r_[i] * r_[i];
    return d;
  }

  // Tridiagonal solve with the constant complex off-diagonals i*gamma*lower/upper.
  void thomas_solve(const std::vector<cplx>& diag, double gamma, std::vector<cplx>& rhs,
                    std::vector<cplx>& out, std::vector<cplx>& cprime) const {
    const int n = cfg_.nr;
    const cplx ig(0.0, gamma);
    cprime[0] = ig * upper_[0] / diag[0];
    rhs[0] = rhs[0] / diag[0];
    for (int i = 1; i < n; ++i) {
      const cplx m = diag[i] - ig * lower_[i] * cprime[i - 1];
      cprime[i] = ig * upper_[i] / m;
      rhs[i] = (rhs[i] - ig * lower_[i] * rhs[i - 1]) / m;
    }
    out[n - 1] = rhs[n - 1];
    for (int i = n - 2; i >= 0; --i) out[i] = rhs[i] - cprime[i] * out[i + 1];
  }

  PhysicalContext ctx_;
  PropagatorConfig cfg_;
  std::vector<double> r_;
  std::vector<double> lower_, upper_, diag0_;
  std::vector<double> mask_;
};

// Single step as a pure operation.
inline ChannelSet step(const ChannelSet& channels, const PhysicalContext& ctx, double dz) {
  PropagatorConfig cfg;
  cfg.nr = channels.nr;
  cfg.r_max = channels.r_max;
  cfg.dz = dz;
  cfg.ell_min = channels.ell_min;
  cfg.ell_max = channels.ell_min + channels.channels() - 1;
  RadialPropagator prop(ctx, cfg);
  prop.check_step_phase(channels);
  ChannelSet out = channels;
  prop.advance(out);
  return out;
}

// ---------------------------------------------------------------------------
// Oracle drivers
// ---------------------------------------------------------------------------

namespace detail {

// Channels seeded from the analytic z = 0 radial profiles of the terms.
inline ChannelSet seed_channels(const SuperpositionSpec& spec, const PropagatorConfig& cfg) {
  int lmin = spec.terms.front().spec.ell, lmax = lmin;
  for (const Term& t : spec.terms) {
    lmin = std::min(lmin, t.spec.ell);
    lmax = std::max(lmax, t.spec.ell);
  }
  ChannelSet cs;
  cs.ell_min = lmin;
  cs.nr = cfg.nr;
  cs.r_max = cfg.r_max;
  cs.u.assign(lmax - lmin + 1, std::vector<cplx>(cfg.nr, cplx(0.0, 0.0)));
  for (const Term& t : spec.terms) {
    ModeEvaluator mode(t.spec, spec.ctx);
    auto& u = cs.u[t.spec.ell - lmin];
    for (int i = 0; i < cfg.nr; ++i) u[i] += t.coeff * mode.radial(cs.r(i), 0.0);
  }
  return cs;
}

inline void check_domain(const SuperpositionSpec& spec, const PropagatorConfig& cfg) {
  for (const Term& t : spec.terms) {
    double mode_radius = 0.0;
    if (t.spec.family == ModeFamily::landau_lg)
      mode_radius = spec.ctx.magnetic_length() *
                    std::sqrt(2.0 * t.spec.n + std::abs(t.spec.ell) + 1.0);
    else if (t.spec.family == ModeFamily::free_lg)
      mode_radius = t.spec.w0 * std::sqrt(2.0 * t.spec.n + std::abs(t.spec.ell) + 1.0);
    if (mode_radius > 0.0 && cfg.r_max < 2.0 * mode_radius)
      throw std::domain_error("propagator: r_max must exceed twice the mode radius (" +
                              std::to_string(mode_radius) + ")");
  }
}

}  // namespace detail

struct NumericEvolution {
  std::vector<double> z;
  std::vector<FieldMap> frames;
  std::vector<double> norm;
};

// Propagates the z = 0 superposition numerically and recomposes frames at the
// requested heights (which must be increasing multiples of cfg.dz).
inline NumericEvolution propagate_numeric(const SuperpositionSpec& spec,
                                          const PropagatorConfig& cfg,
                                          std::span<const double> z_samples, int nphi = 256) {
  detail::validate_terms(spec.terms);
  detail::check_domain(spec, cfg);
  RadialPropagator prop(spec.ctx, cfg);
  ChannelSet cs = detail::seed_channels(spec, cfg);
  prop.check_step_phase(cs);

  NumericEvolution out;
  double z = 0.0;
  for (double zs : z_samples) {
    const long steps = std::lround((zs - z) / cfg.dz);
    if (steps < 0 || std::abs(zs - (z + steps * cfg.dz)) > 1e-9 * std::max(1.0, zs))
      throw std::invalid_argument(
          "propagate_numeric: z samples must be increasing multiples of dz");
    for (long s = 0; s < steps; ++s) prop.advance(cs);
    z = zs;
    out.z.push_back(z);
    out.frames.push_back(recompose(cs, nphi, spec.ctx, z));
    out.norm.push_back(cs.total_norm());
  }
  return out;
}

// Propagates a single mode and returns the measured phase advance per unit z
// (accumulated step by step, so no 2 pi ambiguity). For a Landau mode this is
// an independent numerical derivation of the envelope dispersion delta_kz.
inline double eigenphase_rate(const ModeSpec& mode, const PhysicalContext& ctx,
                              const PropagatorConfig& cfg, double z_total) {
  SuperpositionSpec spec;
  spec.ctx = ctx;
  spec.terms = {Term{mode, cplx(1.0, 0.0)}};
  detail::check_domain(spec, cfg);
  RadialPropagator prop(ctx, cfg);
  ChannelSet cs = detail::seed_channels(spec, cfg);
  prop.check_step_phase(cs);
  const long steps = std::lround(z_total / cfg.dz);
  if (steps < 1) throw std::invalid_argument("eigenphase_rate: z_total shorter than dz");

  double phase = 0.0;
  std::vector<cplx> prev = cs.u[0];
  for (long s = 0; s < steps; ++s) {
    prop.advance(cs);
    cplx overlap(0.0, 0.0);
    for (int i = 0; i < cfg.nr; ++i)
      overlap += cs.r(i) * std::conj(prev[i]) * cs.u[0][i];
    phase += std::arg(overlap);
    prev = cs.u[0];
  }
  return phase / (steps * cfg.dz);
}

// End-to-end numeric check of the image rotation: propagate with step(),
// recompose, and run the same rotation metrology as the analytic path.
inline std::vector<double> oracle_rotation(const SuperpositionSpec& spec,
                                           const PropagatorConfig& cfg,
                                           std::span<const double> z_samples,
                                           int nphi = 256) {
  const NumericEvolution ev = propagate_numeric(spec, cfg, z_samples, nphi);
  std::vector<double> angles;
  angles.reserve(ev.frames.size());
  double prev = 0.0;
  for (const FieldMap& frame : ev.frames) {
    const RotationMeasurement rm = rotation_angle(ev.frames.front(), frame, prev);
    prev = rm.defined ? rm.angle : prev;
    angles.push_back(prev);
  }
  return angles;
}

}  // namespace evb
