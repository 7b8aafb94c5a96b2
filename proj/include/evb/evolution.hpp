#pragma once

// Propagation of LG superpositions by their per-mode longitudinal phases,
// image-rotation metrology by angular cross-correlation, off-axis vortex
// detection by phase winding, and the classical (Ehrenfest) centroid check.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "evb/field.hpp"
#include "evb/observables.hpp"

namespace evb {

struct SuperpositionSpec {
  std::vector<Term> terms;
  PhysicalContext ctx;
};

// psi_{-l,n} + psi_{+l,n}: zero net canonical OAM, 2|l| petals.
inline SuperpositionSpec make_balanced(int ell, int n, const PhysicalContext& ctx) {
  if (ell == 0)
    throw std::invalid_argument("make_balanced: ell = 0 degenerates to a single mode");
  if (!ctx.has_field()) throw std::invalid_argument("make_balanced: requires B != 0");
  SuperpositionSpec s;
  s.ctx = ctx;
  s.terms = {Term{ModeSpec::landau_lg(-ell, n), cplx(1.0, 0.0)},
             Term{ModeSpec::landau_lg(ell, n), cplx(1.0, 0.0)}};
  return s;
}

// psi_{0,n} + a psi_{l,n}: |l| off-axis vortices.
inline SuperpositionSpec make_offaxis(int ell, int n, cplx a, const PhysicalContext& ctx) {
  if (ell == 0)
    throw std::invalid_argument("make_offaxis: ell = 0 degenerates to a single mode");
  if (a == cplx(0.0, 0.0))
    throw std::invalid_argument("make_offaxis: a = 0 degenerates to a single mode");
  if (!ctx.has_field()) throw std::invalid_argument("make_offaxis: requires B != 0");
  SuperpositionSpec s;
  s.ctx = ctx;
  s.terms = {Term{ModeSpec::landau_lg(0, n), cplx(1.0, 0.0)},
             Term{ModeSpec::landau_lg(ell, n), a}};
  return s;
}

enum class PhaseModel { paraxial, exact_kz };

// Frame at height z. Landau superpositions advance each z = 0 profile by
// exp(i delta_kz z) relative to the dropped carrier exp(i k z); free LG
// superpositions (B = 0) use the exact diffracting z-dependence.
inline FieldMap propagate_analytic(const SuperpositionSpec& spec, const Grid& grid, double z,
                                   PhaseModel model = PhaseModel::paraxial) {
  detail::validate_terms(spec.terms);
  bool all_landau = true, all_free_lg = true;
  for (const Term& t : spec.terms) {
    all_landau &= t.spec.family == ModeFamily::landau_lg;
    all_free_lg &= t.spec.family == ModeFamily::free_lg;
  }
  FieldMeta meta;
  meta.ctx = spec.ctx;
  meta.terms = spec.terms;
  meta.carrier_kz = spec.ctx.k;
  if (all_landau) {
    meta.source = model == PhaseModel::paraxial ? FieldSource::envelope_paraxial
                                                : FieldSource::envelope_exact;
  } else if (all_free_lg) {
    if (spec.ctx.has_field())
      throw std::invalid_argument("propagate_analytic: free_lg terms need B = 0");
    meta.source = FieldSource::modes;  // exact z-dependence of the LG formula
  } else {
    throw std::invalid_argument(
        "propagate_analytic: terms must be all landau_lg or all free_lg");
  }
  return evaluate_superposition(meta, grid, z);
}

// ---------------------------------------------------------------------------
// Rotation metrology
// ---------------------------------------------------------------------------

struct RotationMeasurement {
  bool defined = false;   // false: rho axially symmetric, rotation ill-defined
  double angle = 0.0;     // principal value in (-period/2, period/2]
  double period = 2.0 * pi;  // angular symmetry period of the pattern
  double correlation = 0.0;  // normalized peak height in [0, 1]
};

namespace detail {

// Angular power of rho per harmonic m = 0..nphi/2 on a polar grid.
inline std::vector<double> rho_angular_power(const Grid& g, const std::vector<double>& rho) {
  const int nphi = g.nphi;
  std::vector<double> power(nphi / 2 + 1, 0.0);
  std::vector<cplx> phase(nphi);
  for (int m = 0; m <= nphi / 2; ++m) {
    for (int j = 0; j < nphi; ++j) phase[j] = std::polar(1.0 / nphi, -m * g.phi(j));
    double pw = 0.0;
    for (int ir = 0; ir < g.nr; ++ir) {
      cplx cm(0.0, 0.0);
      const double* row = rho.data() + g.index(ir, 0);
      for (int j = 0; j < nphi; ++j) cm += row[j] * phase[j];
      pw += g.r(ir) * g.hr() * std::norm(cm);
    }
    power[m] = pw;
  }
  return power;
}

inline FieldMap as_polar_frame(const FieldMap& field) {
  if (field.grid.is_polar()) return field;
  // Analytic meta: re-evaluate exactly on a polar grid of matched extent.
  const Grid pg = Grid::polar(std::max(96, field.grid.nx / 2), 256, field.grid.half_extent);
  return evaluate_superposition(field.meta, pg, field.z);
}

}  // namespace detail

// Rotation angle of frameZ relative to frame0: the shift maximizing the
// angular cross-correlation integral of rho_Z(r, phi + dphi) rho_0(r, phi),
// refined sub-bin by a parabola through the peak. Without a hint the result
// is the principal value modulo the pattern's angular period (detected from
// the angular spectrum). With `expected` (the unwrapped angle of the previous
// z sample) the search tracks the correlation lobe nearest the expectation,
// which keeps deforming patterns on their continuous branch, and the
// returned angle is already unwrapped against it.
inline RotationMeasurement rotation_angle(const FieldMap& frame0_in,
                                          const FieldMap& frameZ_in,
                                          std::optional<double> expected = std::nullopt) {
  const FieldMap f0 = detail::as_polar_frame(frame0_in);
  const FieldMap fz = detail::as_polar_frame(frameZ_in);
  if (!f0.grid.same_as(fz.grid))
    throw std::invalid_argument("rotation_angle: frames must share one grid");
  const Grid& g = f0.grid;
  const int nphi = g.nphi;

  std::vector<double> rho0(g.size()), rhoz(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    rho0[i] = std::norm(f0.psi[i]);
    rhoz[i] = std::norm(fz.psi[i]);
  }

  RotationMeasurement out;

  // Pattern symmetry from the angular spectrum of the reference frame.
  const auto power = detail::rho_angular_power(g, rho0);
  double max_nonax = 0.0;
  for (int m = 1; m <= nphi / 2; ++m) max_nonax = std::max(max_nonax, power[m]);
  if (max_nonax < 1e-12 * power[0]) {
    out.defined = false;  // axially symmetric: correlation is flat
    return out;
  }
  int fold = 0;
  int m_dom = 1;
  for (int m = 1; m <= nphi / 2; ++m) {
    if (power[m] > 1e-6 * max_nonax) fold = std::gcd(fold, m);
    if (power[m] > power[m_dom]) m_dom = m;
  }
  if (fold == 0) fold = 1;
  out.period = 2.0 * pi / fold;

  // Circular cross-correlation, radially weighted.
  std::vector<double> corr(nphi, 0.0);
  for (int ir = 0; ir < g.nr; ++ir) {
    const double wr = g.r(ir) * g.hr();
    const double* a = rhoz.data() + g.index(ir, 0);
    const double* b = rho0.data() + g.index(ir, 0);
    for (int s = 0; s < nphi; ++s) {
      double acc = 0.0;
      for (int j = 0; j < nphi; ++j) {
        int js = j + s;
        if (js >= nphi) js -= nphi;
        acc += a[js] * b[j];
      }
      corr[s] += wr * acc;
    }
  }

  const auto wrap_period = [&](double a) {
    return a - out.period * std::round(a / out.period);
  };
  // Correlation lobes of near-symmetric patterns repeat at the dominant
  // harmonic's spacing, which can be shorter than the full symmetry period;
  // the continuity window must stay below a quarter of that spacing.
  const double window = std::min(0.25 * out.period, 0.5 * pi / m_dom) + g.dphi();
  int s_peak = -1;
  for (int s = 0; s < nphi; ++s) {
    if (expected && std::abs(wrap_period(s * g.dphi() - *expected)) > window)
      continue;  // track only the lobe nearest the previous sample
    if (s_peak < 0 || corr[s] > corr[s_peak]) s_peak = s;
  }
  const double cm = corr[(s_peak - 1 + nphi) % nphi];
  const double cp = corr[(s_peak + 1) % nphi];
  const double c0 = corr[s_peak];
  const double denom = cm - 2.0 * c0 + cp;
  const double delta = (denom < 0.0) ? 0.5 * (cm - cp) / denom : 0.0;
  double angle = (s_peak + delta) * g.dphi();

  // Peak height normalized by the zero-shift autocorrelations. The radial
  // weights of corr[] carry r hr; divide the same weighting out of a0, az.
  double a0 = 0.0, az = 0.0;
  for (int ir = 0; ir < g.nr; ++ir) {
    const double wr = g.r(ir) * g.hr();
    const double* b = rho0.data() + g.index(ir, 0);
    const double* a = rhoz.data() + g.index(ir, 0);
    for (int j = 0; j < nphi; ++j) {
      a0 += wr * b[j] * b[j];
      az += wr * a[j] * a[j];
    }
  }
  const double peak_val = c0 + (denom < 0.0 ? -0.125 * (cm - cp) * (cm - cp) / denom : 0.0);
  out.correlation = peak_val / std::sqrt(a0 * az);

  if (expected) {
    out.angle = *expected + wrap_period(angle - *expected);
  } else {
    // principal representative in (-period/2, period/2]
    angle -= out.period * std::floor(angle / out.period);
    if (angle > 0.5 * out.period) angle -= out.period;
    out.angle = angle;
  }
  out.defined = true;
  return out;
}

// Chooses the unwrapped representative closest to `previous`.
inline double unwrap_rotation(const RotationMeasurement& m, double previous) {
  if (!m.defined) return previous;
  return m.angle + m.period * std::round((previous - m.angle) / m.period);
}

// Dominant angular harmonic of |psi|^2 (petal count for flower patterns).
inline int angular_harmonic(const FieldMap& field) {
  const FieldMap f = detail::as_polar_frame(field);
  std::vector<double> rho(f.grid.size());
  for (std::size_t i = 0; i < f.grid.size(); ++i) rho[i] = std::norm(f.psi[i]);
  const auto power = detail::rho_angular_power(f.grid, rho);
  int best = 0;
  double best_pw = 0.0;
  for (int m = 1; m < static_cast<int>(power.size()); ++m)
    if (power[m] > best_pw) {
      best_pw = power[m];
      best = m;
    }
  return best;
}

// ---------------------------------------------------------------------------
// Vortex detection
// ---------------------------------------------------------------------------

struct Vortex {
  double x = 0.0, y = 0.0;
  int charge = 0;
  double cluster_radius = 0.0;  // spread of the merged plaquette cluster
};

namespace detail {

// Phase step arg(b/a), with the pi-ambiguous case (nearly real-negative
// product: a nodal line or a symmetric multi-charge core between the points)
// resolved by bisecting the edge with analytic midpoint values. A genuinely
// real-valued pattern stays ambiguous at every depth and is reported as such.
inline double phase_step(const MetaPointEvaluator& eval, double x0, double y0, cplx a,
                         double x1, double y1, cplx b, int depth, bool& ambiguous) {
  // an endpoint sitting exactly on a zero has no phase; nudge it inward
  if (std::abs(a) == 0.0) {
    x0 += (x1 - x0) / 16.0;
    y0 += (y1 - y0) / 16.0;
    a = eval(x0, y0);
  }
  if (std::abs(b) == 0.0) {
    x1 += (x0 - x1) / 16.0;
    y1 += (y0 - y1) / 16.0;
    b = eval(x1, y1);
  }
  const cplx prod = b * std::conj(a);
  const bool unclear =
      std::abs(prod) == 0.0 ||
      (std::real(prod) < 0.0 && std::abs(std::imag(prod)) <= 1e-9 * std::abs(prod));
  if (!unclear) return std::arg(prod);
  if (depth >= 24) {
    ambiguous = true;
    return 0.0;
  }
  const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  const cplx m = eval(xm, ym);
  return phase_step(eval, x0, y0, a, xm, ym, m, depth + 1, ambiguous) +
         phase_step(eval, xm, ym, m, x1, y1, b, depth + 1, ambiguous);
}

}  // namespace detail

// Phase winding summed around every grid plaquette; adjacent charged
// plaquettes are merged into one vortex. Cartesian frames only. Plaquettes
// within 2 cells of the boundary are excluded; plaquettes crossed by a nodal
// line of a real-valued pattern carry no isolated singularity and are
// skipped once edge refinement confirms the ambiguity.
inline std::vector<Vortex> count_vortices(const FieldMap& field) {
  const Grid& g = field.grid;
  if (g.is_polar())
    throw std::invalid_argument("count_vortices: requires a Cartesian frame");
  const MetaPointEvaluator eval(field.meta, field.z);
  // the gauge phase is smooth and winding-free; compare ungauged values so
  // grid samples stay consistent with the analytic midpoint refinement
  const std::vector<cplx> psi = detail::ungauged_psi(field);
  const int nx = g.nx, ny = g.ny;
  const int margin = 2;
  std::vector<int> winding(static_cast<std::size_t>(nx - 1) * (ny - 1), 0);
  const auto step = [&](int iy0, int ix0, int iy1, int ix1, bool& ambiguous) {
    return detail::phase_step(eval, g.x(ix0), g.y(iy0), psi[g.index(iy0, ix0)], g.x(ix1),
                              g.y(iy1), psi[g.index(iy1, ix1)], 0, ambiguous);
  };
  for (int iy = margin; iy < ny - 1 - margin; ++iy) {
    for (int ix = margin; ix < nx - 1 - margin; ++ix) {
      bool ambiguous = false;
      const double total = step(iy, ix, iy, ix + 1, ambiguous) +
                           step(iy, ix + 1, iy + 1, ix + 1, ambiguous) +
                           step(iy + 1, ix + 1, iy + 1, ix, ambiguous) +
                           step(iy + 1, ix, iy, ix, ambiguous);
      const int w = ambiguous ? 0 : static_cast<int>(std::lround(total / (2.0 * pi)));
      winding[static_cast<std::size_t>(iy) * (nx - 1) + ix] = w;
    }
  }

  // Merge 8-connected charged plaquettes.
  std::vector<Vortex> out;
  std::vector<char> seen(winding.size(), 0);
  for (int iy = 0; iy < ny - 1; ++iy) {
    for (int ix = 0; ix < nx - 1; ++ix) {
      const std::size_t id = static_cast<std::size_t>(iy) * (nx - 1) + ix;
      if (winding[id] == 0 || seen[id]) continue;
      std::vector<std::pair<int, int>> stack{{iy, ix}}, members;
      seen[id] = 1;
      int charge = 0;
      while (!stack.empty()) {
        auto [cy, cx] = stack.back();
        stack.pop_back();
        members.emplace_back(cy, cx);
        charge += winding[static_cast<std::size_t>(cy) * (nx - 1) + cx];
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int qy = cy + dy, qx = cx + dx;
            if (qy < 0 || qy >= ny - 1 || qx < 0 || qx >= nx - 1) continue;
            const std::size_t qid = static_cast<std::size_t>(qy) * (nx - 1) + qx;
            if (seen[qid] || winding[qid] == 0) continue;
            seen[qid] = 1;
            stack.emplace_back(qy, qx);
          }
      }
      if (charge == 0) continue;  // cancelling pair below grid resolution
      double cxs = 0.0, cys = 0.0, wsum = 0.0;
      for (auto [my, mx] : members) {
        const double w = std::abs(winding[static_cast<std::size_t>(my) * (nx - 1) + mx]);
        const double px = g.x(mx) + 0.5 * g.hx();
        const double py = g.y(my) + 0.5 * g.hy();
        const double ww = (w > 0.0) ? w : 1.0;
        cxs += ww * px;
        cys += ww * py;
        wsum += ww;
      }
      Vortex v;
      v.x = cxs / wsum;
      v.y = cys / wsum;
      v.charge = charge;
      for (auto [my, mx] : members) {
        const double px = g.x(mx) + 0.5 * g.hx();
        const double py = g.y(my) + 0.5 * g.hy();
        v.cluster_radius = std::max(v.cluster_radius, std::hypot(px - v.x, py - v.y));
      }
      out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end(), [](const Vortex& a, const Vortex& b) {
    return std::atan2(a.y, a.x) < std::atan2(b.y, b.x);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Classical trajectory and Ehrenfest comparison
// ---------------------------------------------------------------------------

struct ClassicalState {
  std::array<double, 3> r{0.0, 0.0, 0.0};
  std::array<double, 3> p{0.0, 0.0, 0.0};  // kinetic momentum
};

namespace detail {

// dr/dt = p, dp/dt = e p x B (m = 1, e = -1, B along z).
inline void rk4_step(ClassicalState& s, double B, double dt) {
  const auto deriv = [B](const ClassicalState& q) {
    ClassicalState d;
    d.r = q.p;
    d.p = {-B * q.p[1], B * q.p[0], 0.0};
    return d;
  };
  const auto advance = [](const ClassicalState& q, const ClassicalState& d, double h) {
    ClassicalState r;
    for (int i = 0; i < 3; ++i) {
      r.r[i] = q.r[i] + h * d.r[i];
      r.p[i] = q.p[i] + h * d.p[i];
    }
    return r;
  };
  const ClassicalState k1 = deriv(s);
  const ClassicalState k2 = deriv(advance(s, k1, 0.5 * dt));
  const ClassicalState k3 = deriv(advance(s, k2, 0.5 * dt));
  const ClassicalState k4 = deriv(advance(s, k3, dt));
  for (int i = 0; i < 3; ++i) {
    s.r[i] += dt / 6.0 * (k1.r[i] + 2.0 * k2.r[i] + 2.0 * k3.r[i] + k4.r[i]);
    s.p[i] += dt / 6.0 * (k1.p[i] + 2.0 * k2.p[i] + 2.0 * k3.p[i] + k4.p[i]);
  }
}

inline double pnorm(const std::array<double, 3>& p) {
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

}  // namespace detail

// RK4 integration sampled at the given times. The step is refined until the
// magnetic force conserves |p| to 1e-9 relative over the whole run.
inline std::vector<ClassicalState> classical_trajectory_time(
    const ClassicalState& init, double B, std::span<const double> t_samples) {
  std::vector<ClassicalState> out;
  out.reserve(t_samples.size());
  const double t_end = t_samples.empty() ? 0.0 : t_samples.back();
  const double omega_c = std::abs(B);
  int steps = std::max<int>(64, static_cast<int>(std::ceil(omega_c * t_end * 64.0 / pi)));
  const double p0 = detail::pnorm(init.p);
  for (int attempt = 0; attempt < 10; ++attempt) {
    out.clear();
    ClassicalState s = init;
    double t = 0.0;
    const double dt = (steps > 0 && t_end > 0.0) ? t_end / steps : 0.0;
    std::size_t next = 0;
    double worst_drift = 0.0;
    for (int i = 0; i <= steps && next < t_samples.size(); ++i) {
      while (next < t_samples.size() && t_samples[next] <= t + 0.5 * dt) {
        // land exactly on the sample time
        ClassicalState hit = s;
        const double rem = t_samples[next] - t;
        if (std::abs(rem) > 0.0) detail::rk4_step(hit, B, rem);
        out.push_back(hit);
        ++next;
      }
      if (i < steps) {
        detail::rk4_step(s, B, dt);
        t += dt;
        if (p0 > 0.0)
          worst_drift = std::max(worst_drift, std::abs(detail::pnorm(s.p) - p0) / p0);
      }
    }
    while (next < t_samples.size()) {  // trailing samples at t_end
      out.push_back(s);
      ++next;
    }
    if (worst_drift < 1e-9 || t_end == 0.0 || omega_c == 0.0) return out;
    steps *= 2;
  }
  return out;
}

// z as the evolution parameter: t = z m / p_z. Requires p_z > 0.
inline std::vector<ClassicalState> classical_trajectory(const ClassicalState& init, double B,
                                                        std::span<const double> z_samples) {
  if (!(init.p[2] > 0.0))
    throw std::invalid_argument("classical_trajectory: p_z must be > 0");
  std::vector<double> ts(z_samples.size());
  for (std::size_t i = 0; i < z_samples.size(); ++i) ts[i] = z_samples[i] / init.p[2];
  return classical_trajectory_time(init, B, ts);
}

// ---------------------------------------------------------------------------
// Evolution driver
// ---------------------------------------------------------------------------

struct EvolveOptions {
  PhaseModel model = PhaseModel::paraxial;
  bool store_frames = false;
  bool track_vortices = false;
  std::optional<Grid> vortex_grid;  // cartesian; defaults from the main grid extent
};

struct EvolutionResult {
  std::vector<double> z;
  std::vector<double> rotation;  // unwrapped angle, radians; starts at 0
  std::vector<bool> rotation_defined;
  std::vector<double> correlation;
  std::vector<std::array<double, 2>> centroid;
  std::vector<double> norm;
  std::vector<std::vector<Vortex>> vortices;
  std::vector<FieldMap> frames;
  double period = 2.0 * pi;
};

inline std::array<double, 2> centroid_of(const FieldMap& field) {
  double den = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    const Grid::Point p = field.grid.point(i);
    const double w = field.grid.weight(i) * std::norm(field.psi[i]);
    den += w;
    cx += w * p.x;
    cy += w * p.y;
  }
  if (den == 0.0) throw std::invalid_argument("centroid_of: zero-norm field");
  return {cx / den, cy / den};
}

inline EvolutionResult evolve(const SuperpositionSpec& spec, const Grid& grid,
                              std::span<const double> z_samples,
                              const EvolveOptions& opt = {}) {
  if (z_samples.empty()) throw std::invalid_argument("evolve: no z samples");
  EvolutionResult res;
  const FieldMap frame0 = propagate_analytic(spec, grid, z_samples.front(), opt.model);
  Grid vgrid = Grid::cartesian(192, 192, grid.is_polar() ? grid.r_max : grid.half_extent);
  if (opt.vortex_grid) vgrid = *opt.vortex_grid;

  double prev = 0.0;
  for (double z : z_samples) {
    const FieldMap frame = propagate_analytic(spec, grid, z, opt.model);
    const RotationMeasurement rm = rotation_angle(frame0, frame, prev);
    const double unwrapped = rm.defined ? rm.angle : prev;
    prev = unwrapped;
    res.z.push_back(z);
    res.rotation.push_back(unwrapped);
    res.rotation_defined.push_back(rm.defined);
    res.correlation.push_back(rm.correlation);
    res.centroid.push_back(centroid_of(frame));
    res.norm.push_back(norm_integral(frame));
    if (rm.defined) res.period = rm.period;
    if (opt.track_vortices) {
      FieldMeta meta = frame.meta;
      res.vortices.push_back(count_vortices(evaluate_superposition(meta, vgrid, z)));
    }
    if (opt.store_frames) res.frames.push_back(frame);
  }
  // Report rotation relative to the first frame.
  const double base = res.rotation.front();
  for (double& a : res.rotation) a -= base;
  return res;
}

// Max over z of |quantum centroid - classical transverse position|, with the
// classical track seeded from the z = 0 centroid and kinetic momentum. Frames
// map to classical time via the carrier, t = z / v.
inline double ehrenfest_check(const SuperpositionSpec& spec, const Grid& grid,
                              std::span<const double> z_samples,
                              PhaseModel model = PhaseModel::paraxial) {
  if (z_samples.empty() || z_samples.front() != 0.0)
    throw std::invalid_argument("ehrenfest_check: z samples must start at 0");
  const FieldMap frame0 = propagate_analytic(spec, grid, 0.0, model);
  const CentroidMomentum cm0 = centroid_and_momentum(frame0);
  ClassicalState init;
  init.r = {cm0.centroid[0], cm0.centroid[1], 0.0};
  init.p = cm0.p;
  std::vector<double> ts(z_samples.size());
  for (std::size_t i = 0; i < z_samples.size(); ++i) ts[i] = z_samples[i] / spec.ctx.v;
  const auto classical = classical_trajectory_time(init, spec.ctx.B, ts);

  double worst = 0.0;
  for (std::size_t i = 0; i < z_samples.size(); ++i) {
    const FieldMap frame = propagate_analytic(spec, grid, z_samples[i], model);
    const auto c = centroid_of(frame);
    worst = std::max(worst, std::hypot(c[0] - classical[i].r[0], c[1] - classical[i].r[1]));
  }
  return worst;
}

}  // namespace evb
