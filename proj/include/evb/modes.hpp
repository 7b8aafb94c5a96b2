#pragma once

// Physical context (natural units, field scales) and the four analytic beam
// families: free Bessel, free Laguerre-Gaussian, Aharonov-Bohm Bessel, and
// Landau Laguerre-Gaussian, with their dispersion relations.
//
// Conventions, used everywhere in this library:
//   hbar = m = 1, |e| = 1, electron charge e = -1.
//   Omega = e B / 2 = -B/2 (Larmor), sigma = sgn B, |Omega| = |B|/2.
//   w_m = 2/sqrt(|B|) (magnetic length), z_m = v/|Omega| (Larmor length),
//   k = v = sqrt(2E).
// All quantities are dimensionless in these units.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "evb/specfun.hpp"

namespace evb {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double electron_charge = -1.0;

struct PhysicalContext {
  double B = 0.0;   // signed magnetic field
  double E = 0.0;   // electron energy, > 0
  int sigma = 0;    // sgn B
  double Omega = 0.0;      // e B / 2, negative for B > 0
  double abs_Omega = 0.0;  // |Omega|
  double k = 0.0;          // sqrt(2E)
  double v = 0.0;          // sqrt(2E)
  double w_m = std::numeric_limits<double>::quiet_NaN();  // NaN flags B = 0
  double z_m = std::numeric_limits<double>::quiet_NaN();

  bool has_field() const { return B != 0.0; }
  double magnetic_length() const {
    if (!has_field()) throw std::logic_error("w_m undefined in free space (B = 0)");
    return w_m;
  }
  double larmor_length() const {
    if (!has_field()) throw std::logic_error("z_m undefined in free space (B = 0)");
    return z_m;
  }
};

inline PhysicalContext make_context(double B, double E) {
  if (!(E > 0.0) || !std::isfinite(E) || !std::isfinite(B))
    throw std::domain_error("make_context: requires finite B and E > 0");
  PhysicalContext ctx;
  ctx.B = B;
  ctx.E = E;
  ctx.sigma = (B > 0.0) - (B < 0.0);
  ctx.Omega = 0.5 * electron_charge * B;
  ctx.abs_Omega = std::abs(ctx.Omega);
  ctx.k = std::sqrt(2.0 * E);
  ctx.v = ctx.k;
  if (B != 0.0) {
    ctx.w_m = 2.0 / std::sqrt(std::abs(B));
    ctx.z_m = ctx.v / ctx.abs_Omega;
  }
  return ctx;
}

enum class ModeFamily { free_bessel, free_lg, ab_bessel, landau_lg };

inline const char* family_name(ModeFamily f) {
  switch (f) {
    case ModeFamily::free_bessel: return "free_bessel";
    case ModeFamily::free_lg: return "free_lg";
    case ModeFamily::ab_bessel: return "ab_bessel";
    case ModeFamily::landau_lg: return "landau_lg";
  }
  return "?";
}

// One analytic eigenmode: family tag plus its quantum numbers. kappa applies
// to the Bessel families, alpha to ab_bessel, (n, w0) to free_lg, n to
// landau_lg. The longitudinal wavenumber is derived per context.
struct ModeSpec {
  ModeFamily family = ModeFamily::free_bessel;
  int ell = 0;
  int n = 0;
  double kappa = 0.0;
  double alpha = 0.0;
  double w0 = 0.0;

  static ModeSpec free_bessel(int ell, double kappa) {
    if (!(kappa > 0.0)) throw std::domain_error("free_bessel: kappa must be > 0");
    ModeSpec s;
    s.family = ModeFamily::free_bessel;
    s.ell = ell;
    s.kappa = kappa;
    return s;
  }
  static ModeSpec free_lg(int ell, int n, double w0) {
    if (n < 0) throw std::domain_error("free_lg: n must be >= 0");
    if (!(w0 > 0.0)) throw std::domain_error("free_lg: w0 must be > 0");
    ModeSpec s;
    s.family = ModeFamily::free_lg;
    s.ell = ell;
    s.n = n;
    s.w0 = w0;
    return s;
  }
  static ModeSpec ab_bessel(int ell, double kappa, double alpha) {
    if (!(kappa > 0.0)) throw std::domain_error("ab_bessel: kappa must be > 0");
    if (!std::isfinite(alpha)) throw std::domain_error("ab_bessel: alpha must be finite");
    ModeSpec s;
    s.family = ModeFamily::ab_bessel;
    s.ell = ell;
    s.kappa = kappa;
    s.alpha = alpha;
    return s;
  }
  static ModeSpec landau_lg(int ell, int n) {
    if (n < 0) throw std::domain_error("landau_lg: n must be >= 0");
    ModeSpec s;
    s.family = ModeFamily::landau_lg;
    s.ell = ell;
    s.n = n;
    return s;
  }
};

// ---------------------------------------------------------------------------
// Dispersion relations and phases
// ---------------------------------------------------------------------------

// k_z = sqrt(2E - kappa^2). kappa = 0 is the plane-wave limit.
inline double bessel_kz(double E, double kappa) {
  if (!(E > 0.0) || kappa < 0.0)
    throw std::domain_error("bessel_kz: requires E > 0 and kappa >= 0");
  const double kz2 = 2.0 * E - kappa * kappa;
  if (kz2 <= 0.0)
    throw std::domain_error("bessel_kz: evanescent, kappa^2 > 2E (kappa = " +
                            std::to_string(kappa) + ")");
  return std::sqrt(kz2);
}

// Landau level structure. Energies are in units of |Omega|:
//   E_perp = 2N + 1,  N = n + |l| (1 + sgn(sigma l)) / 2,
//   E_Z = sigma l (Zeeman), E_G = 2n + |l| + 1 (Gouy), E_Z + E_G = E_perp.
struct LandauLevels {
  long N;
  long e_perp;    // E_perp / |Omega| = 2N + 1
  long e_zeeman;  // E_Z / |Omega| = sigma * l
  long e_gouy;    // E_G / |Omega| = 2n + |l| + 1
};

inline LandauLevels landau_levels(int ell, int n, int sigma) {
  if (n < 0) throw std::domain_error("landau_levels: n must be >= 0");
  if (sigma != 1 && sigma != -1)
    throw std::domain_error("landau_levels: sigma must be +1 or -1");
  LandauLevels lv;
  const long al = std::abs(static_cast<long>(ell));
  lv.N = n + ((static_cast<long>(sigma) * ell > 0) ? al : 0);
  lv.e_perp = 2 * lv.N + 1;
  lv.e_zeeman = static_cast<long>(sigma) * ell;
  lv.e_gouy = 2 * static_cast<long>(n) + al + 1;
  return lv;
}

inline double transverse_energy(const PhysicalContext& ctx, int ell, int n) {
  if (!ctx.has_field()) throw std::domain_error("transverse_energy: requires B != 0");
  return ctx.abs_Omega * static_cast<double>(landau_levels(ell, n, ctx.sigma).e_perp);
}

// Exact Landau dispersion: k_z = sqrt(2 (E - E_perp)).
inline double landau_kz_exact(const PhysicalContext& ctx, int ell, int n) {
  const double eperp = transverse_energy(ctx, ell, n);
  if (eperp >= ctx.E)
    throw std::domain_error("landau_kz_exact: E_perp >= E, no propagating mode (E_perp = " +
                            std::to_string(eperp) + ")");
  return std::sqrt(2.0 * (ctx.E - eperp));
}

// Paraxial correction to the carrier: delta_kz = -[sigma l + 2n + |l| + 1]/z_m.
// Gated on E_perp/E < max_ratio (default 0.1).
inline double delta_kz_paraxial(const PhysicalContext& ctx, int ell, int n,
                                double max_ratio = 0.1) {
  const double eperp = transverse_energy(ctx, ell, n);
  if (!(eperp / ctx.E < max_ratio))
    throw std::domain_error("delta_kz_paraxial: paraxiality violated, E_perp/E = " +
                            std::to_string(eperp / ctx.E) + " >= " + std::to_string(max_ratio));
  const double num = static_cast<double>(ctx.sigma) * ell + (2.0 * n + std::abs(ell) + 1.0);
  return -num / ctx.z_m;
}

// Accumulated Gouy phase across the full waist, (2n + |l| + 1) pi.
inline double gouy_total(int ell, int n) {
  return (2.0 * n + std::abs(ell) + 1.0) * pi;
}

// Dirac phase of the flux line, 2 pi alpha.
inline double dirac_phase(double alpha) { return 2.0 * pi * alpha; }

// Radius of the cylindrical caustic of an AB Bessel mode: R = |l - alpha| / kappa.
inline double caustic_radius(int ell, double alpha, double kappa) {
  if (!(kappa > 0.0)) throw std::domain_error("caustic_radius: kappa must be > 0");
  return std::abs(ell - alpha) / kappa;
}

// ---------------------------------------------------------------------------
// Free LG beam geometry
// ---------------------------------------------------------------------------

struct BeamGeometry {
  double w;      // local width w(z) = w0 sqrt(1 + z^2/zR^2)
  double R;      // wavefront curvature radius, infinite at z = 0
  double inv_R;  // z / (z^2 + zR^2), finite everywhere
  double zeta;   // Gouy angle arctan(z/zR)
  double zR;     // Rayleigh length k w0^2 / 2
};

inline BeamGeometry beam_geometry(double w0, double k, double z) {
  if (!(w0 > 0.0) || !(k > 0.0))
    throw std::domain_error("beam_geometry: requires w0 > 0 and k > 0");
  BeamGeometry g;
  g.zR = 0.5 * k * w0 * w0;
  g.w = w0 * std::sqrt(1.0 + (z / g.zR) * (z / g.zR));
  g.inv_R = z / (z * z + g.zR * g.zR);
  g.R = (z == 0.0) ? std::numeric_limits<double>::infinity() : 1.0 / g.inv_R;
  g.zeta = std::atan(z / g.zR);
  return g;
}

// ---------------------------------------------------------------------------
// Mode evaluation
// ---------------------------------------------------------------------------

inline double longitudinal_wavenumber(const ModeSpec& spec, const PhysicalContext& ctx) {
  switch (spec.family) {
    case ModeFamily::free_bessel:
    case ModeFamily::ab_bessel:
      return bessel_kz(ctx.E, spec.kappa);
    case ModeFamily::free_lg:
      return ctx.k;  // paraxial carrier; diffraction is in the z-dependent factors
    case ModeFamily::landau_lg:
      return landau_kz_exact(ctx, spec.ell, spec.n);
  }
  throw std::logic_error("unreachable");
}

// Evaluates one mode; construction validates the spec against the context and
// precomputes the normalization, so per-node evaluation stays cheap.
// LG families carry unit transverse L2 norm, Bessel families unit peak
// amplitude (they are not square-integrable over the plane).
class ModeEvaluator {
 public:
  ModeEvaluator(const ModeSpec& spec, const PhysicalContext& ctx) : spec_(spec), ctx_(ctx) {
    const bool needs_field = spec.family == ModeFamily::landau_lg;
    if (needs_field && !ctx.has_field())
      throw std::invalid_argument("landau_lg mode requires B != 0");
    if (!needs_field && spec.family != ModeFamily::free_lg && ctx.has_field())
      throw std::invalid_argument(std::string(family_name(spec.family)) +
                                  " mode requires a free-space context (B = 0)");
    if (spec.family == ModeFamily::free_lg && ctx.has_field())
      throw std::invalid_argument("free_lg mode requires a free-space context (B = 0)");
    kz_ = longitudinal_wavenumber(spec, ctx);
    switch (spec_.family) {
      case ModeFamily::free_bessel:
        nu_ = std::abs(spec.ell);
        amp_ = 1.0 / specfun::bessel_peak(specfun::Order(nu_));
        break;
      case ModeFamily::ab_bessel:
        nu_ = std::abs(spec.ell - spec.alpha);
        amp_ = 1.0 / specfun::bessel_peak(specfun::Order(nu_));
        break;
      case ModeFamily::landau_lg:
        waist_ = ctx.magnetic_length();
        amp_ = lg_norm(spec.n, std::abs(spec.ell), waist_);
        break;
      case ModeFamily::free_lg:
        waist_ = spec.w0;
        break;
    }
  }

  const ModeSpec& spec() const { return spec_; }
  double kz() const { return kz_; }

  // Full mode value psi(r, phi, z) including the vortex and carrier factors.
  cplx operator()(double r, double phi, double z) const {
    return radial(r, z) * std::polar(1.0, spec_.ell * phi);
  }

  // phi-independent factor: psi = radial(r, z) * exp(i l phi). Lets polar
  // sampling reuse one evaluation per ring.
  cplx radial(double r, double z) const {
    const int al = std::abs(spec_.ell);
    switch (spec_.family) {
      case ModeFamily::free_bessel:
      case ModeFamily::ab_bessel: {
        const double j = specfun::bessel_j(specfun::Order(nu_), spec_.kappa * r);
        return amp_ * j * std::polar(1.0, kz_ * z);
      }
      case ModeFamily::landau_lg: {
        const double x2 = 2.0 * r * r / (waist_ * waist_);
        const double body = amp_ * std::pow(r / waist_, al) *
                            specfun::laguerre(spec_.n, al, x2) * std::exp(-0.5 * x2);
        return body * std::polar(1.0, kz_ * z);
      }
      case ModeFamily::free_lg: {
        const BeamGeometry g = beam_geometry(waist_, ctx_.k, z);
        const double x2 = 2.0 * r * r / (g.w * g.w);
        const double body = lg_norm(spec_.n, al, g.w) * std::pow(r / g.w, al) *
                            specfun::laguerre(spec_.n, al, x2) * std::exp(-0.5 * x2);
        const double phase = 0.5 * ctx_.k * r * r * g.inv_R + kz_ * z -
                             (2.0 * spec_.n + al + 1.0) * g.zeta;
        return body * std::polar(1.0, phase);
      }
    }
    throw std::logic_error("unreachable");
  }

 private:
  // Unit transverse L2 norm constant for the (r/w)^|l| LG convention:
  // sqrt(2^(|l|+1) n! / (pi w^2 (n+|l|)!)).
  static double lg_norm(int n, int al, double w) {
    const double log_c = (al + 1) * std::numbers::ln2 + std::lgamma(n + 1.0) -
                         std::lgamma(n + al + 1.0) - std::log(pi);
    return std::exp(0.5 * log_c) / w;
  }

  ModeSpec spec_;
  PhysicalContext ctx_;
  double kz_ = 0.0;
  double nu_ = 0.0;
  double amp_ = 1.0;
  double waist_ = 0.0;
};

inline cplx eval_mode(const ModeSpec& spec, const PhysicalContext& ctx, double r, double phi,
                      double z) {
  if (r < 0.0) throw std::domain_error("eval_mode: r must be >= 0");
  return ModeEvaluator(spec, ctx)(r, phi, z);
}

}  // namespace evb
