// Context derivations, dispersion relations, level structure, and analytic
// mode evaluation.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "evb/modes.hpp"

using namespace evb;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("make_context derives the Larmor scales") {
  const auto ctx = make_context(2.0, 0.5);
  CHECK(ctx.sigma == 1);
  CHECK_THAT(ctx.Omega, WithinAbs(-1.0, 1e-15));  // e = -1: Omega = -B/2
  CHECK_THAT(ctx.abs_Omega, WithinAbs(1.0, 1e-15));
  CHECK_THAT(ctx.w_m, WithinAbs(std::sqrt(2.0), 1e-15));
  CHECK_THAT(ctx.v, WithinAbs(1.0, 1e-15));
  CHECK_THAT(ctx.z_m, WithinAbs(1.0, 1e-15));

  // both forms of the scale relations agree
  CHECK_THAT(ctx.w_m, WithinRel(std::sqrt(2.0 / ctx.abs_Omega), 1e-14));
  CHECK_THAT(ctx.z_m, WithinRel(std::sqrt(ctx.E / ctx.abs_Omega) * ctx.w_m, 1e-14));
}

TEST_CASE("make_context accepts free space and flags the undefined scales") {
  const auto ctx = make_context(0.0, 0.5);
  CHECK(ctx.sigma == 0);
  CHECK_FALSE(ctx.has_field());
  CHECK(std::isnan(ctx.w_m));
  CHECK(std::isnan(ctx.z_m));
  CHECK_THROWS_AS(ctx.magnetic_length(), std::logic_error);
  CHECK_THROWS_AS(ctx.larmor_length(), std::logic_error);
}

TEST_CASE("make_context sign symmetry") {
  const auto plus = make_context(2.0, 0.5);
  const auto minus = make_context(-2.0, 0.5);
  CHECK(minus.sigma == -1);
  CHECK_THAT(minus.w_m, WithinRel(plus.w_m, 1e-15));
  CHECK_THAT(minus.z_m, WithinRel(plus.z_m, 1e-15));
  CHECK_THAT(minus.Omega, WithinAbs(-plus.Omega, 1e-15));
}

TEST_CASE("make_context rejects non-positive energy") {
  CHECK_THROWS_AS(make_context(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(make_context(1.0, -2.0), std::domain_error);
}

TEST_CASE("bessel_kz dispersion") {
  CHECK_THAT(bessel_kz(0.5, 0.6), WithinAbs(0.8, 1e-15));  // 3-4-5 with k = 1
  CHECK_THAT(bessel_kz(0.5, 0.0), WithinAbs(1.0, 1e-15));  // plane-wave limit
  CHECK_THROWS_AS(bessel_kz(0.5, 1.5), std::domain_error);  // evanescent
}

TEST_CASE("landau_levels reproduces the level structure") {
  auto lv = landau_levels(0, 0, 1);
  CHECK(lv.N == 0);
  CHECK(lv.e_perp == 1);  // minimal level

  lv = landau_levels(3, 1, 1);
  CHECK(lv.N == 4);
  CHECK(lv.e_perp == 9);

  lv = landau_levels(-3, 1, 1);  // anti-parallel case
  CHECK(lv.N == 1);
  CHECK(lv.e_perp == 3);
}

TEST_CASE("landau_levels: Zeeman + Gouy = transverse energy, exactly") {
  for (int sigma : {-1, 1})
    for (int ell = -6; ell <= 6; ++ell)
      for (int n = 0; n <= 5; ++n) {
        const auto lv = landau_levels(ell, n, sigma);
        CHECK(lv.e_zeeman + lv.e_gouy == lv.e_perp);        // exact integers
        CHECK(lv.e_perp == 2 * lv.N + 1);
        CHECK(lv.N >= 0);
        CHECK(lv.e_zeeman == sigma * ell);
        // transformation symmetry
        CHECK(lv.e_perp == landau_levels(-ell, n, -sigma).e_perp);
      }
}

TEST_CASE("landau_kz_exact") {
  const auto ctx = make_context(2e-3, 0.5);  // |Omega| = 1e-3
  CHECK_THAT(landau_kz_exact(ctx, 0, 0), WithinRel(std::sqrt(2.0 * (0.5 - 1e-3)), 1e-12));

  // E_perp >= E: bound state, no propagating mode
  const auto strong = make_context(2.0, 0.5);
  CHECK_THROWS_AS(landau_kz_exact(strong, 1, 0), std::domain_error);

  // B -> 0 limit approaches the free wavenumber
  const auto weak = make_context(2e-12, 0.5);
  CHECK_THAT(landau_kz_exact(weak, 1, 0), WithinAbs(weak.k, 1e-9));

  // dispersion rewritten through the kinetic OAM: 2E = kz^2 - 2 Omega <L_kin>
  for (int ell : {-2, 0, 3})
    for (int n : {0, 2}) {
      const double kz = landau_kz_exact(ctx, ell, n);
      const double l_kin = ell + ctx.sigma * (2.0 * n + std::abs(ell) + 1.0);
      CHECK_THAT(kz * kz - 2.0 * ctx.Omega * l_kin, WithinRel(2.0 * ctx.E, 1e-12));
    }
}

TEST_CASE("delta_kz_paraxial values and gate") {
  const auto ctx = make_context(2e-3, 0.5);
  CHECK_THAT(delta_kz_paraxial(ctx, 1, 0), WithinRel(-3.0 / ctx.z_m, 1e-12));
  CHECK_THAT(delta_kz_paraxial(ctx, -1, 0), WithinRel(-1.0 / ctx.z_m, 1e-12));
  // independence of the vortex charge for anti-parallel OAM
  CHECK_THAT(delta_kz_paraxial(ctx, -3, 0), WithinRel(-1.0 / ctx.z_m, 1e-12));
  CHECK_THAT(delta_kz_paraxial(ctx, -5, 0), WithinRel(-1.0 / ctx.z_m, 1e-12));

  const auto strong = make_context(0.2, 0.5);  // E_perp/E = 0.6 for l=1,n=0
  CHECK_THROWS_AS(delta_kz_paraxial(strong, 1, 0), std::domain_error);
  CHECK_NOTHROW(delta_kz_paraxial(strong, 1, 0, 0.7));  // configurable threshold
}

TEST_CASE("paraxial consistency against the exact dispersion") {
  const auto ctx = make_context(2e-4, 0.5);  // E_perp/E <= 1e-3 for the cases below
  for (int ell : {-1, 0, 1})
    for (int n : {0, 1}) {
      const double exact = landau_kz_exact(ctx, ell, n);
      const double dkz = delta_kz_paraxial(ctx, ell, n);
      CHECK(std::abs(exact - (ctx.k + dkz)) / std::abs(dkz) < 1e-2);
    }
}

TEST_CASE("beam_geometry") {
  const double w0 = 1.3, k = 2.0;
  const double zR = 0.5 * k * w0 * w0;
  auto g = beam_geometry(w0, k, 0.0);
  CHECK(g.w == w0);
  CHECK(std::isinf(g.R));
  CHECK(g.zeta == 0.0);
  CHECK_THAT(g.zR, WithinRel(zR, 1e-15));

  g = beam_geometry(w0, k, zR);
  CHECK_THAT(g.w, WithinRel(w0 * std::sqrt(2.0), 1e-14));
  CHECK_THAT(g.R, WithinRel(2.0 * zR, 1e-14));
  CHECK_THAT(g.zeta, WithinAbs(0.25 * pi, 1e-14));

  g = beam_geometry(w0, k, 1e9 * zR);
  CHECK_THAT(g.zeta, WithinAbs(0.5 * pi, 1e-8));
}

TEST_CASE("total Gouy phase") {
  CHECK_THAT(gouy_total(0, 0), WithinRel(pi, 1e-15));
  CHECK_THAT(gouy_total(2, 1), WithinRel(5.0 * pi, 1e-15));
  CHECK_THAT(gouy_total(-2, 1), WithinRel(5.0 * pi, 1e-15));
}

TEST_CASE("Dirac phase") {
  CHECK(dirac_phase(0.0) == 0.0);
  CHECK_THAT(dirac_phase(-1.5), WithinRel(-3.0 * pi, 1e-15));
  CHECK_THAT(dirac_phase(1.0), WithinRel(2.0 * pi, 1e-15));
}

TEST_CASE("caustic radius") {
  CHECK_THAT(caustic_radius(2, -1.5, 1.0), WithinRel(3.5, 1e-15));
  CHECK(caustic_radius(0, 0.0, 1.0) == 0.0);
  CHECK(caustic_radius(1, 1.0, 2.0) == 0.0);  // exact cancellation l = alpha
  CHECK_THROWS_AS(caustic_radius(1, 0.0, 0.0), std::domain_error);
}

TEST_CASE("eval_mode: Landau ground state is a Gaussian") {
  const auto ctx = make_context(2.0, 50.0);
  const auto spec = ModeSpec::landau_lg(0, 0);
  const double w = ctx.w_m;
  const double r1 = 0.7 * w, r2 = 1.3 * w;
  const double rho1 = std::norm(eval_mode(spec, ctx, r1, 0.3, 0.0));
  const double rho2 = std::norm(eval_mode(spec, ctx, r2, 2.1, 0.0));
  CHECK_THAT(rho2 / rho1,
             WithinRel(std::exp(-2.0 * (r2 * r2 - r1 * r1) / (w * w)), 1e-12));
}

TEST_CASE("eval_mode: Bessel vortex core vanishes") {
  const auto ctx = make_context(0.0, 0.5);
  const auto spec = ModeSpec::free_bessel(2, 0.6);
  CHECK(std::abs(eval_mode(spec, ctx, 0.0, 1.0, 3.0)) == 0.0);
}

TEST_CASE("eval_mode: free LG carries the Gouy phase at z_R") {
  const auto ctx = make_context(0.0, 0.5);  // k = 1
  const double w0 = 40.0;                   // paraxial: zR = 800
  const auto spec = ModeSpec::free_lg(0, 0, w0);
  const double zR = 0.5 * ctx.k * w0 * w0;
  const cplx at_zr = eval_mode(spec, ctx, 0.0, 0.0, zR);
  const double envelope_phase = std::arg(at_zr * std::polar(1.0, -ctx.k * zR));
  CHECK_THAT(envelope_phase, WithinAbs(-0.25 * pi, 1e-12));  // e^{-i (2n+|l|+1) zeta}

  // width grows by sqrt(2): amplitude ratio at fixed r tracks w(z)
  const auto g = beam_geometry(w0, ctx.k, zR);
  CHECK_THAT(g.w, WithinRel(w0 * std::sqrt(2.0), 1e-13));
  const double rho_scale = std::norm(eval_mode(spec, ctx, 0.0, 0.0, zR)) /
                           std::norm(eval_mode(spec, ctx, 0.0, 0.0, 0.0));
  CHECK_THAT(rho_scale, WithinRel(0.5, 1e-10));  // on-axis density halves
}

TEST_CASE("Landau modes coincide with free LG of waist w_m at z = 0") {
  const auto ctx_b = make_context(2.0, 50.0);
  const auto ctx_0 = make_context(0.0, 50.0);
  const auto landau = ModeSpec::landau_lg(2, 1);
  const auto lg = ModeSpec::free_lg(2, 1, ctx_b.w_m);
  for (double r : {0.1, 0.9, 1.7, 3.0})
    for (double phi : {0.0, 1.1}) {
      const cplx a = eval_mode(landau, ctx_b, r, phi, 0.0);
      const cplx b = eval_mode(lg, ctx_0, r, phi, 0.0);
      CHECK_THAT(std::abs(a - b), WithinAbs(0.0, 1e-13));
    }
}

TEST_CASE("eval_mode rejects inconsistent spec/context pairs") {
  const auto free_ctx = make_context(0.0, 0.5);
  const auto field_ctx = make_context(2.0, 50.0);
  CHECK_THROWS_AS(eval_mode(ModeSpec::landau_lg(1, 0), free_ctx, 1.0, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(eval_mode(ModeSpec::free_bessel(1, 0.5), field_ctx, 1.0, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(eval_mode(ModeSpec::free_lg(1, 0, 1.0), field_ctx, 1.0, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(eval_mode(ModeSpec::ab_bessel(1, 0.5, -1.5), field_ctx, 1.0, 0.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("mode spec constructors validate their parameters") {
  CHECK_THROWS_AS(ModeSpec::free_bessel(1, 0.0), std::domain_error);
  CHECK_THROWS_AS(ModeSpec::free_lg(1, -1, 1.0), std::domain_error);
  CHECK_THROWS_AS(ModeSpec::free_lg(1, 0, 0.0), std::domain_error);
  CHECK_THROWS_AS(ModeSpec::landau_lg(1, -2), std::domain_error);
}
