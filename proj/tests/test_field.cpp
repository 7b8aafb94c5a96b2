// Grid sampling, probability current against the closed-form profiles, gauge
// transformations, and the file formats.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "evb/field.hpp"
#include "evb/field_io.hpp"
#include "evb/observables.hpp"

using namespace evb;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// azimuthal projection of the transverse current at a node
double j_phi_at(const CurrentMap& cur, std::size_t idx) {
  const Grid::Point p = cur.grid.point(idx);
  return (-std::sin(p.phi)) * cur.j[idx][0] + std::cos(p.phi) * cur.j[idx][1];
}

}  // namespace

TEST_CASE("sampled Landau ground state integrates to unit norm") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid cart = Grid::cartesian(128, 128, 4.0 * ctx.w_m);
  const FieldMap f = sample(ModeSpec::landau_lg(0, 0), ctx, cart);
  CHECK_THAT(norm_integral(f), WithinAbs(1.0, 1e-6));

  const Grid pol = Grid::polar(512, 128, 7.0 * ctx.w_m);
  CHECK_THAT(norm_integral(sample(ModeSpec::landau_lg(0, 0), ctx, pol)),
             WithinAbs(1.0, 1e-6));
}

TEST_CASE("empty superpositions are rejected") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid g = Grid::polar(64, 64, 4.0);
  CHECK_THROWS_AS(sample(std::vector<Term>{}, ctx, g, 0.0), std::invalid_argument);
}

TEST_CASE("mixed flux parameters are rejected") {
  const auto ctx = make_context(0.0, 0.5);
  const Grid g = Grid::polar(64, 64, 4.0);
  const std::vector<Term> terms{{ModeSpec::ab_bessel(1, 0.5, -1.5), cplx(1.0, 0.0)},
                                {ModeSpec::ab_bessel(0, 0.5, 0.7), cplx(1.0, 0.0)}};
  CHECK_THROWS_AS(sample(terms, ctx, g, 0.0), std::invalid_argument);
}

TEST_CASE("balanced superposition density follows cos^2(l phi)") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid g = Grid::polar(128, 256, 6.0 * ctx.w_m);
  const int ell = 2;
  const std::vector<Term> terms{{ModeSpec::landau_lg(-ell, 0), cplx(1.0, 0.0)},
                                {ModeSpec::landau_lg(ell, 0), cplx(1.0, 0.0)}};
  const FieldMap f = sample(terms, ctx, g, 0.0);
  const int ir = 40;  // some ring with appreciable amplitude
  // rho(phi) = A cos^2(l phi) at fixed radius
  double amp = 0.0;
  for (int j = 0; j < g.nphi; ++j)
    amp = std::max(amp, std::norm(f.psi[g.index(ir, j)]));
  REQUIRE(amp > 0.0);
  for (int j = 0; j < g.nphi; j += 7) {
    const double expect = amp * std::pow(std::cos(ell * g.phi(j)), 2);
    CHECK_THAT(std::norm(f.psi[g.index(ir, j)]), WithinAbs(expect, 1e-10 * amp));
  }
}

TEST_CASE("free Bessel current: r j_phi / rho equals the vortex charge") {
  const auto ctx = make_context(0.0, 0.5);
  const double kappa = 0.6;
  const auto spec = ModeSpec::free_bessel(2, kappa);
  const double rmax = specfun::bessel_zero(specfun::Order(2.0), 6) / kappa;
  const Grid g = Grid::polar(512, 256, rmax);
  const CurrentMap cur = density_current(sample(spec, ctx, g));
  for (int ir : {64, 200, 350}) {
    const std::size_t idx = g.index(ir, 13);
    const double ratio = g.r(ir) * j_phi_at(cur, idx) / cur.rho[idx];
    CHECK_THAT(ratio, WithinAbs(2.0, 1e-3));
  }
}

TEST_CASE("Aharonov-Bohm current: r j_phi / rho equals l - alpha") {
  const auto ctx = make_context(0.0, 0.5);
  const auto spec = ModeSpec::ab_bessel(1, 0.6, -1.5);
  const double rmax = specfun::bessel_zero(specfun::Order(2.5), 6) / 0.6;
  const Grid g = Grid::polar(512, 256, rmax);
  const CurrentMap cur = density_current(sample(spec, ctx, g));
  for (int ir : {80, 220, 380}) {
    const std::size_t idx = g.index(ir, 101);
    const double ratio = g.r(ir) * j_phi_at(cur, idx) / cur.rho[idx];
    CHECK_THAT(ratio, WithinAbs(2.5, 1e-3));
  }
}

TEST_CASE("Landau counter-rotating mode: azimuthal current changes sign") {
  // l sigma < 0: j_phi = 0 where 2 r^2 / w_m^2 = |l|, i.e. r = w_m sqrt(|l|/2),
  // the first radial maximum for n = 0.
  const auto ctx = make_context(2.0, 50.0);
  const auto spec = ModeSpec::landau_lg(-2, 0);
  const Grid g = Grid::polar(512, 128, 7.0 * ctx.w_m);
  const CurrentMap cur = density_current(sample(spec, ctx, g));
  const double expected = ctx.w_m;  // sqrt(|l|/2) w_m with |l| = 2
  double crossing = 0.0;
  for (int ir = 1; ir < g.nr; ++ir) {
    const double a = j_phi_at(cur, g.index(ir - 1, 0));
    const double b = j_phi_at(cur, g.index(ir, 0));
    if (a < 0.0 && b >= 0.0) {
      crossing = 0.5 * (g.r(ir - 1) + g.r(ir));
      break;
    }
  }
  REQUIRE(crossing > 0.0);
  CHECK_THAT(crossing, WithinAbs(expected, g.hr()));
}

TEST_CASE("analytic current profiles") {
  const auto ctx_b = make_context(2.0, 50.0);
  // Landau l=1, n=0, sigma=1: j_phi r / rho = 1 + 2 r^2 / w_m^2 > 0
  for (double r : {0.2, 0.9, 2.4}) {
    const auto prof = analytic_current_profile(ModeSpec::landau_lg(1, 0), ctx_b, r);
    const double expect = 1.0 + 2.0 * r * r / (ctx_b.w_m * ctx_b.w_m);
    CHECK_THAT(prof.j_phi * r / prof.rho, WithinRel(expect, 1e-12));
    CHECK(prof.j_phi > 0.0);
  }
  // free LG with l=0 has no azimuthal current
  const auto ctx_0 = make_context(0.0, 0.5);
  for (double r : {0.0, 0.5, 1.5})
    CHECK(analytic_current_profile(ModeSpec::free_lg(0, 1, 30.0), ctx_0, r).j_phi == 0.0);
  // AB with l=0 still circulates: ratio = -alpha
  const auto prof = analytic_current_profile(ModeSpec::ab_bessel(0, 0.6, -1.5), ctx_0, 2.0);
  CHECK_THAT(prof.j_phi * 2.0 / prof.rho, WithinRel(1.5, 1e-12));
}

TEST_CASE("finite-difference current matches the analytic profiles") {
  const auto ctx = make_context(2.0, 50.0);
  const auto spec = ModeSpec::landau_lg(2, 1);
  const Grid g = Grid::polar(512, 256, 8.0 * ctx.w_m);
  const FieldMap f = sample(spec, ctx, g);
  const CurrentMap cur = density_current(f);
  double worst = 0.0, scale = 0.0;
  for (int ir = 8; ir < g.nr - 8; ir += 17) {
    const std::size_t idx = g.index(ir, 31);
    const auto prof = analytic_current_profile(spec, ctx, g.r(ir));
    worst = std::max(worst, std::abs(j_phi_at(cur, idx) - prof.j_phi));
    worst = std::max(worst, std::abs(cur.rho[idx] - prof.rho));
    worst = std::max(worst, std::abs(cur.jz[idx] - prof.j_z));
    scale = std::max(scale, std::abs(prof.j_z));
  }
  CHECK(worst < 1e-6 * scale);
}

TEST_CASE("current split: j = j_vortex + j_potential exactly") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid g = Grid::polar(128, 64, 6.0 * ctx.w_m);
  const CurrentMap cur = density_current(sample(ModeSpec::landau_lg(-1, 0), ctx, g));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(cur.j[i][0] == cur.j_vortex[i][0] + cur.j_potential[i][0]);
    CHECK(cur.j[i][1] == cur.j_vortex[i][1] + cur.j_potential[i][1]);
  }
}

TEST_CASE("continuity: transverse divergence vanishes for a stationary mode") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid g = Grid::polar(384, 192, 7.0 * ctx.w_m);
  const CurrentMap cur = density_current(sample(ModeSpec::landau_lg(1, 0), ctx, g));
  const double div = max_transverse_divergence(cur);
  CHECK(div < 1e-3 * max_current_magnitude(cur) / g.hr());
}

TEST_CASE("AB symmetry: (l, alpha) -> (-l, -alpha) invariant, (-l, alpha) not") {
  const auto ctx = make_context(0.0, 0.5);
  const double kappa = 0.6;
  const double rmax = specfun::bessel_zero(specfun::Order(2.5), 6) / kappa;
  const Grid g = Grid::polar(256, 128, rmax);

  const FieldMap fa = sample(ModeSpec::ab_bessel(1, kappa, -1.5), ctx, g);
  const FieldMap fb = sample(ModeSpec::ab_bessel(-1, kappa, 1.5), ctx, g);
  const CurrentMap ca = density_current(fa);
  const CurrentMap cb = density_current(fb);
  double rho_diff = 0.0, jphi_diff = 0.0, rho_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    rho_diff = std::max(rho_diff, std::abs(ca.rho[i] - cb.rho[i]));
    jphi_diff = std::max(jphi_diff,
                         std::abs(std::abs(j_phi_at(ca, i)) - std::abs(j_phi_at(cb, i))));
    rho_max = std::max(rho_max, ca.rho[i]);
  }
  CHECK(rho_diff < 1e-10 * rho_max);
  CHECK(jphi_diff < 1e-9 * rho_max);

  // flipping l alone changes the observables measurably
  const FieldMap fc = sample(ModeSpec::ab_bessel(-1, kappa, -1.5), ctx, g);
  double rel = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    rel = std::max(rel, std::abs(std::norm(fa.psi[i]) - std::norm(fc.psi[i])) / rho_max);
  CHECK(rel > 1e-2);
}

TEST_CASE("Landau density independent of sgn l and sigma") {
  const auto up = make_context(2.0, 50.0);
  const auto down = make_context(-2.0, 50.0);
  const Grid g = Grid::polar(128, 64, 6.0 * up.w_m);
  const FieldMap f1 = sample(ModeSpec::landau_lg(2, 1), up, g);
  const FieldMap f2 = sample(ModeSpec::landau_lg(-2, 1), up, g);
  const FieldMap f3 = sample(ModeSpec::landau_lg(2, 1), down, g);
  double m = 0.0;
  for (const cplx& v : f1.psi) m = std::max(m, std::norm(v));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(std::norm(f1.psi[i]) - std::norm(f2.psi[i])) < 1e-10 * m);
    CHECK(std::abs(std::norm(f1.psi[i]) - std::norm(f3.psi[i])) < 1e-10 * m);
  }
}

TEST_CASE("resolution guard rejects grids too coarse for the stencils") {
  const auto ctx = make_context(0.0, 200.0);
  const auto spec = ModeSpec::free_bessel(1, 19.0);  // fast radial oscillation
  const Grid g = Grid::polar(32, 64, 8.0);
  const FieldMap f = sample(spec, ctx, g);
  CHECK_THROWS_AS(density_current(f), std::invalid_argument);
}

TEST_CASE("gauge transform with constant chi leaves the current untouched") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid g = Grid::polar(128, 64, 6.0 * ctx.w_m);
  const FieldMap f = sample(ModeSpec::landau_lg(1, 0), ctx, g);
  const VectorPotential pot = infer_potential(f);
  const CurrentMap before = density_current(f, pot);
  const auto [f2, pot2] = gauge_transform(f, pot, [](double, double) { return 1.234; });
  const CurrentMap after = density_current(f2, pot2);
  double m = max_current_magnitude(before);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(after.j[i][0] - before.j[i][0]) < 1e-13 * m);
    CHECK(std::abs(after.j[i][1] - before.j[i][1]) < 1e-13 * m);
    CHECK(std::abs(after.rho[i] - before.rho[i]) < 1e-13);
  }
}

TEST_CASE("gauge transform with chi = c x preserves rho and kinetic j") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid g = Grid::cartesian(384, 384, 4.0 * ctx.w_m);
  const FieldMap f = sample(ModeSpec::landau_lg(1, 0), ctx, g);
  const VectorPotential pot = infer_potential(f);
  const CurrentMap before = density_current(f, pot);
  const double c = 0.7;
  const auto [f2, pot2] = gauge_transform(f, pot, [c](double x, double) { return c * x; });
  const CurrentMap after = density_current(f2, pot2);
  const double m = max_current_magnitude(before);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    worst = std::max(worst, std::abs(after.j[i][0] - before.j[i][0]));
    worst = std::max(worst, std::abs(after.j[i][1] - before.j[i][1]));
    CHECK(std::abs(after.rho[i] - before.rho[i]) <= 1e-12 * (1.0 + before.rho[i]));
  }
  CHECK(worst < 1e-6 * m);
}

TEST_CASE("multivalued chi is rejected by the winding check") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid g = Grid::polar(64, 128, 6.0 * ctx.w_m);
  const FieldMap f = sample(ModeSpec::landau_lg(0, 0), ctx, g);
  const VectorPotential pot = infer_potential(f);
  CHECK_THROWS_AS(
      gauge_transform(f, pot, [](double x, double y) { return std::atan2(y, x); }),
      std::invalid_argument);
  // same on a Cartesian grid
  const Grid gc = Grid::cartesian(64, 64, 4.0 * ctx.w_m);
  const FieldMap fc = sample(ModeSpec::landau_lg(0, 0), ctx, gc);
  CHECK_THROWS_AS(
      gauge_transform(fc, infer_potential(fc),
                      [](double x, double y) { return std::atan2(y, x); }),
      std::invalid_argument);
}

TEST_CASE("CSV dump carries the exact header and is byte-deterministic") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid g = Grid::cartesian(48, 48, 3.0 * ctx.w_m);
  const FieldMap f = sample(ModeSpec::landau_lg(1, 0), ctx, g);
  const CurrentMap cur = density_current(f);
  const std::string p1 = "csv_once.csv", p2 = "csv_twice.csv";
  io::write_field_csv(p1, f, cur);
  io::write_field_csv(p2, f, cur);
  std::ifstream in1(p1), in2(p2);
  std::stringstream s1, s2;
  s1 << in1.rdbuf();
  s2 << in2.rdbuf();
  const std::string text = s1.str();
  CHECK(text == s2.str());
  CHECK(text.substr(0, text.find('\n')) == "x,y,re,im,rho,jx,jy,jvx,jvy,jpx,jpy");
  // row count: header + one line per node
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == static_cast<long>(g.size()) + 1);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("PGM and PNG rasters") {
  const auto ctx = make_context(2.0, 50.0);
  const Grid g = Grid::cartesian(32, 32, 3.0 * ctx.w_m);
  const FieldMap f = sample(ModeSpec::landau_lg(1, 0), ctx, g);
  const auto rho = io::rasterize(f, io::RasterKind::density);
  const auto phase = io::rasterize(f, io::RasterKind::phase);
  CHECK(rho.width == 32);
  CHECK(rho.height == 32);
  CHECK(*std::max_element(rho.pixels.begin(), rho.pixels.end()) == 65535);

  io::write_pgm16("img.pgm", rho);
  std::ifstream pgm("img.pgm", std::ios::binary);
  std::string magic;
  pgm >> magic;
  CHECK(magic == "P5");
  int w = 0, h = 0, maxv = 0;
  pgm >> w >> h >> maxv;
  CHECK(w == 32);
  CHECK(h == 32);
  CHECK(maxv == 65535);

  io::write_png16("img.png", phase);
  std::ifstream png("img.png", std::ios::binary);
  unsigned char sig[8];
  png.read(reinterpret_cast<char*>(sig), 8);
  CHECK(sig[0] == 0x89);
  CHECK(sig[1] == 'P');
  CHECK(sig[2] == 'N');
  CHECK(sig[3] == 'G');
  std::remove("img.pgm");
  std::remove("img.png");
}
