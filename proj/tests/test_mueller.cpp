// Mueller calculus checks. The key oracle here is the Jones lift: every
// element is also implemented as a 2x2 Jones matrix and propagated through
// the coherency matrix, which fixes all sign conventions independently.
#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "fsskit/core.hpp"
#include "fsskit/mueller.hpp"
#include "fsskit/rng.hpp"

using namespace fsskit;
using cd = std::complex<double>;

namespace {

struct Jones {
  cd m[2][2];
};

Jones jones_rotation(double theta_rad) {
  const double c = std::cos(theta_rad), s = std::sin(theta_rad);
  return {{{cd(c), cd(-s)}, {cd(s), cd(c)}}};
}

Jones jones_mul(const Jones& a, const Jones& b) {
  Jones out{};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      out.m[r][c] = a.m[r][0] * b.m[0][c] + a.m[r][1] * b.m[1][c];
  return out;
}

Jones jones_retarder(double theta_deg, double delta_deg) {
  const double th = deg_to_rad(theta_deg), d = deg_to_rad(delta_deg);
  const Jones diag{{{std::polar(1.0, 0.5 * d), cd(0.0)},
                    {cd(0.0), std::polar(1.0, -0.5 * d)}}};
  return jones_mul(jones_rotation(th), jones_mul(diag, jones_rotation(-th)));
}

Jones jones_lp(double axis_deg) {
  const double th = deg_to_rad(axis_deg);
  const Jones diag{{{cd(1.0), cd(0.0)}, {cd(0.0), cd(0.0)}}};
  return jones_mul(jones_rotation(th), jones_mul(diag, jones_rotation(-th)));
}

/// Propagate a Stokes vector through a Jones matrix via the coherency
/// matrix Phi = [[I+Q, U+iV], [U-iV, I-Q]]/2, Phi' = J Phi J^dagger.
StokesVector jones_apply(const Jones& j, const StokesVector& s) {
  cd phi[2][2] = {{cd(0.5 * (s.i + s.q)), cd(0.5 * s.u, 0.5 * s.v)},
                  {cd(0.5 * s.u, -0.5 * s.v), cd(0.5 * (s.i - s.q))}};
  cd tmp[2][2]{};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      tmp[r][c] = j.m[r][0] * phi[0][c] + j.m[r][1] * phi[1][c];
  cd out[2][2]{};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      out[r][c] = tmp[r][0] * std::conj(j.m[c][0]) + tmp[r][1] * std::conj(j.m[c][1]);
  return {out[0][0].real() + out[1][1].real(), out[0][0].real() - out[1][1].real(),
          2.0 * out[0][1].real(), 2.0 * out[0][1].imag()};
}

StokesVector random_physical_stokes(RngStream& rng) {
  // random partially polarized state
  const double p = rng.uniform();
  const double th = rng.uniform(0.0, pi);
  const double ph = rng.uniform(0.0, 2.0 * pi);
  const double i = rng.uniform(0.1, 5.0);
  return {i, i * p * std::sin(th) * std::cos(ph), i * p * std::sin(th) * std::sin(ph),
          i * p * std::cos(th)};
}

void check_close(const StokesVector& a, const StokesVector& b, double tol) {
  CHECK(a.i == Catch::Approx(b.i).margin(tol));
  CHECK(a.q == Catch::Approx(b.q).margin(tol));
  CHECK(a.u == Catch::Approx(b.u).margin(tol));
  CHECK(a.v == Catch::Approx(b.v).margin(tol));
}

}  // namespace

TEST_CASE("mueller matrices agree with the jones lift") {
  RngStream rng(101);
  for (int k = 0; k < 200; ++k) {
    const double axis = rng.uniform(-360.0, 360.0);
    const double delta = rng.uniform(0.0, 360.0);
    const StokesVector s = random_physical_stokes(rng);

    check_close(mueller_retarder(axis, delta) * s,
                jones_apply(jones_retarder(axis, delta), s), 1e-12);
    check_close(mueller_lp(axis) * s, jones_apply(jones_lp(axis), s), 1e-12);
  }
}

TEST_CASE("rotation matrix matches basis change of linear states") {
  RngStream rng(102);
  for (int k = 0; k < 50; ++k) {
    const double psi = rng.uniform(0.0, 180.0);
    const double rot = rng.uniform(-180.0, 180.0);
    const auto rotated = mueller_rotation(rot) * linear_stokes(psi);
    check_close(rotated, linear_stokes(psi + rot), 1e-12);
  }
}

TEST_CASE("polarimeter intensity closed form matches the element chain") {
  RngStream rng(103);
  for (int k = 0; k < 100; ++k) {
    const StokesVector s = random_physical_stokes(rng);
    const double chi = rng.uniform(-360.0, 360.0);
    const StokesVector out = mueller_lp(0.0) * (mueller_qwp(chi) * s);
    CHECK(polarimeter_intensity(s, chi) == Catch::Approx(out.i).margin(1e-12));
  }
  CHECK_THROWS_AS(polarimeter_intensity({1.0, 1.0, 1.0, 0.0}, 0.0), domain_error);
}

TEST_CASE("polarimeter intensity examples") {
  // horizontal light, QWP axis horizontal: full transmission
  CHECK(polarimeter_intensity(linear_stokes(0.0), 0.0) == Catch::Approx(1.0));
  // vertical light through LP(0) with QWP at 0: blocked
  CHECK(polarimeter_intensity(linear_stokes(90.0), 0.0) == Catch::Approx(0.0).margin(1e-15));
  // unpolarized light: constant 1/2
  for (double chi : {0.0, 17.0, 45.0, 90.0})
    CHECK(polarimeter_intensity({1.0, 0.0, 0.0, 0.0}, chi) == Catch::Approx(0.5));
  // circular light modulates at 2chi with amplitude 1/2 around 1/4+I/2... check at extrema
  const StokesVector rc{1.0, 0.0, 0.0, 1.0};
  CHECK(polarimeter_intensity(rc, 45.0) == Catch::Approx(1.0));
  CHECK(polarimeter_intensity(rc, 135.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("complementary polarizer outputs sum to the input intensity") {
  RngStream rng(104);
  for (int k = 0; k < 100; ++k) {
    const StokesVector s = random_physical_stokes(rng);
    const double chi = rng.uniform(0.0, 360.0);
    const StokesVector ws = mueller_qwp(chi) * s;
    const double i0 = (mueller_lp(0.0) * ws).i;
    const double i90 = (mueller_lp(90.0) * ws).i;
    CHECK(i0 + i90 == Catch::Approx(s.i).margin(1e-12));
  }
}

TEST_CASE("retarders are lossless and preserve the polarized length") {
  RngStream rng(105);
  for (int k = 0; k < 100; ++k) {
    const StokesVector s = random_physical_stokes(rng);
    const StokesVector out = mueller_retarder(rng.uniform(0.0, 180.0),
                                              rng.uniform(0.0, 360.0)) * s;
    CHECK(out.i == Catch::Approx(s.i).margin(1e-12));
    CHECK(out.polarized_length() == Catch::Approx(s.polarized_length()).margin(1e-12));
    CHECK(out.physical(1e-9));
  }
}

TEST_CASE("retarder periodicity and composition") {
  RngStream rng(106);
  const StokesVector s = random_physical_stokes(rng);
  // axis period 180 deg
  check_close(mueller_hwp(12.0) * s, mueller_hwp(192.0) * s, 1e-12);
  // two QWPs at the same axis make an HWP
  check_close(mueller_qwp(31.0) * (mueller_qwp(31.0) * s), mueller_hwp(31.0) * s, 1e-12);
  // zero retardance is the identity
  check_close(mueller_retarder(77.0, 0.0) * s, s, 1e-12);
}

TEST_CASE("half wave plate reflects linear polarization about its axis") {
  for (double psi : {0.0, 10.0, 45.0, 100.0}) {
    for (double axis : {0.0, 22.5, 82.0}) {
      const auto out = mueller_hwp(axis) * linear_stokes(psi);
      check_close(out, linear_stokes(2.0 * axis - psi), 1e-12);
    }
  }
}
