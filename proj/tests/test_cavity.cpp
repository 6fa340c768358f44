#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fsskit/cavity.hpp"
#include "fsskit/rng.hpp"

using namespace fsskit;

namespace {

std::vector<double> wavelength_grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (double lam = lo; lam <= hi + 1e-9; lam += step) out.push_back(lam);
  return out;
}

Stack random_lossless_stack(RngStream& rng, int n_layers) {
  Stack st;
  st.ambient_index = {1.0, 0.0};
  st.substrate_index = {rng.uniform(1.3, 3.6), 0.0};
  for (int k = 0; k < n_layers; ++k)
    st.layers.push_back({{rng.uniform(1.2, 3.6), 0.0}, rng.uniform(20.0, 400.0), ""});
  return st;
}

}  // namespace

TEST_CASE("index-matched layer reduces to the bare fresnel interface") {
  Stack st;
  st.ambient_index = {1.0, 0.0};
  st.substrate_index = {3.41, 0.0};
  st.layers.push_back({{3.41, 0.0}, 123.0, "bulk"});  // same index as the substrate
  const auto [r, t] = reflectance_transmittance(st, 1310.0);
  const double fresnel = std::pow((3.41 - 1.0) / (3.41 + 1.0), 2);
  CHECK(r == Catch::Approx(fresnel).margin(1e-12));
  CHECK(t == Catch::Approx(1.0 - fresnel).margin(1e-12));
}

TEST_CASE("quarter-wave antireflection coating nulls the reflectance") {
  const double ns = 2.25, lam0 = 1310.0;
  Stack st;
  st.substrate_index = {ns, 0.0};
  const double nc = std::sqrt(ns);
  st.layers.push_back({{nc, 0.0}, quarter_wave_thickness(lam0, nc), "AR"});
  CHECK(reflectance_transmittance(st, lam0).first == Catch::Approx(0.0).margin(1e-12));
  // detuned wavelength reflects again
  CHECK(reflectance_transmittance(st, 1.3 * lam0).first > 1e-3);
}

TEST_CASE("quarter-wave mirror matches the analytic admittance oracle") {
  // at the design wavelength each quarter-wave layer maps the admittance
  // Y -> n^2 / Y, so an (HL)^N stack on a substrate has Y = (nH/nL)^{2N} ns
  const double n_h = 3.41, n_l = 3.07, ns = 3.41, lam0 = 1310.0;
  for (int pairs : {5, 15, 25}) {
    Stack st;
    st.substrate_index = {ns, 0.0};
    for (int k = 0; k < pairs; ++k) {
      st.layers.push_back({{n_h, 0.0}, quarter_wave_thickness(lam0, n_h), "H"});
      st.layers.push_back({{n_l, 0.0}, quarter_wave_thickness(lam0, n_l), "L"});
    }
    const double y = std::pow(n_h / n_l, 2 * pairs) * ns;
    const double oracle = std::pow((1.0 - y) / (1.0 + y), 2);
    CHECK(reflectance_transmittance(st, lam0).first == Catch::Approx(oracle).margin(1e-6));
  }
}

TEST_CASE("reflectance grows monotonically with mirror pairs") {
  const double lam0 = 1310.0;
  double prev = 0.0;
  for (int pairs = 1; pairs <= 12; ++pairs) {
    Stack st;
    st.substrate_index = {3.41, 0.0};
    for (int k = 0; k < pairs; ++k) {
      st.layers.push_back({{3.41, 0.0}, quarter_wave_thickness(lam0, 3.41), "H"});
      st.layers.push_back({{3.07, 0.0}, quarter_wave_thickness(lam0, 3.07), "L"});
    }
    const double r = reflectance_transmittance(st, lam0).first;
    CHECK(r > prev);
    prev = r;
  }
  CHECK(prev > 0.9);
}

TEST_CASE("energy conservation for lossless stacks") {
  RngStream rng(41);
  for (int k = 0; k < 50; ++k) {
    Stack st = random_lossless_stack(rng, 1 + static_cast<int>(rng.uniform(0.0, 12.0)));
    const double lam = rng.uniform(900.0, 1600.0);
    const auto [r, t] = reflectance_transmittance(st, lam);
    CHECK(r + t == Catch::Approx(1.0).margin(1e-10));
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("absorbing layer breaks r + t = 1 in the right direction") {
  Stack st;
  st.substrate_index = {3.41, 0.0};
  st.layers.push_back({{3.0, 0.05}, 500.0, "lossy"});
  const auto [r, t] = reflectance_transmittance(st, 1310.0);
  CHECK(r + t < 1.0);
  CHECK(r + t > 0.0);
}

TEST_CASE("reflectance is invariant under joint wavelength and thickness scaling") {
  RngStream rng(42);
  Stack st = random_lossless_stack(rng, 8);
  const double lam = 1200.0, f = 1.7;
  const double r0 = reflectance_transmittance(st, lam).first;
  for (auto& l : st.layers) l.thickness_nm *= f;
  CHECK(reflectance_transmittance(st, f * lam).first == Catch::Approx(r0).margin(1e-12));
}

TEST_CASE("reversed lossless stack has the same reflectance") {
  RngStream rng(43);
  for (int k = 0; k < 20; ++k) {
    Stack st = random_lossless_stack(rng, 7);
    st.substrate_index = st.ambient_index;  // symmetric surroundings
    Stack rev = st;
    std::reverse(rev.layers.begin(), rev.layers.end());
    const double lam = rng.uniform(900.0, 1600.0);
    CHECK(reflectance_transmittance(st, lam).first ==
          Catch::Approx(reflectance_transmittance(rev, lam).first).margin(1e-10));
  }
}

TEST_CASE("sample epitaxy stack shows the expected cavity dip") {
  const auto st = make_epitaxy_stack();
  const auto spectrum = reflectance_spectrum(st, wavelength_grid(1150.0, 1480.0, 0.25));
  const auto mode = find_cavity_mode(spectrum);
  CHECK(mode.center_nm > 1280.0);
  CHECK(mode.center_nm < 1340.0);
  CHECK(mode.fwhm_nm > 15.0);
  CHECK(mode.fwhm_nm < 80.0);
  CHECK(mode.depth > 0.01);

  // the stopband around the dip is highly reflective
  double max_r = 0.0;
  for (const auto& pt : spectrum)
    if (std::fabs(pt.lambda_nm - mode.center_nm) < 60.0 &&
        std::fabs(pt.lambda_nm - mode.center_nm) > 2.0 * mode.fwhm_nm)
      max_r = std::max(max_r, pt.reflectance);
  CHECK(max_r > 0.9);
}

TEST_CASE("cavity mode finder rejects dip-free spectra") {
  // plain DBR without the spacer: no mode inside the stopband
  EpitaxyStackParams p;
  Stack st;
  st.substrate_index = {p.n_gaas, 0.0};
  for (int k = 0; k < 25; ++k) {
    st.layers.push_back({{p.n_gaas, 0.0}, quarter_wave_thickness(1310.0, p.n_gaas), "H"});
    st.layers.push_back({{p.n_algaas, 0.0}, quarter_wave_thickness(1310.0, p.n_algaas), "L"});
  }
  const auto spectrum = reflectance_spectrum(st, wavelength_grid(1270.0, 1350.0, 0.5));
  CHECK_THROWS_AS(find_cavity_mode(spectrum), domain_error);
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(quarter_wave_thickness(-1.0, 3.0), domain_error);
  Stack st;
  CHECK_THROWS_AS(reflectance_spectrum(st, {1310.0}), domain_error);
  st.layers.push_back({{3.0, 0.0}, -5.0, ""});
  CHECK_THROWS_AS(reflectance_spectrum(st, {1310.0}), domain_error);
  st.layers[0].thickness_nm = 5.0;
  CHECK_THROWS_AS(reflectance_transmittance(st, -10.0), domain_error);
}
