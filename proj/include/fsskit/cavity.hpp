// One-dimensional transfer-matrix reflectance for DBR microcavity stacks at
// normal incidence, plus the cavity-mode (dip) fit.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "fsskit/core.hpp"
#include "fsskit/peakfit.hpp"

namespace fsskit {

struct Layer {
  std::complex<double> refractive_index{1.0, 0.0};
  double thickness_nm = 0.0;
  std::string label;

  void validate() const {
    if (!(thickness_nm > 0.0)) throw domain_error("Layer: thickness <= 0");
    if (!(refractive_index.real() > 0.0)) throw domain_error("Layer: Re(n) <= 0");
    if (refractive_index.imag() < 0.0) throw domain_error("Layer: Im(n) < 0 (gain)");
  }
};

/// Light enters from the ambient; layers[0] is the first layer it meets.
struct Stack {
  std::complex<double> ambient_index{1.0, 0.0};
  std::vector<Layer> layers;
  std::complex<double> substrate_index{3.41, 0.0};

  void validate() const {
    if (layers.empty()) throw domain_error("Stack: no layers");
    for (const auto& l : layers) l.validate();
  }
};

inline double quarter_wave_thickness(double lambda0_nm, double n) {
  if (!(lambda0_nm > 0.0) || !(n > 0.0))
    throw domain_error("quarter_wave_thickness: need positive wavelength and index");
  return lambda0_nm / (4.0 * n);
}

struct ReflectancePoint {
  double lambda_nm = 0.0;
  double reflectance = 0.0;
};

/// Amplitude reflectance and transmittance at one wavelength
/// (characteristic-matrix method, normal incidence).
inline std::pair<double, double> reflectance_transmittance(const Stack& stack,
                                                           double lambda_nm) {
  if (!(lambda_nm > 0.0)) throw domain_error("reflectance: wavelength <= 0");
  using C = std::complex<double>;
  // (B, C) = product of layer matrices applied to (1, eta_substrate).
  // Indices are conjugated internally so that Im(n) >= 0 means absorption
  // under this recursion's phase convention.
  C b{1.0, 0.0};
  C c = std::conj(stack.substrate_index);
  for (auto it = stack.layers.rbegin(); it != stack.layers.rend(); ++it) {
    const C n = std::conj(it->refractive_index);
    const C delta = 2.0 * pi * n * it->thickness_nm / lambda_nm;
    const C cd = std::cos(delta);
    const C sd = std::sin(delta);
    const C b2 = cd * b + C(0.0, 1.0) * sd / n * c;
    const C c2 = C(0.0, 1.0) * n * sd * b + cd * c;
    b = b2;
    c = c2;
  }
  const C na = std::conj(stack.ambient_index);
  const C denom = na * b + c;
  const C r = (na * b - c) / denom;
  const double reflectance = std::norm(r);
  const double transmittance =
      4.0 * na.real() * stack.substrate_index.real() / std::norm(denom);
  return {reflectance, transmittance};
}

inline std::vector<ReflectancePoint> reflectance_spectrum(
    const Stack& stack, const std::vector<double>& lambdas_nm) {
  stack.validate();
  std::vector<ReflectancePoint> out;
  out.reserve(lambdas_nm.size());
  for (double lam : lambdas_nm)
    out.push_back({lam, reflectance_transmittance(stack, lam).first});
  return out;
}

struct CavityMode {
  double center_nm = 0.0;
  double fwhm_nm = 0.0;
  double depth = 0.0;  // shoulder reflectance minus dip minimum
};

/// Fit an inverted Gaussian to the reflectance dip between the stopband
/// shoulders.
inline CavityMode find_cavity_mode(const std::vector<ReflectancePoint>& spectrum) {
  if (spectrum.size() < 16) throw domain_error("find_cavity_mode: spectrum too short");
  const std::size_t n = spectrum.size();

  double r_max = 0.0;
  for (const auto& pt : spectrum) r_max = std::max(r_max, pt.reflectance);

  // deepest interior minimum sitting between two high shoulders; the shoulder
  // requirement keeps band-edge ripple minima from outbidding the cavity dip
  std::size_t best = 0;
  double best_depth = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (spectrum[i].reflectance >= spectrum[i - 1].reflectance ||
        spectrum[i].reflectance > spectrum[i + 1].reflectance)
      continue;
    // nearest local maxima on each side
    std::size_t l = i, r = i;
    while (l > 0 && spectrum[l - 1].reflectance >= spectrum[l].reflectance) --l;
    while (r + 1 < n && spectrum[r + 1].reflectance >= spectrum[r].reflectance) ++r;
    const double shoulder =
        std::min(spectrum[l].reflectance, spectrum[r].reflectance);
    if (shoulder < 0.85 * r_max) continue;
    const double depth = shoulder - spectrum[i].reflectance;
    if (depth > best_depth) {
      best_depth = depth;
      best = i;
    }
  }
  if (best == 0 || best_depth < 1e-3)
    throw domain_error("find_cavity_mode: no reflectance dip found");

  // window: out to the nearest shoulder maximum on each side
  std::size_t lo = best, hi = best;
  while (lo > 0 && spectrum[lo - 1].reflectance >= spectrum[lo].reflectance) --lo;
  while (hi + 1 < n && spectrum[hi + 1].reflectance >= spectrum[hi].reflectance) ++hi;

  const double shoulder =
      std::min(spectrum[lo].reflectance, spectrum[hi].reflectance);
  std::vector<double> xs, ys;
  for (std::size_t k = lo; k <= hi; ++k) {
    xs.push_back(spectrum[k].lambda_nm);
    ys.push_back(shoulder - spectrum[k].reflectance);  // inverted dip
  }

  const double sigma0 =
      fwhm_to_sigma(0.5 * (spectrum[hi].lambda_nm - spectrum[lo].lambda_nm));
  FitOptions opt;
  opt.poisson_weights = false;
  const auto fit = lm_fit_gaussians(
      xs, ys, {{best_depth, spectrum[best].lambda_nm, sigma0}}, opt);
  if (!fit.converged || fit.peaks.front().amplitude <= 0.0)
    throw domain_error("find_cavity_mode: dip fit failed");

  CavityMode mode;
  mode.center_nm = fit.peaks.front().center;
  mode.fwhm_nm = sigma_to_fwhm(fit.peaks.front().sigma);
  mode.depth = fit.peaks.front().amplitude;
  return mode;
}

/// Builder for the sample's asymmetric cavity: bottom 25-pair DBR, half-wave
/// spacer, three top quarter-wave layers. Default indices at 1310 nm.
struct EpitaxyStackParams {
  double design_lambda_nm = 1310.0;
  double n_gaas = 3.41;
  double n_algaas = 3.07;
  double n_spacer = 3.249;
  double spacer_thickness_nm = 201.6;
  int dbr_pairs = 25;
};

inline Stack make_epitaxy_stack(const EpitaxyStackParams& p = {}) {
  Stack st;
  st.ambient_index = {1.0, 0.0};
  st.substrate_index = {p.n_gaas, 0.0};
  const double d_gaas = quarter_wave_thickness(p.design_lambda_nm, p.n_gaas);
  const double d_algaas = quarter_wave_thickness(p.design_lambda_nm, p.n_algaas);
  // top three quarter-wave layers, seen from the ambient: GaAs/AlGaAs/GaAs
  st.layers.push_back({{p.n_gaas, 0.0}, d_gaas, "GaAs"});
  st.layers.push_back({{p.n_algaas, 0.0}, d_algaas, "Al0.5Ga0.5As"});
  st.layers.push_back({{p.n_gaas, 0.0}, d_gaas, "GaAs"});
  // half-wave spacer hosting the emitters
  st.layers.push_back({{p.n_spacer, 0.0}, p.spacer_thickness_nm, "In0.6Al0.4As"});
  // bottom DBR: pairs grown as AlGaAs/GaAs from the substrate, so seen
  // top-down each pair is GaAs then AlGaAs
  for (int k = 0; k < p.dbr_pairs; ++k) {
    st.layers.push_back({{p.n_gaas, 0.0}, d_gaas, "GaAs"});
    st.layers.push_back({{p.n_algaas, 0.0}, d_algaas, "Al0.5Ga0.5As"});
  }
  return st;
}

}  // namespace fsskit
