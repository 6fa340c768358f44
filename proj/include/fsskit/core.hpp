// Shared domain types and unit helpers for the fsskit library.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsskit {

// The only physical constants in the repository.
inline constexpr double hbar_uev_ns = 0.6582119569;  // ueV * ns
inline constexpr double ev_nm = 1239.841984;         // E[eV] * lambda[nm]
inline constexpr double uev_per_ev = 1.0e6;

inline constexpr double pi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * (pi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / pi); }

inline double ev_to_uev(double ev) { return ev * uev_per_ev; }
inline double uev_to_ev(double uev) { return uev / uev_per_ev; }

inline double ev_to_nm(double ev) { return ev_nm / ev; }
inline double nm_to_ev(double nm) { return ev_nm / nm; }

// FWHM <-> Gaussian sigma.
inline constexpr double fwhm_per_sigma = 2.3548200450309493;  // 2*sqrt(2*ln2)
inline double fwhm_to_sigma(double fwhm) { return fwhm / fwhm_per_sigma; }
inline double sigma_to_fwhm(double sigma) { return sigma * fwhm_per_sigma; }

struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reduce a polarization-direction angle to its mod-180 representative.
inline double normalize_polarization_angle(double deg) {
  if (!std::isfinite(deg)) throw domain_error("non-finite polarization angle");
  double a = std::fmod(deg, 180.0);
  if (a < 0.0) a += 180.0;
  if (a >= 180.0) a = 0.0;  // fmod rounding at the boundary
  return a;
}

/// Reduce a waveplate mechanical angle to [0, 360).
inline double normalize_mechanical_angle(double deg) {
  if (!std::isfinite(deg)) throw domain_error("non-finite mechanical angle");
  double a = std::fmod(deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a = 0.0;
  return a;
}

/// Signed mod-180 distance between two polarization directions, in (-90, 90].
inline double polarization_angle_difference(double a_deg, double b_deg) {
  double d = std::fmod(a_deg - b_deg, 180.0);
  if (d > 90.0) d -= 180.0;
  if (d <= -90.0) d += 180.0;
  return d;
}

/// Stokes vector (I, Q, U, V). Intensity units are arbitrary; the same type
/// carries the ueV-weighted energy Stokes vector of the FSS extraction.
struct StokesVector {
  double i = 0.0;
  double q = 0.0;
  double u = 0.0;
  double v = 0.0;

  double polarized_length() const { return std::sqrt(q * q + u * u + v * v); }

  bool physical(double tol = 1e-9) const {
    return i >= 0.0 && polarized_length() <= i * (1.0 + tol);
  }
};

/// Fully linearly polarized unit-intensity state at polarization direction psi.
inline StokesVector linear_stokes(double psi_deg, double intensity = 1.0) {
  const double two_psi = deg_to_rad(2.0 * psi_deg);
  return {intensity, intensity * std::cos(two_psi), intensity * std::sin(two_psi), 0.0};
}

/// Degree of linear polarization (Imax - Imin)/(Imax + Imin).
inline double degree_of_linear_polarization(double imax, double imin) {
  if (!(imax >= imin) || imin < 0.0)
    throw domain_error("degree_of_linear_polarization: need imax >= imin >= 0");
  if (imax <= 0.0)
    throw domain_error("degree_of_linear_polarization: degenerate zero intensities");
  return (imax - imin) / (imax + imin);
}

/// One detector exposure: photon counts on a strictly increasing energy grid.
struct Spectrum {
  std::vector<double> energies_ev;
  std::vector<double> counts;

  Spectrum() = default;
  Spectrum(std::vector<double> e, std::vector<double> c)
      : energies_ev(std::move(e)), counts(std::move(c)) {
    validate();
  }

  void validate() const {
    if (energies_ev.size() != counts.size())
      throw domain_error("Spectrum: energies/counts length mismatch");
    for (std::size_t k = 1; k < energies_ev.size(); ++k)
      if (!(energies_ev[k] > energies_ev[k - 1]))
        throw domain_error("Spectrum: energies must be strictly increasing");
    for (double c : counts)
      if (c < 0.0) throw domain_error("Spectrum: negative counts");
  }

  std::size_t size() const { return energies_ev.size(); }
};

/// One polarimeter sweep: (waveplate angle, spectrum) pairs in sweep order.
struct AngleSeries {
  std::vector<double> angles_deg;
  std::vector<Spectrum> spectra;

  std::size_t size() const { return angles_deg.size(); }
};

}  // namespace fsskit
