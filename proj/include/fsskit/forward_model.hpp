// Ground-truth simulator: exciton doublet emission through a rotating
// waveplate + fixed linear polarizer, rendered onto a pixelated spectrometer
// with Poisson shot noise and Gaussian read noise.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fsskit/core.hpp"
#include "fsskit/mueller.hpp"
#include "fsskit/rng.hpp"

namespace fsskit {

enum class Species { X, XX, Unknown };

inline std::string species_name(Species s) {
  switch (s) {
    case Species::X: return "X";
    case Species::XX: return "XX";
    default: return "unknown";
  }
}

inline Species species_from_name(const std::string& s) {
  if (s == "X" || s == "x") return Species::X;
  if (s == "XX" || s == "xx") return Species::XX;
  return Species::Unknown;
}

/// Ground-truth exciton doublet. `peak_counts` is the integrated photon
/// count of the full doublet per exposure at unit polarimeter transmission.
struct EmitterModel {
  double mean_energy_ev = 0.9486;   // ~1307 nm
  double fss_uev = 0.0;             // S
  double dipole_angle_deg = 0.0;    // high-energy component, lab frame
  double linewidth_fwhm_uev = 250.0;
  double peak_counts = 1.0e4;
  Species species = Species::Unknown;

  void validate() const {
    if (fss_uev < 0.0) throw domain_error("EmitterModel: fss < 0");
    if (linewidth_fwhm_uev <= 0.0) throw domain_error("EmitterModel: linewidth <= 0");
    if (peak_counts <= 0.0) throw domain_error("EmitterModel: peak_counts <= 0");
  }
};

enum class PolarimeterKind { QWP_LP, HWP_LP };

struct PolarimeterConfig {
  PolarimeterKind kind = PolarimeterKind::HWP_LP;
  double lp_axis_deg = 0.0;          // fixed LP transmission axis (lab frame)
  double reference_offset_deg = 82.0;  // reading with max transmission of reference-axis light
  // Optional imperfections for robustness studies:
  double steering_1chi_depth = 0.0;       // multiplies intensity by 1 + d*cos(chi + phase)
  double steering_1chi_phase_deg = 0.0;
  double prewave_retardance_deg = 0.0;    // fixed birefringent element before the polarimeter
  double prewave_axis_deg = 0.0;

  void validate() const {
    if (reference_offset_deg < 0.0 || reference_offset_deg >= 360.0)
      throw domain_error("PolarimeterConfig: reference_offset outside [0, 360)");
    if (steering_1chi_depth < 0.0 || steering_1chi_depth >= 1.0)
      throw domain_error("PolarimeterConfig: steering depth outside [0, 1)");
  }

  static PolarimeterConfig qwp_default() {
    PolarimeterConfig p;
    p.kind = PolarimeterKind::QWP_LP;
    p.reference_offset_deg = 0.0;
    return p;
  }
  static PolarimeterConfig hwp_default() { return PolarimeterConfig{}; }
};

struct DetectorModel {
  double irf_fwhm_uev = 89.0;     // spectrometer instrument response
  double pixel_pitch_uev = 25.0;
  int n_pixels = 512;
  double read_noise_rms = 10.0;
  bool shot_noise = true;
  double center_energy_ev = 0.0;  // 0 = center the grid on the emitter

  void validate() const {
    if (irf_fwhm_uev <= 0.0) throw domain_error("DetectorModel: irf_fwhm <= 0");
    if (pixel_pitch_uev <= 0.0) throw domain_error("DetectorModel: pixel_pitch <= 0");
    if (n_pixels < 16) throw domain_error("DetectorModel: n_pixels < 16");
    if (read_noise_rms < 0.0) throw domain_error("DetectorModel: read_noise < 0");
  }
};

/// The two fully polarized doublet components; first = high energy at the
/// dipole angle, second = low energy at dipole_angle + 90.
inline std::pair<StokesVector, StokesVector> doublet_stokes(const EmitterModel& e) {
  e.validate();
  return {linear_stokes(e.dipole_angle_deg), linear_stokes(e.dipole_angle_deg + 90.0)};
}

namespace detail {

/// Measurement chain for one waveplate reading: fixed pre-polarimeter
/// retarder, frame rotation into the LP frame, waveplate, LP. Returns the
/// transmitted fraction for a unit-intensity input state.
inline double polarimeter_transmission(const StokesVector& s_lab,
                                       const PolarimeterConfig& p,
                                       double reading_deg) {
  StokesVector s = s_lab;
  if (p.prewave_retardance_deg != 0.0)
    s = mueller_retarder(p.prewave_axis_deg, p.prewave_retardance_deg) * s;
  // waveplate fast axis relative to the LP axis; reference_offset is the
  // reading at which reference-axis light is maximally transmitted
  const double axis = (reading_deg - p.reference_offset_deg) - 0.5 * p.lp_axis_deg;
  s = mueller_rotation(-p.lp_axis_deg) * s;
  const MuellerMatrix wp = (p.kind == PolarimeterKind::QWP_LP) ? mueller_qwp(axis)
                                                               : mueller_hwp(axis);
  const StokesVector out = mueller_lp(0.0) * (wp * s);
  return out.i;
}

}  // namespace detail

/// Simulate one polarimeter sweep. Deterministic under (inputs, seed).
inline AngleSeries simulate_angle_series(const EmitterModel& e,
                                         const PolarimeterConfig& p,
                                         const DetectorModel& d,
                                         const std::vector<double>& angles_deg,
                                         RngStream rng) {
  e.validate();
  p.validate();
  d.validate();
  if (angles_deg.size() < 4)
    throw domain_error("simulate_angle_series: need at least 4 angles");

  const double center_ev = (d.center_energy_ev > 0.0) ? d.center_energy_ev : e.mean_energy_ev;
  const double e_high = e.mean_energy_ev + uev_to_ev(0.5 * e.fss_uev);
  const double e_low = e.mean_energy_ev - uev_to_ev(0.5 * e.fss_uev);
  const double sigma_ev =
      uev_to_ev(fwhm_to_sigma(std::hypot(e.linewidth_fwhm_uev, d.irf_fwhm_uev)));

  std::vector<double> grid(static_cast<std::size_t>(d.n_pixels));
  const double pitch_ev = uev_to_ev(d.pixel_pitch_uev);
  for (int k = 0; k < d.n_pixels; ++k)
    grid[static_cast<std::size_t>(k)] = center_ev + (k - 0.5 * (d.n_pixels - 1)) * pitch_ev;

  const double margin = 3.0 * sigma_ev;
  if (e_low < grid.front() + margin || e_high > grid.back() - margin)
    throw domain_error("simulate_angle_series: emitter lines outside detector span");

  const auto [s_high, s_low] = doublet_stokes(e);
  const double norm = e.peak_counts * 0.5 / (sigma_ev * std::sqrt(2.0 * pi)) * pitch_ev;

  AngleSeries series;
  series.angles_deg = angles_deg;
  series.spectra.reserve(angles_deg.size());
  for (double w : angles_deg) {
    const double t_high = detail::polarimeter_transmission(s_high, p, w);
    const double t_low = detail::polarimeter_transmission(s_low, p, w);
    double steer = 1.0;
    if (p.steering_1chi_depth > 0.0)
      steer += p.steering_1chi_depth * std::cos(deg_to_rad(w + p.steering_1chi_phase_deg));

    Spectrum sp;
    sp.energies_ev = grid;
    sp.counts.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double zh = (grid[k] - e_high) / sigma_ev;
      const double zl = (grid[k] - e_low) / sigma_ev;
      double expect = steer * norm * (t_high * std::exp(-0.5 * zh * zh) +
                                      t_low * std::exp(-0.5 * zl * zl));
      double c = d.shot_noise ? rng.poisson(expect) : expect;
      if (d.read_noise_rms > 0.0) c += rng.normal(0.0, d.read_noise_rms);
      sp.counts[k] = c < 0.0 ? 0.0 : c;
    }
    series.spectra.push_back(std::move(sp));
  }
  return series;
}

}  // namespace fsskit
