// Ensemble statistics over many emitters: batch extraction with selection
// rules and XX-X pairing, FSS fractions, the mod-180 orientation histogram
// with Gaussian fit, and polar diagrams of squared dipole projections.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fsskit/core.hpp"
#include "fsskit/forward_model.hpp"
#include "fsskit/fss.hpp"
#include "fsskit/parallel.hpp"
#include "fsskit/peakfit.hpp"

namespace fsskit {

enum class RecordFlag { BelowResolution, SuspectedXx, Unpaired, Failed };

inline std::string record_flag_name(RecordFlag f) {
  switch (f) {
    case RecordFlag::BelowResolution: return "below_resolution";
    case RecordFlag::SuspectedXx: return "suspected_xx";
    case RecordFlag::Unpaired: return "unpaired";
    default: return "failed";
  }
}

struct EnsembleRecord {
  std::string emitter_id;
  FssResult result;
  double linewidth_uev = 0.0;
  std::optional<std::string> paired_id;
  std::set<RecordFlag> flags;
  std::string error;  // non-empty when Failed
};

/// One emitter's sweep plus its manifest metadata.
struct SeriesInput {
  std::string emitter_id;
  std::string dot_id;
  Species species = Species::Unknown;
  AngleSeries series;
  std::optional<double> linewidth_hint_uev;
  PolarimeterConfig polarimeter;
};

struct BatchConfig {
  FssMethod method = FssMethod::HwpSinusoid;
  double selection_linewidth_fraction = 0.1;  // keep S > fraction * linewidth
};

/// Circular median of polarization-direction angles (mod 180).
inline double circular_median_mod180(const std::vector<double>& angles_deg) {
  if (angles_deg.empty()) throw domain_error("circular_median_mod180: empty input");
  double best = angles_deg.front();
  double best_cost = 1e300;
  for (double cand : angles_deg) {
    double cost = 0.0;
    for (double a : angles_deg)
      cost += std::fabs(polarization_angle_difference(a, cand));
    if (cost < best_cost) {
      best_cost = cost;
      best = cand;
    }
  }
  return normalize_polarization_angle(best);
}

/// Run the configured extraction per series, apply the selection rule, pair
/// XX-X candidates by dot id and assign flags. Per-series failures are
/// recorded, never thrown.
inline std::vector<EnsembleRecord> batch_analyze(const std::vector<SeriesInput>& inputs,
                                                 const BatchConfig& cfg = {}) {
  std::vector<EnsembleRecord> records(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t k) {
    const auto& in = inputs[k];
    EnsembleRecord rec;
    rec.emitter_id = in.emitter_id;
    try {
      const auto es = centroid_series(in.series);
      rec.linewidth_uev = in.linewidth_hint_uev.value_or(es.linewidth_fwhm_uev);
      rec.result = (cfg.method == FssMethod::QwpFft)
                       ? extract_fss_qwp_fft(es)
                       : extract_fss_hwp_sinusoid(es, in.polarimeter.reference_offset_deg);
      if (rec.result.fss_uev <= cfg.selection_linewidth_fraction * rec.linewidth_uev)
        rec.flags.insert(RecordFlag::BelowResolution);
    } catch (const std::exception& err) {
      rec.flags.insert(RecordFlag::Failed);
      rec.error = err.what();
    }
    records[k] = rec;
  });

  // XX-X pairing by shared dot id
  std::map<std::string, std::vector<std::size_t>> by_dot;
  for (std::size_t k = 0; k < inputs.size(); ++k)
    if (!inputs[k].dot_id.empty()) by_dot[inputs[k].dot_id].push_back(k);
  for (const auto& [dot, members] : by_dot) {
    std::optional<std::size_t> x_idx, xx_idx;
    for (std::size_t k : members) {
      if (inputs[k].species == Species::X) x_idx = k;
      if (inputs[k].species == Species::XX) xx_idx = k;
    }
    if (x_idx && xx_idx) {
      records[*x_idx].paired_id = inputs[*xx_idx].emitter_id;
      records[*xx_idx].paired_id = inputs[*x_idx].emitter_id;
    }
  }
  for (auto& rec : records)
    if (!rec.paired_id) rec.flags.insert(RecordFlag::Unpaired);

  // suspected XX: dipole roughly perpendicular to the ensemble median
  std::vector<double> angles;
  for (const auto& rec : records)
    if (rec.result.dipole_defined && !rec.flags.count(RecordFlag::Failed))
      angles.push_back(rec.result.dipole_angle_deg);
  if (!angles.empty()) {
    const double median = circular_median_mod180(angles);
    for (auto& rec : records) {
      if (!rec.result.dipole_defined || rec.flags.count(RecordFlag::Failed)) continue;
      const double d =
          std::fabs(polarization_angle_difference(rec.result.dipole_angle_deg, median));
      if (d >= 75.0 && d <= 105.0) rec.flags.insert(RecordFlag::SuspectedXx);
    }
  }
  return records;
}

inline double fraction_below(const std::vector<EnsembleRecord>& records,
                             double threshold_uev) {
  std::size_t total = 0, below = 0;
  for (const auto& rec : records) {
    if (rec.flags.count(RecordFlag::Failed)) continue;
    ++total;
    if (rec.result.fss_uev < threshold_uev) ++below;
  }
  if (total == 0) throw domain_error("fraction_below: no usable records");
  return static_cast<double>(below) / static_cast<double>(total);
}

struct OrientationDistribution {
  std::vector<double> bin_centers_deg;  // in median-centered coordinates, mod 180
  std::vector<std::size_t> counts;
  double fit_center_deg = 0.0;   // normalized to [0, 180)
  double fit_sigma_deg = 0.0;
  double fit_stderr_deg = 0.0;   // standard error of the fit center
  std::size_t n_main = 0;        // records inside the fitted main window
  std::size_t n_secondary = 0;   // records more than 45 deg from the median
};

/// Mod-180 histogram of dipole orientations, centered on the circular
/// median, with a Gaussian fit of the main population.
inline OrientationDistribution orientation_distribution(
    const std::vector<EnsembleRecord>& records, double bin_width_deg = 2.0) {
  std::vector<double> angles;
  for (const auto& rec : records)
    if (rec.result.dipole_defined && !rec.flags.count(RecordFlag::Failed))
      angles.push_back(rec.result.dipole_angle_deg);
  if (angles.size() < 5)
    throw domain_error("orientation_distribution: need >= 5 defined orientations");
  if (!(bin_width_deg > 0.0))
    throw domain_error("orientation_distribution: bin width <= 0");

  const double median = circular_median_mod180(angles);
  // unwrapped offsets in (-90, 90] around the median
  std::vector<double> offsets;
  offsets.reserve(angles.size());
  for (double a : angles) offsets.push_back(polarization_angle_difference(a, median));

  const long nbins = std::max<long>(3, static_cast<long>(std::ceil(180.0 / bin_width_deg)));
  OrientationDistribution dist;
  dist.bin_centers_deg.resize(static_cast<std::size_t>(nbins));
  dist.counts.assign(static_cast<std::size_t>(nbins), 0);
  const double lo = -0.5 * static_cast<double>(nbins) * bin_width_deg;
  for (long b = 0; b < nbins; ++b)
    dist.bin_centers_deg[static_cast<std::size_t>(b)] =
        lo + (static_cast<double>(b) + 0.5) * bin_width_deg;
  for (double off : offsets) {
    long b = static_cast<long>(std::floor((off - lo) / bin_width_deg));
    b = std::clamp<long>(b, 0, nbins - 1);
    dist.counts[static_cast<std::size_t>(b)]++;
  }
  for (double off : offsets)
    (std::fabs(off) > 45.0 ? dist.n_secondary : dist.n_main)++;

  // Gaussian fit of the main population (within +-45 deg of the median)
  std::vector<double> xs, ys;
  double peak = 0.0;
  for (std::size_t b = 0; b < dist.counts.size(); ++b) {
    if (std::fabs(dist.bin_centers_deg[b]) > 45.0) continue;
    xs.push_back(dist.bin_centers_deg[b]);
    ys.push_back(static_cast<double>(dist.counts[b]));
    peak = std::max(peak, ys.back());
  }

  double center_off = 0.0, sigma = bin_width_deg, stderr_c = 0.0;
  bool fitted = false;
  try {
    FitOptions opt;
    opt.poisson_weights = false;
    const auto fit = lm_fit_gaussians(xs, ys, {{peak, 0.0, 2.0 * bin_width_deg}}, opt);
    if (fit.converged && fit.peaks.front().amplitude > 0.0 &&
        std::fabs(fit.peaks.front().center) <= 45.0) {
      center_off = fit.peaks.front().center;
      sigma = std::max(fit.peaks.front().sigma, bin_width_deg);  // bin-width floor
      stderr_c = fit.center_stderr.front();
      fitted = true;
    }
  } catch (const domain_error&) {
  }
  if (!fitted) {
    // degenerate histogram (e.g. all records in one bin)
    double acc = 0.0;
    for (double off : offsets) acc += off;
    center_off = acc / static_cast<double>(offsets.size());
    sigma = bin_width_deg;
  }
  dist.fit_center_deg = normalize_polarization_angle(median + center_off);
  dist.fit_sigma_deg = sigma;
  dist.fit_stderr_deg = stderr_c;
  return dist;
}

using DipoleVector = std::array<std::complex<double>, 3>;

struct PolarCurve {
  std::string label;
  std::vector<double> values;  // |d . e(phi)|^2 per sampled phi
};

struct PolarDiagram {
  std::vector<double> phis_deg;
  std::vector<PolarCurve> curves;  // per-dipole curves, then "Sum"
  double sum_dlp = 0.0;
};

/// Squared projection of each dipole on the in-plane analyzer direction
/// e(phi) = (cos phi, sin phi, 0), plus the Sum curve and its DLP.
inline PolarDiagram polar_diagram(
    const std::vector<std::pair<DipoleVector, std::string>>& dipoles,
    std::size_t n_samples) {
  if (dipoles.empty()) throw domain_error("polar_diagram: no dipoles");
  if (n_samples < 36) throw domain_error("polar_diagram: need >= 36 samples");
  for (const auto& [d, label] : dipoles) {
    if (std::norm(d[0]) + std::norm(d[1]) + std::norm(d[2]) <= 0.0)
      throw domain_error("polar_diagram: zero dipole vector '" + label + "'");
  }

  PolarDiagram out;
  out.phis_deg.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k)
    out.phis_deg[k] = 360.0 * static_cast<double>(k) / static_cast<double>(n_samples);

  PolarCurve sum{"Sum", std::vector<double>(n_samples, 0.0)};
  for (const auto& [d, label] : dipoles) {
    PolarCurve curve{label, std::vector<double>(n_samples, 0.0)};
    for (std::size_t k = 0; k < n_samples; ++k) {
      const double phi = deg_to_rad(out.phis_deg[k]);
      const std::complex<double> proj = d[0] * std::cos(phi) + d[1] * std::sin(phi);
      curve.values[k] = std::norm(proj);
      sum.values[k] += curve.values[k];
    }
    out.curves.push_back(std::move(curve));
  }
  const auto [mn, mx] = std::minmax_element(sum.values.begin(), sum.values.end());
  out.sum_dlp = degree_of_linear_polarization(*mx, *mn);
  out.curves.push_back(std::move(sum));
  return out;
}

}  // namespace fsskit
