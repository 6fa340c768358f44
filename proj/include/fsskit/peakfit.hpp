// Damped least-squares (Levenberg-Marquardt) fitting of Gaussian lines plus
// a constant background. Used for spectral centroids, the cavity-dip fit and
// the orientation histogram fit.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "fsskit/core.hpp"

namespace fsskit {

struct GaussianPeak {
  double amplitude = 0.0;  // peak height
  double center = 0.0;
  double sigma = 0.0;
};

struct FitOptions {
  int max_iterations = 200;
  double cost_tolerance = 1e-10;   // relative cost change
  double lambda0 = 1e-3;           // initial LM damping
  bool shared_sigma = false;       // all peaks share one width
  bool poisson_weights = true;     // w = 1/max(y, 10) when counts reach 10
  bool fit_background = true;
};

struct GaussianFitOutcome {
  std::vector<GaussianPeak> peaks;       // sorted by center
  std::vector<double> center_stderr;     // same order, x units
  std::vector<double> sigma_stderr;
  double background = 0.0;
  double residual_rms = 0.0;             // unweighted rms residual
  bool converged = false;
  int iterations = 0;
};

namespace lmdetail {

// Parameter packing: [bg?][sigma_shared?][A0 mu0 (s0)] [A1 mu1 (s1)] ...
struct Packing {
  bool bg;
  bool shared;
  std::size_t n_peaks;
  std::size_t size() const {
    return (bg ? 1 : 0) + (shared ? 1 : 0) + n_peaks * (shared ? 2 : 3);
  }
};

inline void unpack(const std::vector<double>& p, const Packing& pk, double& bg,
                   std::vector<GaussianPeak>& peaks) {
  std::size_t k = 0;
  bg = pk.bg ? p[k++] : 0.0;
  const double s_shared = pk.shared ? p[k++] : 0.0;
  peaks.resize(pk.n_peaks);
  for (auto& g : peaks) {
    g.amplitude = p[k++];
    g.center = p[k++];
    g.sigma = pk.shared ? s_shared : p[k++];
  }
}

inline double model_eval(const std::vector<double>& p, const Packing& pk, double x) {
  std::size_t k = pk.bg ? 1 : 0;
  double y = pk.bg ? p[0] : 0.0;
  const double s_shared = pk.shared ? p[k++] : 0.0;
  for (std::size_t j = 0; j < pk.n_peaks; ++j) {
    const double a = p[k++];
    const double mu = p[k++];
    const double s = pk.shared ? s_shared : p[k++];
    const double z = (x - mu) / s;
    y += a * std::exp(-0.5 * z * z);
  }
  return y;
}

inline void model_jacobian(const std::vector<double>& p, const Packing& pk, double x,
                           std::vector<double>& row) {
  row.assign(pk.size(), 0.0);
  std::size_t k = 0;
  if (pk.bg) row[k++] = 1.0;
  std::size_t shared_idx = 0;
  if (pk.shared) shared_idx = k++;
  for (std::size_t j = 0; j < pk.n_peaks; ++j) {
    const double a = p[k];
    const double mu = p[k + 1];
    const double s = pk.shared ? p[shared_idx] : p[k + 2];
    const double z = (x - mu) / s;
    const double g = std::exp(-0.5 * z * z);
    row[k] = g;
    row[k + 1] = a * g * z / s;
    const double ds = a * g * z * z / s;
    if (pk.shared) {
      row[shared_idx] += ds;
      k += 2;
    } else {
      row[k + 2] = ds;
      k += 3;
    }
  }
}

/// Solve A x = b for small dense symmetric positive(ish) systems.
/// Returns false on a numerically singular pivot.
inline bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                        std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-300) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
    x[r] = acc / a[r][r];
  }
  return true;
}

inline bool invert_dense(const std::vector<std::vector<double>>& a,
                         std::vector<std::vector<double>>& inv) {
  const std::size_t n = a.size();
  inv.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> e(n, 0.0), x;
    e[c] = 1.0;
    if (!solve_dense(a, e, x)) return false;
    for (std::size_t r = 0; r < n; ++r) inv[r][c] = x[r];
  }
  return true;
}

}  // namespace lmdetail

/// Core LM fit of n Gaussians + constant background on (xs, ys).
inline GaussianFitOutcome lm_fit_gaussians(const std::vector<double>& xs,
                                           const std::vector<double>& ys,
                                           const std::vector<GaussianPeak>& init,
                                           const FitOptions& opt = {}) {
  using namespace lmdetail;
  if (xs.size() != ys.size() || xs.empty())
    throw domain_error("lm_fit_gaussians: bad data arrays");
  if (init.empty()) throw domain_error("lm_fit_gaussians: no initial peaks");

  const Packing pk{opt.fit_background, opt.shared_sigma, init.size()};
  const std::size_t np = pk.size();
  const std::size_t nd = xs.size();
  if (nd <= np) throw domain_error("lm_fit_gaussians: fewer points than parameters");

  // weights
  std::vector<double> w(nd, 1.0);
  if (opt.poisson_weights) {
    for (std::size_t i = 0; i < nd; ++i) w[i] = 1.0 / std::max(ys[i], 10.0);
  }

  std::vector<double> p;
  p.reserve(np);
  if (pk.bg) {
    double lo = *std::min_element(ys.begin(), ys.end());
    p.push_back(lo);
  }
  if (pk.shared) p.push_back(std::fabs(init.front().sigma));
  for (const auto& g : init) {
    p.push_back(g.amplitude);
    p.push_back(g.center);
    if (!pk.shared) p.push_back(std::fabs(g.sigma));
  }

  auto cost_of = [&](const std::vector<double>& pp) {
    double c = 0.0;
    for (std::size_t i = 0; i < nd; ++i) {
      const double r = ys[i] - model_eval(pp, pk, xs[i]);
      c += w[i] * r * r;
    }
    return c;
  };
  auto sanitize = [&](std::vector<double>& pp) {
    // keep widths positive
    std::size_t k = pk.bg ? 1 : 0;
    if (pk.shared) {
      pp[k] = std::max(std::fabs(pp[k]), 1e-12);
    } else {
      k += 0;
      for (std::size_t j = 0; j < pk.n_peaks; ++j) {
        const std::size_t si = (pk.bg ? 1 : 0) + j * 3 + 2;
        pp[si] = std::max(std::fabs(pp[si]), 1e-12);
      }
    }
  };

  double cost = cost_of(p);
  double lambda = opt.lambda0;
  bool converged = false;
  int it = 0;
  std::vector<double> row;
  std::vector<std::vector<double>> jtj(np, std::vector<double>(np));
  std::vector<double> jtr(np);

  for (; it < opt.max_iterations; ++it) {
    for (auto& r : jtj) std::fill(r.begin(), r.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    for (std::size_t i = 0; i < nd; ++i) {
      model_jacobian(p, pk, xs[i], row);
      const double r = ys[i] - model_eval(p, pk, xs[i]);
      for (std::size_t a = 0; a < np; ++a) {
        jtr[a] += w[i] * row[a] * r;
        for (std::size_t b = a; b < np; ++b) jtj[a][b] += w[i] * row[a] * row[b];
      }
    }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];

    bool accepted = false;
    while (lambda < 1e14) {
      auto damped = jtj;
      for (std::size_t a = 0; a < np; ++a)
        damped[a][a] += lambda * std::max(jtj[a][a], 1e-300);
      std::vector<double> step;
      if (lmdetail::solve_dense(damped, jtr, step)) {
        std::vector<double> trial = p;
        for (std::size_t a = 0; a < np; ++a) trial[a] += step[a];
        sanitize(trial);
        const double trial_cost = cost_of(trial);
        if (std::isfinite(trial_cost) && trial_cost <= cost) {
          const double drop = cost - trial_cost;
          p = std::move(trial);
          const bool tiny = drop < opt.cost_tolerance * (cost + 1e-30);
          cost = trial_cost;
          lambda = std::max(lambda * 0.1, 1e-14);
          accepted = true;
          if (tiny) converged = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted || converged) {
      converged = converged || accepted;
      if (!accepted && cost < 1e-20) converged = true;  // already at the floor
      break;
    }
  }

  GaussianFitOutcome out;
  out.iterations = it;
  out.converged = converged;
  double bg;
  lmdetail::unpack(p, pk, bg, out.peaks);
  out.background = bg;

  // covariance of the converged parameters, scaled by reduced chi-square
  for (auto& r : jtj) std::fill(r.begin(), r.end(), 0.0);
  for (std::size_t i = 0; i < nd; ++i) {
    model_jacobian(p, pk, xs[i], row);
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = a; b < np; ++b) jtj[a][b] += w[i] * row[a] * row[b];
  }
  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];
  std::vector<std::vector<double>> cov;
  const double chi2_red = cost / static_cast<double>(nd - np);
  const bool have_cov = lmdetail::invert_dense(jtj, cov);

  out.center_stderr.assign(pk.n_peaks, 0.0);
  out.sigma_stderr.assign(pk.n_peaks, 0.0);
  const std::size_t base = (pk.bg ? 1 : 0) + (pk.shared ? 1 : 0);
  const std::size_t stride = pk.shared ? 2 : 3;
  for (std::size_t j = 0; j < pk.n_peaks && have_cov; ++j) {
    const std::size_t mu_idx = base + j * stride + 1;
    out.center_stderr[j] = std::sqrt(std::max(cov[mu_idx][mu_idx] * chi2_red, 0.0));
    const std::size_t s_idx = pk.shared ? (pk.bg ? 1u : 0u) : base + j * stride + 2;
    out.sigma_stderr[j] = std::sqrt(std::max(cov[s_idx][s_idx] * chi2_red, 0.0));
  }

  // sort by center, keeping stderr aligned
  std::vector<std::size_t> order(pk.n_peaks);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.peaks[a].center < out.peaks[b].center;
  });
  GaussianFitOutcome sorted = out;
  for (std::size_t j = 0; j < pk.n_peaks; ++j) {
    sorted.peaks[j] = out.peaks[order[j]];
    sorted.center_stderr[j] = out.center_stderr[order[j]];
    sorted.sigma_stderr[j] = out.sigma_stderr[order[j]];
  }

  double ss = 0.0;
  for (std::size_t i = 0; i < nd; ++i) {
    const double r = ys[i] - model_eval(p, pk, xs[i]);
    ss += r * r;
  }
  sorted.residual_rms = std::sqrt(ss / static_cast<double>(nd));
  return sorted;
}

/// Spectrum-facing result in eV / ueV units.
struct PeakFitResult {
  double center_ev = 0.0;
  double center_stderr_uev = 0.0;
  double fwhm_uev = 0.0;
  double fwhm_stderr_uev = 0.0;
  double amplitude = 0.0;
  double background = 0.0;
  bool converged = false;
  double residual_rms = 0.0;
};

namespace lmdetail {

/// Initial guesses: n largest local maxima after 3-bin smoothing.
inline std::vector<GaussianPeak> initial_peaks(const Spectrum& s, std::size_t n) {
  const auto& y = s.counts;
  const std::size_t nd = y.size();
  std::vector<double> sm(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    const double a = y[i > 0 ? i - 1 : 0];
    const double b = y[i];
    const double c = y[i + 1 < nd ? i + 1 : nd - 1];
    sm[i] = (a + b + c) / 3.0;
  }
  std::vector<double> tmp = sm;
  std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2, tmp.end());
  const double bg = tmp[tmp.size() / 2];

  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < nd; ++i)
    if (sm[i] > sm[i - 1] && sm[i] >= sm[i + 1] && sm[i] > bg) maxima.push_back(i);
  std::sort(maxima.begin(), maxima.end(),
            [&](std::size_t a, std::size_t b) { return sm[a] > sm[b]; });
  if (maxima.size() < n)
    throw domain_error("fit_gaussians: fewer detected maxima than requested peaks");
  maxima.resize(n);

  std::vector<GaussianPeak> init;
  for (std::size_t i : maxima) {
    const double half = bg + 0.5 * (sm[i] - bg);
    std::size_t l = i, r = i;
    while (l > 0 && sm[l] > half) --l;
    while (r + 1 < nd && sm[r] > half) ++r;
    double sigma = fwhm_to_sigma(s.energies_ev[r] - s.energies_ev[l]);
    if (!(sigma > 0.0))
      sigma = 2.0 * (s.energies_ev[1] - s.energies_ev[0]);
    init.push_back({sm[i] - bg, s.energies_ev[i], sigma});
  }
  return init;
}

}  // namespace lmdetail

/// Fit n Gaussians + constant background to a spectrum. Fit windows are
/// +-5 initial FWHM per peak, merged when overlapping.
inline std::vector<PeakFitResult> fit_gaussians(
    const Spectrum& s, std::size_t n_peaks,
    std::optional<std::vector<GaussianPeak>> init = std::nullopt,
    FitOptions opt = {}) {
  if (n_peaks == 0) throw domain_error("fit_gaussians: n_peaks == 0");
  if (s.size() < 5 * n_peaks) throw domain_error("fit_gaussians: spectrum too short");
  std::vector<GaussianPeak> guesses =
      init ? *init : lmdetail::initial_peaks(s, n_peaks);

  // collect points inside any peak window
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.energies_ev[i];
    for (const auto& g : guesses) {
      if (std::fabs(x - g.center) <= 5.0 * sigma_to_fwhm(g.sigma)) {
        xs.push_back(x);
        ys.push_back(s.counts[i]);
        break;
      }
    }
  }
  if (xs.size() <= 3 * n_peaks + 1) throw domain_error("fit_gaussians: empty fit window");

  const auto fit = lm_fit_gaussians(xs, ys, guesses, opt);

  std::vector<PeakFitResult> out;
  out.reserve(n_peaks);
  for (std::size_t j = 0; j < fit.peaks.size(); ++j) {
    PeakFitResult r;
    r.center_ev = fit.peaks[j].center;
    r.center_stderr_uev = ev_to_uev(fit.center_stderr[j]);
    r.fwhm_uev = ev_to_uev(sigma_to_fwhm(fit.peaks[j].sigma));
    r.fwhm_stderr_uev = ev_to_uev(sigma_to_fwhm(fit.sigma_stderr[j]));
    r.amplitude = fit.peaks[j].amplitude;
    r.background = fit.background;
    r.converged = fit.converged;
    r.residual_rms = fit.residual_rms;
    out.push_back(r);
  }
  return out;
}

struct LinewidthSummary {
  double min_uev = 0.0;
  double max_uev = 0.0;
  double mean_uev = 0.0;
  std::vector<double> bin_centers_uev;
  std::vector<std::size_t> bin_counts;
};

inline LinewidthSummary linewidth_statistics(const std::vector<PeakFitResult>& fits,
                                             double bin_width_uev = 50.0) {
  std::vector<double> widths;
  for (const auto& f : fits)
    if (f.converged) widths.push_back(f.fwhm_uev);
  if (widths.empty()) throw domain_error("linewidth_statistics: no converged fits");

  LinewidthSummary sm;
  sm.min_uev = *std::min_element(widths.begin(), widths.end());
  sm.max_uev = *std::max_element(widths.begin(), widths.end());
  sm.mean_uev = std::accumulate(widths.begin(), widths.end(), 0.0) /
                static_cast<double>(widths.size());
  const long first = static_cast<long>(std::floor(sm.min_uev / bin_width_uev));
  const long last = static_cast<long>(std::floor(sm.max_uev / bin_width_uev));
  sm.bin_centers_uev.resize(static_cast<std::size_t>(last - first + 1));
  sm.bin_counts.assign(sm.bin_centers_uev.size(), 0);
  for (std::size_t b = 0; b < sm.bin_centers_uev.size(); ++b)
    sm.bin_centers_uev[b] = (static_cast<double>(first + static_cast<long>(b)) + 0.5) * bin_width_uev;
  for (double wdt : widths) {
    long b = static_cast<long>(std::floor(wdt / bin_width_uev)) - first;
    sm.bin_counts[static_cast<std::size_t>(b)]++;
  }
  return sm;
}

}  // namespace fsskit
