// fsskit command-line tool: simulate polarimeter sweeps, extract FSS and
// dipole orientations, batch statistics, entanglement sweeps, cavity
// reflectance and polar diagrams.
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsskit/cavity.hpp"
#include "fsskit/core.hpp"
#include "fsskit/ensemble.hpp"
#include "fsskit/entangle.hpp"
#include "fsskit/forward_model.hpp"
#include "fsskit/fss.hpp"
#include "fsskit/io.hpp"
#include "fsskit/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fsskit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitEmpty = 3;
constexpr int kExitNumeric = 4;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct empty_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- simulate ---------------------------------------------------------------

struct EmitterSpecRow {
  std::string id;
  std::string dot_id;
  Species species = Species::Unknown;
  EmitterModel model;
};

std::vector<double> angles_from_json(const json& j) {
  if (j.contains("list")) return j["list"].get<std::vector<double>>();
  const std::size_t count = j.value("count", 36u);
  const double span = j.value("span_deg", 180.0);
  const double start = j.value("start_deg", 0.0);
  std::vector<double> a(count);
  for (std::size_t k = 0; k < count; ++k)
    a[k] = start + span * static_cast<double>(k) / static_cast<double>(count);
  return a;
}

EmitterModel emitter_from_json(const json& j) {
  EmitterModel e;
  e.mean_energy_ev = j.value("mean_energy_ev", e.mean_energy_ev);
  e.fss_uev = j.value("fss_uev", e.fss_uev);
  e.dipole_angle_deg = j.value("dipole_angle_deg", e.dipole_angle_deg);
  e.linewidth_fwhm_uev = j.value("linewidth_fwhm_uev", e.linewidth_fwhm_uev);
  e.peak_counts = j.value("peak_counts", e.peak_counts);
  e.species = species_from_name(j.value("species", "unknown"));
  return e;
}

/// Ensemble generator mirroring the measured statistics: roughly half the
/// splittings below 50 ueV, the rest between 70 and 300 ueV, dipoles
/// normally distributed with a perpendicular XX subpopulation.
std::vector<EmitterSpecRow> generate_ensemble(const json& g, RngStream& rng) {
  const std::size_t n = g.value("n_emitters", 35u);
  const double low_fraction = g.value("low_fss_fraction", 0.5);
  const double low_lo = g.value("low_fss_min_uev", 5.0);
  const double low_hi = g.value("low_fss_max_uev", 50.0);
  const double high_lo = g.value("high_fss_min_uev", 70.0);
  const double high_hi = g.value("high_fss_max_uev", 300.0);
  const double dipole_center = g.value("dipole_center_deg", 3.1);
  const double dipole_sigma = g.value("dipole_sigma_deg", 2.2);
  const std::size_t n_xx = g.value("n_perpendicular_xx", 0u);
  const double lw_lo = g.value("linewidth_min_uev", 100.0);
  const double lw_hi = g.value("linewidth_max_uev", 550.0);
  const double mean_energy = g.value("mean_energy_ev", 0.9486);
  const double peak_counts = g.value("peak_counts", 1.0e4);
  if (n_xx > n) throw usage_error("generator.n_perpendicular_xx exceeds n_emitters");

  std::vector<EmitterSpecRow> rows;
  for (std::size_t k = 0; k < n; ++k) {
    EmitterSpecRow row;
    row.id = "qd" + std::to_string(k);
    row.dot_id = "dot" + std::to_string(k);
    const bool xx = k < n_xx;
    row.species = xx ? Species::XX : Species::X;
    row.model.species = row.species;
    row.model.mean_energy_ev = mean_energy;
    row.model.peak_counts = peak_counts;
    row.model.linewidth_fwhm_uev = rng.uniform(lw_lo, lw_hi);
    row.model.fss_uev = (rng.uniform() < low_fraction) ? rng.uniform(low_lo, low_hi)
                                                       : rng.uniform(high_lo, high_hi);
    double phi = rng.normal(dipole_center, dipole_sigma);
    if (xx) phi += 90.0;
    row.model.dipole_angle_deg = normalize_polarization_angle(phi);
    rows.push_back(row);
  }
  return rows;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::uint64_t seed) {
  json cfg;
  try {
    cfg = json::parse(io::read_file(config_path));
  } catch (const std::exception& e) {
    throw usage_error(std::string("cannot read config: ") + e.what());
  }

  PolarimeterConfig pol;
  DetectorModel det;
  std::vector<double> angles;
  std::vector<EmitterSpecRow> rows;
  try {
    pol = cfg.contains("polarimeter") ? io::polarimeter_from_json(cfg["polarimeter"])
                                      : PolarimeterConfig::hwp_default();
    det = cfg.contains("detector") ? io::detector_from_json(cfg["detector"])
                                   : DetectorModel{};
    angles = cfg.contains("angles") ? angles_from_json(cfg["angles"])
                                    : uniform_angles(36, 180.0);
    RngStream gen_rng = RngStream(seed).split(0xE);
    if (cfg.contains("emitters")) {
      std::size_t k = 0;
      for (const auto& je : cfg["emitters"]) {
        EmitterSpecRow row;
        row.id = je.value("id", "qd" + std::to_string(k));
        row.dot_id = je.value("dot_id", "");
        row.model = emitter_from_json(je);
        row.species = row.model.species;
        row.model.validate();
        rows.push_back(row);
        ++k;
      }
    } else if (cfg.contains("generator")) {
      rows = generate_ensemble(cfg["generator"], gen_rng);
    } else {
      throw usage_error("config needs an 'emitters' list or a 'generator' block");
    }
  } catch (const json::exception& e) {
    throw usage_error(std::string("invalid config field: ") + e.what());
  } catch (const domain_error& e) {
    throw usage_error(std::string("invalid config: ") + e.what());
  }

  const fs::path out(out_dir);
  fs::create_directories(out / "series");

  io::Manifest manifest;
  io::CsvWriter truth({"emitter_id", "fss_ueV", "dipole_deg", "linewidth_ueV"});
  RngStream root(seed);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& row = rows[k];
    const auto series =
        simulate_angle_series(row.model, pol, det, angles, root.split(k));
    const std::string rel = "series/" + row.id + ".csv";
    io::write_angle_series(out / rel, series);

    io::ManifestEntry me;
    me.emitter_id = row.id;
    me.dot_id = row.dot_id;
    me.species = row.species;
    me.series_path = rel;
    me.linewidth_hint_uev = row.model.linewidth_fwhm_uev;
    me.polarimeter = pol;
    manifest.entries.push_back(me);

    truth.row({row.id, io::fmt_value(row.model.fss_uev),
               io::fmt_value(row.model.dipole_angle_deg),
               io::fmt_value(row.model.linewidth_fwhm_uev)});
  }
  io::atomic_write(out / "truth.csv", truth.str());
  io::write_manifest(out / "manifest.json", manifest);
  std::cout << "wrote " << rows.size() << " series to " << out.string() << "\n";
  return kExitOk;
}

// ---- analyze ----------------------------------------------------------------

std::string flags_to_string(const std::set<RecordFlag>& flags) {
  std::string s;
  for (auto f : flags) {
    if (!s.empty()) s += ';';
    s += record_flag_name(f);
  }
  return s;
}

int cmd_analyze(const std::string& manifest_path, const std::string& method_arg,
                const std::string& out_path) {
  io::Manifest manifest;
  try {
    manifest = io::read_manifest(manifest_path);
  } catch (const std::exception& e) {
    throw usage_error(std::string("cannot read manifest: ") + e.what());
  }

  std::vector<FssMethod> methods;
  if (method_arg == "qwp_fft") methods = {FssMethod::QwpFft};
  else if (method_arg == "hwp_sinusoid") methods = {FssMethod::HwpSinusoid};
  else if (method_arg == "both") methods = {FssMethod::QwpFft, FssMethod::HwpSinusoid};
  else throw usage_error("--method must be qwp_fft, hwp_sinusoid or both");

  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<SeriesInput> inputs;
  std::vector<std::pair<std::string, std::string>> load_failures;  // id, error
  for (const auto& e : manifest.entries) {
    SeriesInput in;
    in.emitter_id = e.emitter_id;
    in.dot_id = e.dot_id;
    in.species = e.species;
    in.linewidth_hint_uev = e.linewidth_hint_uev;
    in.polarimeter = e.polarimeter;
    try {
      in.series = io::read_angle_series(base / e.series_path);
      inputs.push_back(std::move(in));
    } catch (const std::exception& err) {
      load_failures.push_back({e.emitter_id, err.what()});
    }
  }

  io::CsvWriter csv({"emitter_id", "method", "fss_ueV", "fss_stderr_ueV", "dphi_deg",
                     "dphi_defined", "mean_energy_eV", "linewidth_ueV", "flags"});
  for (auto method : methods) {
    BatchConfig cfg;
    cfg.method = method;
    const auto records = batch_analyze(inputs, cfg);
    for (const auto& rec : records) {
      csv.row({rec.emitter_id, fss_method_name(method), io::fmt_value(rec.result.fss_uev),
               io::fmt_value(rec.result.fss_stderr_uev),
               rec.result.dipole_defined ? io::fmt_value(rec.result.dipole_angle_deg) : "",
               rec.result.dipole_defined ? "1" : "0",
               io::fmt_energy_ev(rec.result.mean_energy_ev),
               io::fmt_value(rec.linewidth_uev), flags_to_string(rec.flags)});
    }
    for (const auto& [id, err] : load_failures)
      csv.row({id, fss_method_name(method), "", "", "", "0", "", "", "failed"});
  }
  io::atomic_write(out_path, csv.str());
  if (!load_failures.empty())
    std::cerr << load_failures.size() << " series could not be loaded (flagged)\n";
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

// ---- report -----------------------------------------------------------------

struct ResultRow {
  std::string emitter_id;
  std::string method;
  double fss_uev = 0.0;
  double dphi_deg = 0.0;
  bool dphi_defined = false;
  double linewidth_uev = 0.0;
  bool failed = false;
};

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<ResultRow> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    cells.resize(9);
    ResultRow r;
    r.emitter_id = cells[0];
    r.method = cells[1];
    r.failed = cells[8].find("failed") != std::string::npos;
    if (!r.failed) {
      r.fss_uev = std::stod(cells[2]);
      r.dphi_defined = cells[5] == "1";
      if (r.dphi_defined) r.dphi_deg = std::stod(cells[4]);
      if (!cells[7].empty()) r.linewidth_uev = std::stod(cells[7]);
    }
    rows.push_back(r);
  }
  return rows;
}

void write_histogram_csv(const fs::path& path, const std::string& center_col,
                         const std::vector<double>& centers,
                         const std::vector<std::size_t>& counts) {
  io::CsvWriter csv({center_col, "count"});
  for (std::size_t k = 0; k < centers.size(); ++k)
    csv.row({io::fmt_value(centers[k]), std::to_string(counts[k])});
  io::atomic_write(path, csv.str());
}

int cmd_report(const std::string& results_path, const std::string& out_dir) {
  std::vector<ResultRow> rows;
  try {
    rows = parse_results_csv(io::read_file(results_path));
  } catch (const std::exception& e) {
    throw usage_error(std::string("cannot read results: ") + e.what());
  }
  std::erase_if(rows, [](const ResultRow& r) { return r.failed; });
  if (rows.empty()) throw empty_error("no usable result rows");

  const fs::path out(out_dir);
  fs::create_directories(out);

  // FSS histogram, 25 ueV bins
  {
    const double bw = 25.0;
    double mx = 0.0;
    for (const auto& r : rows) mx = std::max(mx, r.fss_uev);
    const std::size_t nb = static_cast<std::size_t>(std::floor(mx / bw)) + 1;
    std::vector<double> centers(nb);
    std::vector<std::size_t> counts(nb, 0);
    for (std::size_t b = 0; b < nb; ++b) centers[b] = (static_cast<double>(b) + 0.5) * bw;
    for (const auto& r : rows)
      counts[static_cast<std::size_t>(std::floor(r.fss_uev / bw))]++;
    write_histogram_csv(out / "fss_hist.csv", "fss_ueV", centers, counts);
  }

  // linewidth histogram, 50 ueV bins
  {
    std::vector<PeakFitResult> fits;
    for (const auto& r : rows) {
      if (r.linewidth_uev <= 0.0) continue;
      PeakFitResult f;
      f.fwhm_uev = r.linewidth_uev;
      f.converged = true;
      fits.push_back(f);
    }
    if (!fits.empty()) {
      const auto sm = linewidth_statistics(fits, 50.0);
      write_histogram_csv(out / "linewidth_hist.csv", "linewidth_ueV",
                          sm.bin_centers_uev, sm.bin_counts);
    }
  }

  // orientation histogram with Gaussian fit
  json summary;
  double below = 0.0, total = 0.0;
  for (const auto& r : rows) {
    total += 1.0;
    if (r.fss_uev < 50.0) below += 1.0;
  }
  summary["n_rows"] = rows.size();
  summary["fraction_below_50ueV"] = below / total;
  {
    std::vector<EnsembleRecord> records;
    for (const auto& r : rows) {
      if (!r.dphi_defined) continue;
      EnsembleRecord rec;
      rec.emitter_id = r.emitter_id;
      rec.result.dipole_defined = true;
      rec.result.dipole_angle_deg = r.dphi_deg;
      rec.result.fss_uev = r.fss_uev;
      records.push_back(rec);
    }
    if (records.size() >= 5) {
      const auto dist = orientation_distribution(records, 2.0);
      write_histogram_csv(out / "dphi_hist.csv", "dphi_deg", dist.bin_centers_deg,
                          dist.counts);
      summary["dphi_fit_center_deg"] = dist.fit_center_deg;
      summary["dphi_fit_sigma_deg"] = dist.fit_sigma_deg;
      summary["dphi_fit_stderr_deg"] = dist.fit_stderr_deg;
      summary["dphi_secondary_population"] = dist.n_secondary;
    } else if (!records.empty()) {
      // too few orientations for the distribution fit: plain 2 deg histogram
      std::vector<std::size_t> counts(90, 0);
      std::vector<double> centers(90);
      for (std::size_t b = 0; b < 90; ++b) centers[b] = 2.0 * (b + 0.5);
      for (const auto& rec : records) {
        auto b = static_cast<std::size_t>(rec.result.dipole_angle_deg / 2.0);
        counts[std::min(b, counts.size() - 1)]++;
      }
      write_histogram_csv(out / "dphi_hist.csv", "dphi_deg", centers, counts);
    }
  }
  io::atomic_write(out / "summary.json", summary.dump(2) + "\n");
  std::cout << "wrote report to " << out.string() << "\n";
  return kExitOk;
}

// ---- resolution ---------------------------------------------------------------

int cmd_resolution(double linewidth_uev, std::size_t n_angles, std::size_t n_trials,
                   std::uint64_t seed, double peak_counts,
                   const std::string& out_path) {
  DetectorModel det;  // defaults; counts scale applied via emitter in resolution_limit
  (void)peak_counts;
  const double limit = resolution_limit(linewidth_uev, det, n_angles, n_trials, seed);
  std::cout << "resolution_limit_ueV," << io::fmt_value(limit) << "\n";
  if (!out_path.empty()) {
    io::CsvWriter csv({"linewidth_ueV", "n_angles", "n_trials", "resolution_limit_ueV"});
    csv.row({io::fmt_value(linewidth_uev), std::to_string(n_angles),
             std::to_string(n_trials), io::fmt_value(limit)});
    io::atomic_write(out_path, csv.str());
  }
  return kExitOk;
}

// ---- entangle -----------------------------------------------------------------

int cmd_entangle(const std::vector<double>& s_list, const std::vector<double>& sc_list,
                 const std::vector<double>& tau_list, const std::string& out_path) {
  io::CsvWriter csv({"s_ueV", "s_c_ueV", "tau_ns", "alpha", "beta", "fidelity_phi_plus",
                     "C_rect", "C_diag", "C_circ"});
  for (double s : s_list)
    for (double sc : sc_list)
      for (double tau : tau_list) {
        const auto p = NonCollinearParams::from_splittings(s, sc, tau);
        const auto state = two_photon_state(p);
        csv.row({io::fmt_value(s), io::fmt_value(sc), io::fmt_value(tau),
                 io::fmt_value(p.alpha), io::fmt_value(p.beta),
                 io::fmt_value(fidelity_to_bell(state, BellState::PhiPlus)),
                 io::fmt_value(degree_of_correlation(state, CorrelationBasis::Rectilinear)),
                 io::fmt_value(degree_of_correlation(state, CorrelationBasis::Diagonal)),
                 io::fmt_value(degree_of_correlation(state, CorrelationBasis::Circular))});
      }
  io::atomic_write(out_path, csv.str());
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

// ---- cavity -------------------------------------------------------------------

int cmd_cavity(const std::string& stack_path, double lambda_min, double lambda_max,
               double step, const std::string& out_path) {
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min) || !(step > 0.0))
    throw usage_error("invalid wavelength range");

  std::vector<double> lambdas;
  for (double lam = lambda_min; lam <= lambda_max + 1e-9; lam += step)
    lambdas.push_back(lam);

  std::vector<ReflectancePoint> spectrum;
  if (stack_path.empty()) {
    const auto stack = make_epitaxy_stack();
    spectrum = reflectance_spectrum(stack, lambdas);
  } else {
    io::StackSpec spec;
    try {
      spec = io::read_stack(stack_path);
    } catch (const std::exception& e) {
      throw usage_error(std::string("cannot read stack: ") + e.what());
    }
    for (double lam : lambdas)
      spectrum.push_back({lam, reflectance_transmittance(spec.at(lam), lam).first});
  }

  io::CsvWriter csv({"lambda_nm", "reflectance"});
  for (const auto& pt : spectrum)
    csv.row({io::fmt_value(pt.lambda_nm), io::fmt_value(pt.reflectance)});
  io::atomic_write(out_path, csv.str());

  try {
    const auto mode = find_cavity_mode(spectrum);
    std::cout << "mode_center_nm," << io::fmt_value(mode.center_nm) << "\n"
              << "mode_fwhm_nm," << io::fmt_value(mode.fwhm_nm) << "\n";
  } catch (const domain_error&) {
    std::cout << "mode_center_nm,\nmode_fwhm_nm,\n";  // no dip in range
  }
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

// ---- polar --------------------------------------------------------------------

int cmd_polar(const std::string& dipoles_path, std::size_t n_samples,
              const std::string& out_path) {
  std::vector<std::pair<DipoleVector, std::string>> dipoles;
  try {
    const json j = json::parse(io::read_file(dipoles_path));
    for (const auto& jd : j.at("dipoles")) {
      DipoleVector d{};
      const auto& comps = jd.at("dipole");
      for (std::size_t k = 0; k < 3 && k < comps.size(); ++k) {
        if (comps[k].is_array())
          d[k] = {comps[k][0].get<double>(), comps[k][1].get<double>()};
        else
          d[k] = {comps[k].get<double>(), 0.0};
      }
      dipoles.push_back({d, jd.value("label", "d" + std::to_string(dipoles.size()))});
    }
  } catch (const usage_error&) {
    throw;
  } catch (const std::exception& e) {
    throw usage_error(std::string("cannot read dipole list: ") + e.what());
  }

  const auto diagram = polar_diagram(dipoles, n_samples);
  std::vector<std::string> header{"phi_deg"};
  for (const auto& c : diagram.curves) header.push_back(c.label);
  io::CsvWriter csv(header);
  for (std::size_t k = 0; k < diagram.phis_deg.size(); ++k) {
    std::vector<std::string> cells{io::fmt_value(diagram.phis_deg[k])};
    for (const auto& c : diagram.curves) cells.push_back(io::fmt_value(c.values[k]));
    csv.row(cells);
  }
  io::atomic_write(out_path, csv.str());
  std::cout << "sum_dlp," << io::fmt_value(diagram.sum_dlp) << "\n"
            << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization-resolved quantum-dot spectroscopy toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate synthetic polarimeter sweeps");
  std::string sim_config, sim_out = "sim_out";
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config, "simulation config JSON")->required();
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--seed", sim_seed, "RNG seed (default 0)");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Extract FSS and dipole orientation");
  std::string ana_manifest, ana_method = "hwp_sinusoid", ana_out = "results.csv";
  ana->add_option("--manifest", ana_manifest, "manifest JSON")->required();
  ana->add_option("--method", ana_method, "qwp_fft | hwp_sinusoid | both");
  ana->add_option("--out", ana_out, "results CSV path");

  // report
  auto* rep = app.add_subcommand("report", "Histograms and summary from results");
  std::string rep_results, rep_out = "report";
  rep->add_option("--results", rep_results, "results CSV")->required();
  rep->add_option("--out", rep_out, "output directory");

  // resolution
  auto* res = app.add_subcommand("resolution", "Monte-Carlo FSS resolution limit");
  double res_lw = 250.0, res_counts = 1.0e4;
  std::size_t res_angles = 36, res_trials = 500;
  std::uint64_t res_seed = 0;
  std::string res_out;
  res->add_option("--linewidth", res_lw, "linewidth FWHM in ueV");
  res->add_option("--n-angles", res_angles, "angles per sweep");
  res->add_option("--trials", res_trials, "Monte-Carlo trials");
  res->add_option("--seed", res_seed, "RNG seed");
  res->add_option("--peak-counts", res_counts, "integrated line counts");
  res->add_option("--out", res_out, "optional CSV output");

  // entangle
  auto* ent = app.add_subcommand("entangle", "Two-photon state parameter sweep");
  std::vector<double> ent_s{0.0}, ent_sc{0.0}, ent_tau{0.0};
  std::string ent_out = "entangle.csv";
  ent->add_option("--s", ent_s, "FSS values S in ueV");
  ent->add_option("--sc", ent_sc, "coupling values S_c in ueV");
  ent->add_option("--tau", ent_tau, "emission delays in ns");
  ent->add_option("--out", ent_out, "output CSV");

  // cavity
  auto* cav = app.add_subcommand("cavity", "DBR stack reflectance spectrum");
  std::string cav_stack, cav_out = "reflectance.csv";
  double cav_min = 1150.0, cav_max = 1480.0, cav_step = 0.5;
  cav->add_option("--stack", cav_stack, "stack JSON (default: built-in sample stack)");
  cav->add_option("--lambda-min", cav_min, "nm");
  cav->add_option("--lambda-max", cav_max, "nm");
  cav->add_option("--step", cav_step, "nm");
  cav->add_option("--out", cav_out, "output CSV");

  // polar
  auto* pol = app.add_subcommand("polar", "Polar diagram of squared dipole projections");
  std::string pol_dipoles, pol_out = "polar.csv";
  std::size_t pol_samples = 360;
  pol->add_option("--dipoles", pol_dipoles, "dipole list JSON")->required();
  pol->add_option("--samples", pol_samples, "analyzer directions");
  pol->add_option("--out", pol_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out, sim_seed);
    if (ana->parsed()) return cmd_analyze(ana_manifest, ana_method, ana_out);
    if (rep->parsed()) return cmd_report(rep_results, rep_out);
    if (res->parsed())
      return cmd_resolution(res_lw, res_angles, res_trials, res_seed, res_counts, res_out);
    if (ent->parsed()) return cmd_entangle(ent_s, ent_sc, ent_tau, ent_out);
    if (cav->parsed()) return cmd_cavity(cav_stack, cav_min, cav_max, cav_step, cav_out);
    if (pol->parsed()) return cmd_polar(pol_dipoles, pol_samples, pol_out);
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const empty_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
