// File formats: angle-series CSV, manifest / simulation / stack JSON, and
// deterministic CSV output helpers. All writes go through a temp file +
// rename so partial runs never leave corrupt artifacts.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsskit/cavity.hpp"
#include "fsskit/core.hpp"
#include "fsskit/ensemble.hpp"
#include "fsskit/forward_model.hpp"

namespace fsskit::io {

using nlohmann::json;

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed decimal formatting so outputs are byte-identical across platforms.
inline std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  // avoid the "-0.000000" artifact
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

inline std::string fmt_energy_ev(double v) { return fmt(v, 9); }
inline std::string fmt_value(double v) { return fmt(v, 6); }

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw io_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- angle-series files ---------------------------------------------------

inline std::string serialize_angle_series(const AngleSeries& series) {
  std::ostringstream out;
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << "# angle_deg=" << fmt_value(series.angles_deg[k]) << "\n";
    out << "energy_eV,counts\n";
    const auto& sp = series.spectra[k];
    for (std::size_t i = 0; i < sp.size(); ++i)
      out << fmt_energy_ev(sp.energies_ev[i]) << ',' << fmt_value(sp.counts[i]) << "\n";
  }
  return out.str();
}

inline void write_angle_series(const std::filesystem::path& path, const AngleSeries& s) {
  atomic_write(path, serialize_angle_series(s));
}

inline AngleSeries parse_angle_series(const std::string& text) {
  AngleSeries series;
  std::istringstream in(text);
  std::string line;
  Spectrum current;
  bool open = false;
  auto flush = [&] {
    if (open) {
      current.validate();
      series.spectra.push_back(std::move(current));
      current = Spectrum{};
    }
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# angle_deg=", 0) == 0) {
      flush();
      series.angles_deg.push_back(std::stod(line.substr(12)));
      open = true;
      continue;
    }
    if (line.rfind("energy_eV", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || !open)
      throw io_error("malformed angle-series line: " + line);
    current.energies_ev.push_back(std::stod(line.substr(0, comma)));
    current.counts.push_back(std::stod(line.substr(comma + 1)));
  }
  flush();
  if (series.angles_deg.size() != series.spectra.size() || series.size() == 0)
    throw io_error("malformed angle-series file");
  return series;
}

inline AngleSeries read_angle_series(const std::filesystem::path& path) {
  return parse_angle_series(read_file(path));
}

// ---- polarimeter / detector JSON -------------------------------------------

inline json to_json(const PolarimeterConfig& p) {
  return json{{"kind", p.kind == PolarimeterKind::QWP_LP ? "qwp_lp" : "hwp_lp"},
              {"lp_axis_deg", p.lp_axis_deg},
              {"reference_offset_deg", p.reference_offset_deg}};
}

inline PolarimeterConfig polarimeter_from_json(const json& j) {
  PolarimeterConfig p;
  const std::string kind = j.value("kind", "hwp_lp");
  if (kind == "qwp_lp") p = PolarimeterConfig::qwp_default();
  else if (kind == "hwp_lp") p = PolarimeterConfig::hwp_default();
  else throw io_error("polarimeter.kind must be qwp_lp or hwp_lp");
  p.lp_axis_deg = j.value("lp_axis_deg", p.lp_axis_deg);
  p.reference_offset_deg = j.value("reference_offset_deg", p.reference_offset_deg);
  p.steering_1chi_depth = j.value("steering_1chi_depth", 0.0);
  p.steering_1chi_phase_deg = j.value("steering_1chi_phase_deg", 0.0);
  p.prewave_retardance_deg = j.value("prewave_retardance_deg", 0.0);
  p.prewave_axis_deg = j.value("prewave_axis_deg", 0.0);
  p.validate();
  return p;
}

inline DetectorModel detector_from_json(const json& j) {
  DetectorModel d;
  d.irf_fwhm_uev = j.value("irf_fwhm_uev", d.irf_fwhm_uev);
  d.pixel_pitch_uev = j.value("pixel_pitch_uev", d.pixel_pitch_uev);
  d.n_pixels = j.value("n_pixels", d.n_pixels);
  d.read_noise_rms = j.value("read_noise_rms", d.read_noise_rms);
  d.shot_noise = j.value("shot_noise", d.shot_noise);
  d.center_energy_ev = j.value("center_energy_ev", d.center_energy_ev);
  d.validate();
  return d;
}

// ---- manifest ---------------------------------------------------------------

struct ManifestEntry {
  std::string emitter_id;
  std::string dot_id;
  Species species = Species::Unknown;
  std::string series_path;
  std::optional<double> linewidth_hint_uev;
  PolarimeterConfig polarimeter;
};

struct Manifest {
  int version = 1;
  std::vector<ManifestEntry> entries;
};

inline json to_json(const Manifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json je{{"emitter_id", e.emitter_id},
            {"dot_id", e.dot_id},
            {"species", species_name(e.species)},
            {"series_path", e.series_path},
            {"polarimeter", to_json(e.polarimeter)}};
    if (e.linewidth_hint_uev) je["linewidth_hint_uev"] = *e.linewidth_hint_uev;
    entries.push_back(je);
  }
  return json{{"version", m.version}, {"entries", entries}};
}

inline Manifest manifest_from_json(const json& j) {
  Manifest m;
  m.version = j.value("version", 1);
  std::map<std::string, bool> seen;
  for (const auto& je : j.at("entries")) {
    ManifestEntry e;
    e.emitter_id = je.at("emitter_id").get<std::string>();
    if (seen[e.emitter_id]) throw io_error("duplicate emitter_id: " + e.emitter_id);
    seen[e.emitter_id] = true;
    e.dot_id = je.value("dot_id", "");
    e.species = species_from_name(je.value("species", "unknown"));
    e.series_path = je.at("series_path").get<std::string>();
    if (je.contains("linewidth_hint_uev"))
      e.linewidth_hint_uev = je["linewidth_hint_uev"].get<double>();
    if (je.contains("polarimeter")) e.polarimeter = polarimeter_from_json(je["polarimeter"]);
    m.entries.push_back(e);
  }
  return m;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  return manifest_from_json(json::parse(read_file(path)));
}

inline void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  atomic_write(path, to_json(m).dump(2) + "\n");
}

// ---- cavity stack -----------------------------------------------------------

/// A layer whose index may be dispersive (tabulated vs wavelength).
struct LayerSpec {
  std::string label;
  double thickness_nm = 0.0;
  std::complex<double> index{1.0, 0.0};
  // optional dispersion table: lambda_nm -> complex index, linearly interpolated
  std::vector<std::pair<double, std::complex<double>>> table;

  std::complex<double> index_at(double lambda_nm) const {
    if (table.empty()) return index;
    if (lambda_nm <= table.front().first) return table.front().second;
    if (lambda_nm >= table.back().first) return table.back().second;
    for (std::size_t k = 1; k < table.size(); ++k) {
      if (lambda_nm <= table[k].first) {
        const double f = (lambda_nm - table[k - 1].first) /
                         (table[k].first - table[k - 1].first);
        return table[k - 1].second + f * (table[k].second - table[k - 1].second);
      }
    }
    return table.back().second;
  }
};

struct StackSpec {
  std::complex<double> ambient_index{1.0, 0.0};
  std::complex<double> substrate_index{3.41, 0.0};
  std::vector<LayerSpec> layers;

  Stack at(double lambda_nm) const {
    Stack st;
    st.ambient_index = ambient_index;
    st.substrate_index = substrate_index;
    for (const auto& l : layers)
      st.layers.push_back({l.index_at(lambda_nm), l.thickness_nm, l.label});
    return st;
  }
};

inline std::vector<std::pair<double, std::complex<double>>> read_index_table(
    const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<double, std::complex<double>>> table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("lambda", 0) == 0) continue;
    double lam, re, im = 0.0;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    if (!(row >> lam >> re)) throw io_error("malformed index table row: " + line);
    row >> im;
    table.push_back({lam, {re, im}});
  }
  if (table.size() < 2) throw io_error("index table needs >= 2 rows: " + path.string());
  return table;
}

inline StackSpec stack_from_json(const json& j, const std::filesystem::path& base_dir) {
  StackSpec spec;
  spec.ambient_index = {j.value("ambient_n_re", 1.0), j.value("ambient_n_im", 0.0)};
  spec.substrate_index = {j.value("substrate_n_re", 3.41), j.value("substrate_n_im", 0.0)};
  for (const auto& jl : j.at("layers")) {
    LayerSpec l;
    l.label = jl.value("label", "");
    l.thickness_nm = jl.at("thickness_nm").get<double>();
    if (jl.contains("index_table_path")) {
      l.table = read_index_table(base_dir / jl["index_table_path"].get<std::string>());
    } else {
      l.index = {jl.at("n_re").get<double>(), jl.value("n_im", 0.0)};
    }
    spec.layers.push_back(l);
  }
  if (spec.layers.empty()) throw io_error("stack has no layers");
  return spec;
}

inline StackSpec read_stack(const std::filesystem::path& path) {
  return stack_from_json(json::parse(read_file(path)), path.parent_path());
}

// ---- CSV helpers ------------------------------------------------------------

struct CsvWriter {
  std::ostringstream out;

  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t k = 0; k < header.size(); ++k)
      out << header[k] << (k + 1 < header.size() ? "," : "\n");
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k)
      out << cells[k] << (k + 1 < cells.size() ? "," : "\n");
  }
  std::string str() const { return out.str(); }
};

}  // namespace fsskit::io
