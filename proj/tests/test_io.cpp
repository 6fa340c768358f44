#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <unistd.h>

#include "fsskit/io.hpp"

using namespace fsskit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fsskit_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

AngleSeries sample_series() {
  AngleSeries s;
  s.angles_deg = {0.0, 10.0, 20.0};
  for (int k = 0; k < 3; ++k) {
    Spectrum sp;
    for (int i = 0; i < 8; ++i) {
      sp.energies_ev.push_back(0.948 + 25e-6 * i);
      sp.counts.push_back(100.0 * k + 3.5 * i);
    }
    s.spectra.push_back(sp);
  }
  return s;
}

}  // namespace

TEST_CASE("fixed-decimal formatting") {
  CHECK(io::fmt_value(1.25) == "1.250000");
  CHECK(io::fmt_value(-3.5) == "-3.500000");
  CHECK(io::fmt_energy_ev(0.948123456789) == "0.948123457");
  // no negative zero in output
  CHECK(io::fmt_value(-1e-9) == "0.000000");
}

TEST_CASE("angle series round trip") {
  const auto s = sample_series();
  const std::string text = io::serialize_angle_series(s);
  const auto back = io::parse_angle_series(text);
  REQUIRE(back.size() == s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(back.angles_deg[k] == Catch::Approx(s.angles_deg[k]).margin(1e-6));
    REQUIRE(back.spectra[k].size() == s.spectra[k].size());
    for (std::size_t i = 0; i < s.spectra[k].size(); ++i) {
      CHECK(back.spectra[k].energies_ev[i] ==
            Catch::Approx(s.spectra[k].energies_ev[i]).margin(1e-9));
      CHECK(back.spectra[k].counts[i] == Catch::Approx(s.spectra[k].counts[i]).margin(1e-6));
    }
  }
  // a second serialization pass is byte-identical
  CHECK(io::serialize_angle_series(back) == text);
}

TEST_CASE("angle series file io and malformed input") {
  TempDir tmp;
  const auto s = sample_series();
  io::write_angle_series(tmp.path / "nested" / "series.csv", s);
  const auto back = io::read_angle_series(tmp.path / "nested" / "series.csv");
  CHECK(back.size() == 3);

  CHECK_THROWS_AS(io::read_angle_series(tmp.path / "missing.csv"), io::io_error);
  CHECK_THROWS_AS(io::parse_angle_series("no header\n1,2\n"), io::io_error);
  CHECK_THROWS_AS(io::parse_angle_series(""), io::io_error);
}

TEST_CASE("manifest round trip") {
  TempDir tmp;
  io::Manifest m;
  io::ManifestEntry e;
  e.emitter_id = "qd0_x";
  e.dot_id = "dot0";
  e.species = Species::X;
  e.series_path = "series/qd0_x.csv";
  e.linewidth_hint_uev = 250.0;
  e.polarimeter = PolarimeterConfig::hwp_default();
  m.entries.push_back(e);
  e.emitter_id = "qd0_xx";
  e.species = Species::XX;
  e.linewidth_hint_uev.reset();
  m.entries.push_back(e);

  io::write_manifest(tmp.path / "manifest.json", m);
  const auto back = io::read_manifest(tmp.path / "manifest.json");
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].emitter_id == "qd0_x");
  CHECK(back.entries[0].species == Species::X);
  CHECK(back.entries[0].linewidth_hint_uev.value() == 250.0);
  CHECK_FALSE(back.entries[1].linewidth_hint_uev.has_value());
  CHECK(back.entries[1].polarimeter.reference_offset_deg == 82.0);

  // duplicate ids are rejected
  m.entries[1].emitter_id = "qd0_x";
  io::write_manifest(tmp.path / "dup.json", m);
  CHECK_THROWS_AS(io::read_manifest(tmp.path / "dup.json"), io::io_error);
}

TEST_CASE("polarimeter json accepts both kinds and validates") {
  const auto q = io::polarimeter_from_json({{"kind", "qwp_lp"}});
  CHECK(q.kind == PolarimeterKind::QWP_LP);
  CHECK(q.reference_offset_deg == 0.0);
  const auto h = io::polarimeter_from_json(
      {{"kind", "hwp_lp"}, {"reference_offset_deg", 12.0}, {"lp_axis_deg", 5.0}});
  CHECK(h.reference_offset_deg == 12.0);
  CHECK(h.lp_axis_deg == 5.0);
  CHECK_THROWS_AS(io::polarimeter_from_json({{"kind", "nope"}}), io::io_error);
  CHECK_THROWS_AS(io::polarimeter_from_json(
                      {{"kind", "hwp_lp"}, {"steering_1chi_depth", 2.0}}),
                  fsskit::domain_error);
}

TEST_CASE("stack json with constant and tabulated indices") {
  TempDir tmp;
  io::atomic_write(tmp.path / "gaas.csv",
                   "lambda_nm,n_re,n_im\n1200,3.45,0\n1310,3.41,0\n1400,3.39,0\n");
  nlohmann::json j = {
      {"ambient_n_re", 1.0},
      {"substrate_n_re", 3.41},
      {"layers",
       {{{"label", "A"}, {"thickness_nm", 96.0}, {"n_re", 3.41}},
        {{"label", "B"}, {"thickness_nm", 106.7}, {"index_table_path", "gaas.csv"}}}}};
  io::atomic_write(tmp.path / "stack.json", j.dump());
  const auto spec = io::read_stack(tmp.path / "stack.json");
  REQUIRE(spec.layers.size() == 2);
  CHECK(spec.layers[0].index_at(1310.0).real() == 3.41);
  // interpolation midway between table rows
  CHECK(spec.layers[1].index_at(1255.0).real() == Catch::Approx(3.43).margin(1e-12));
  // clamped outside the table
  CHECK(spec.layers[1].index_at(900.0).real() == 3.45);
  CHECK(spec.layers[1].index_at(2000.0).real() == 3.39);

  const Stack at = spec.at(1310.0);
  CHECK(at.layers[1].refractive_index.real() == Catch::Approx(3.41));

  CHECK_THROWS_AS(io::stack_from_json({{"layers", nlohmann::json::array()}}, tmp.path),
                  io::io_error);
}

TEST_CASE("atomic write replaces content and creates directories") {
  TempDir tmp;
  const auto p = tmp.path / "a" / "b" / "f.txt";
  io::atomic_write(p, "one");
  io::atomic_write(p, "two");
  CHECK(io::read_file(p) == "two");
  CHECK_FALSE(fs::exists(p.string() + ".tmp"));
}

TEST_CASE("csv writer") {
  io::CsvWriter csv({"a", "b"});
  csv.row({"1", "2"});
  csv.row({"x", "y"});
  CHECK(csv.str() == "a,b\n1,2\nx,y\n");
}
