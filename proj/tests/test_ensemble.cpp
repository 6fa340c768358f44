#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fsskit/ensemble.hpp"
#include "fsskit/fss.hpp"
#include "fsskit/rng.hpp"

using namespace fsskit;

namespace {

DetectorModel quiet_detector() {
  DetectorModel d;
  d.shot_noise = false;
  d.read_noise_rms = 0.0;
  return d;
}

SeriesInput make_input(const std::string& id, const std::string& dot, Species sp,
                       double fss_uev, double phi_deg, std::uint64_t seed) {
  EmitterModel e;
  e.fss_uev = fss_uev;
  e.dipole_angle_deg = phi_deg;
  e.species = sp;
  SeriesInput in;
  in.emitter_id = id;
  in.dot_id = dot;
  in.species = sp;
  in.polarimeter = PolarimeterConfig::hwp_default();
  in.series = simulate_angle_series(e, in.polarimeter, quiet_detector(),
                                    uniform_angles(18, 180.0), RngStream(seed));
  return in;
}

EnsembleRecord synthetic_record(const std::string& id, double fss, double phi) {
  EnsembleRecord r;
  r.emitter_id = id;
  r.result.fss_uev = fss;
  r.result.dipole_angle_deg = phi;
  r.result.dipole_defined = true;
  return r;
}

}  // namespace

TEST_CASE("circular median handles the mod-180 wraparound") {
  CHECK(circular_median_mod180({10.0, 20.0, 30.0}) == Catch::Approx(20.0));
  // cluster straddling 0/180
  const double m = circular_median_mod180({176.0, 178.0, 2.0, 4.0, 0.0});
  CHECK(std::fabs(polarization_angle_difference(m, 0.0)) < 3.0);
  CHECK_THROWS_AS(circular_median_mod180({}), domain_error);
}

TEST_CASE("fraction below threshold") {
  std::vector<EnsembleRecord> recs;
  recs.push_back(synthetic_record("a", 10.0, 0.0));
  recs.push_back(synthetic_record("b", 40.0, 0.0));
  recs.push_back(synthetic_record("c", 120.0, 0.0));
  recs.push_back(synthetic_record("d", 300.0, 0.0));
  CHECK(fraction_below(recs, 50.0) == Catch::Approx(0.5));
  CHECK(fraction_below(recs, 5.0) == 0.0);
  CHECK(fraction_below(recs, 1000.0) == 1.0);
  // monotone in the threshold
  CHECK(fraction_below(recs, 45.0) <= fraction_below(recs, 125.0));

  // failed records are excluded
  EnsembleRecord bad = synthetic_record("e", 1.0, 0.0);
  bad.flags.insert(RecordFlag::Failed);
  recs.push_back(bad);
  CHECK(fraction_below(recs, 50.0) == Catch::Approx(0.5));

  std::vector<EnsembleRecord> only_bad{bad};
  CHECK_THROWS_AS(fraction_below(only_bad, 50.0), domain_error);
}

TEST_CASE("orientation distribution recovers a gaussian population") {
  RngStream rng(17);
  std::vector<EnsembleRecord> recs;
  for (int k = 0; k < 300; ++k)
    recs.push_back(synthetic_record("q" + std::to_string(k), 100.0,
                                    normalize_polarization_angle(rng.normal(3.1, 2.2))));
  const auto dist = orientation_distribution(recs, 2.0);
  CHECK(std::fabs(polarization_angle_difference(dist.fit_center_deg, 3.1)) < 0.7);
  CHECK(dist.fit_sigma_deg == Catch::Approx(2.2).margin(0.8));
  CHECK(dist.n_main == 300);
  CHECK(dist.n_secondary == 0);
  std::size_t total = 0;
  for (auto c : dist.counts) total += c;
  CHECK(total == 300);
}

TEST_CASE("orientation distribution counts a perpendicular subpopulation") {
  RngStream rng(18);
  std::vector<EnsembleRecord> recs;
  for (int k = 0; k < 60; ++k)
    recs.push_back(synthetic_record("x" + std::to_string(k), 100.0,
                                    normalize_polarization_angle(rng.normal(3.1, 2.2))));
  for (int k = 0; k < 8; ++k)
    recs.push_back(synthetic_record("xx" + std::to_string(k), 100.0,
                                    normalize_polarization_angle(rng.normal(93.1, 2.2))));
  const auto dist = orientation_distribution(recs, 2.0);
  CHECK(dist.n_secondary == 8);
  CHECK(std::fabs(polarization_angle_difference(dist.fit_center_deg, 3.1)) < 1.5);
}

TEST_CASE("orientation distribution survives a degenerate single-bin histogram") {
  std::vector<EnsembleRecord> recs;
  for (int k = 0; k < 6; ++k) recs.push_back(synthetic_record("q", 100.0, 45.0));
  const auto dist = orientation_distribution(recs, 2.0);
  CHECK(std::fabs(polarization_angle_difference(dist.fit_center_deg, 45.0)) < 2.0);
  CHECK(dist.fit_sigma_deg >= 2.0);  // floored at the bin width

  std::vector<EnsembleRecord> few(recs.begin(), recs.begin() + 3);
  CHECK_THROWS_AS(orientation_distribution(few, 2.0), domain_error);
}

TEST_CASE("batch analyze pairs species and isolates failures") {
  std::vector<SeriesInput> inputs;
  inputs.push_back(make_input("qd0_x", "dot0", Species::X, 120.0, 3.0, 1));
  inputs.push_back(make_input("qd0_xx", "dot0", Species::XX, 120.0, 93.0, 2));
  inputs.push_back(make_input("qd1_x", "dot1", Species::X, 8.0, 5.0, 3));
  // a corrupt series: one flat spectrum, centroiding must fail
  SeriesInput broken;
  broken.emitter_id = "qd2_x";
  broken.dot_id = "dot2";
  broken.species = Species::X;
  broken.series.angles_deg = uniform_angles(18, 180.0);
  for (std::size_t k = 0; k < 18; ++k) {
    Spectrum sp;
    for (int i = 0; i < 64; ++i) {
      sp.energies_ev.push_back(0.94 + 1e-4 * i);
      sp.counts.push_back(3.0);
    }
    broken.series.spectra.push_back(sp);
  }
  inputs.push_back(broken);

  const auto recs = batch_analyze(inputs);
  REQUIRE(recs.size() == 4);
  CHECK(recs[0].paired_id == "qd0_xx");
  CHECK(recs[1].paired_id == "qd0_x");
  CHECK(recs[2].flags.count(RecordFlag::Unpaired) == 1);
  CHECK(recs[3].flags.count(RecordFlag::Failed) == 1);
  CHECK_FALSE(recs[3].error.empty());

  CHECK(recs[0].result.fss_uev == Catch::Approx(120.0).margin(0.1));
  CHECK(recs[1].result.fss_uev == Catch::Approx(120.0).margin(0.1));
  // small splitting against a 250+irf-wide line: flagged below resolution
  CHECK(recs[2].flags.count(RecordFlag::BelowResolution) == 1);
  // the perpendicular record is marked as a biexciton candidate
  CHECK(recs[1].flags.count(RecordFlag::SuspectedXx) == 1);
  CHECK(recs[0].flags.count(RecordFlag::SuspectedXx) == 0);
}

TEST_CASE("batch analyze results do not depend on worker interleaving") {
  std::vector<SeriesInput> inputs;
  for (int k = 0; k < 6; ++k)
    inputs.push_back(make_input("q" + std::to_string(k), "", Species::X,
                                60.0 + 20.0 * k, 3.0 + k, 100 + k));
  const auto a = batch_analyze(inputs);
  const auto b = batch_analyze(inputs);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].result.fss_uev == b[k].result.fss_uev);
    CHECK(a[k].result.dipole_angle_deg == b[k].result.dipole_angle_deg);
  }
}

TEST_CASE("polar diagram basic shapes") {
  // single x dipole: cos^2 curve, full linear polarization of the sum
  const auto one = polar_diagram({{{{1.0, 0.0, 0.0}}, "X"}}, 72);
  REQUIRE(one.curves.size() == 2);  // the dipole and the sum
  CHECK(one.curves[0].values[0] == Catch::Approx(1.0));
  CHECK(one.curves[0].values[18] == Catch::Approx(0.0).margin(1e-12));  // 90 deg
  CHECK(one.sum_dlp == Catch::Approx(1.0));

  // two orthogonal equal dipoles: isotropic sum, zero dlp
  const auto two = polar_diagram({{{{1.0, 0.0, 0.0}}, "a"}, {{{0.0, 1.0, 0.0}}, "b"}}, 72);
  CHECK(two.sum_dlp == Catch::Approx(0.0).margin(1e-12));

  // circular in-plane dipole alone: isotropic
  const std::complex<double> inv_sqrt2(1.0 / std::sqrt(2.0), 0.0);
  const auto circ = polar_diagram(
      {{{{inv_sqrt2, std::complex<double>(0.0, 1.0) * inv_sqrt2, 0.0}}, "c"}}, 72);
  CHECK(circ.sum_dlp == Catch::Approx(0.0).margin(1e-12));

  CHECK_THROWS_AS(polar_diagram({}, 72), domain_error);
  CHECK_THROWS_AS(polar_diagram({{{{1.0, 0.0, 0.0}}, "X"}}, 8), domain_error);
  // pure z dipole: no in-plane projection anywhere, dlp undefined
  CHECK_THROWS_AS(polar_diagram({{{{0.0, 0.0, 1.0}}, "Z"}}, 72), domain_error);
}
