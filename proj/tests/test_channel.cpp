#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "beamspace/channel.hpp"
#include "beamspace/simkernel.hpp"

using namespace beamspace;
using namespace beamspace::channel;

namespace {

RadioConstants table_defaults() { return RadioConstants{}; }

// Independent dB-summation reference, hand-rolled pow/log10 arithmetic.
double ref_loss_db(double a, double n, double fc_ghz, double r_m) {
  return a + 20.0 * std::log10(fc_ghz) + 10.0 * n * std::log10(r_m);
}

}  // namespace

TEST_CASE("log-distance loss reproduces the 60 GHz reference points") {
  const RadioConstants k = table_defaults();
  // 32.5 + 20 log10(60) + 20 log10(4)
  CHECK(path_loss_db(k, PathKind::Los, 4.0) ==
        doctest::Approx(80.1042248343).epsilon(1e-12));
  // 45.5 + 20 log10(60) + 14 log10(8)
  CHECK(path_loss_db(k, PathKind::Nlos, 8.0) ==
        doctest::Approx(93.7062848256).epsilon(1e-12));
  // both log terms vanish
  RadioConstants k1 = k;
  k1.fc_ghz = 1.0;
  CHECK(path_loss_db(k1, PathKind::Los, 1.0) == doctest::Approx(32.5));
}

TEST_CASE("loss grows monotonically in range and matches the reference form") {
  const RadioConstants k = table_defaults();
  sim::RngStream rng(2024, "loss-mono");
  for (int i = 0; i < 1'000; ++i) {
    const double r = rng.uniform(1.0, 500.0);
    CHECK(path_loss_db(k, PathKind::Los, r) ==
          doctest::Approx(ref_loss_db(32.5, 2.0, 60.0, r)).epsilon(1e-12));
    CHECK(path_loss_db(k, PathKind::Nlos, r) ==
          doctest::Approx(ref_loss_db(45.5, 1.4, 60.0, r)).epsilon(1e-12));
    CHECK(path_loss_db(k, PathKind::Los, r * 2) >
          path_loss_db(k, PathKind::Los, r));
  }
}

TEST_CASE("reflected paths lose more than the direct path at equal or longer range") {
  const RadioConstants k = table_defaults();
  sim::RngStream rng(7, "nlos-dominance");
  for (int i = 0; i < 2'000; ++i) {
    const double r_los = rng.uniform(1.0, 100.0);
    const double tt = rng.uniform(0.05, 1.5);
    const double tr = rng.uniform(0.05, std::min(1.5, 3.0 - tt));
    const PathGeometry g{PathKind::Nlos, tt, tr, r_los};
    const double r_n = path_distance_m(g);
    CHECK(r_n >= r_los);
    CHECK(path_loss_db(k, PathKind::Nlos, r_n) >
          path_loss_db(k, PathKind::Los, r_los));
  }
}

TEST_CASE("reflection triangle distance solves the worked geometry") {
  const PathGeometry g{PathKind::Nlos, deg_to_rad(10), deg_to_rad(20), 4.0};
  // (sin 10 + sin 20) / sin 150 * 4
  CHECK(path_distance_m(g) == doctest::Approx(4.125346568).epsilon(1e-9));
  const PathGeometry los{PathKind::Los, 0, 0, 4.0};
  CHECK(path_distance_m(los) == 4.0);
  // equilateral symmetry doubles the base distance
  const PathGeometry eq{PathKind::Nlos, deg_to_rad(60), deg_to_rad(60), 4.0};
  CHECK(path_distance_m(eq) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("degenerate reflection geometry is rejected") {
  CHECK_THROWS_AS(
      path_distance_m(PathGeometry{PathKind::Nlos, 0.0, 0.5, 4.0}),
      std::domain_error);
  CHECK_THROWS_AS(
      path_distance_m(PathGeometry{PathKind::Nlos, deg_to_rad(90),
                                   deg_to_rad(90), 4.0}),
      std::domain_error);
  CHECK_THROWS_AS(
      path_distance_m(PathGeometry{PathKind::Nlos, 0.3, 0.3, 0.0}),
      std::domain_error);
}

TEST_CASE("free-space reference loss agrees at the carrier wavelength") {
  const RadioConstants k = table_defaults();
  // 20 log10(4 pi R / lambda), lambda = c / 60 GHz, at R = 4 m
  const double lambda = kSpeedOfLight / 60e9;
  const double expect = 20.0 * std::log10(4.0 * kPi * 4.0 / lambda);
  CHECK(friis_path_loss_db(k, 4.0) == doctest::Approx(expect).epsilon(1e-12));
  // absorption adds beta dB per meter
  RadioConstants ka = k;
  ka.beta_per_m = 0.25;
  CHECK(friis_path_loss_db(ka, 4.0) ==
        doctest::Approx(expect + 1.0).epsilon(1e-12));
}

TEST_CASE("main-lobe gain holds the sectored-pattern power identity") {
  CHECK(main_lobe_gain(deg_to_rad(10), 0.1) ==
        doctest::Approx(32.5).epsilon(1e-13));
  CHECK(main_lobe_gain(deg_to_rad(15), 0.1) ==
        doctest::Approx(21.7).epsilon(1e-13));
  CHECK(main_lobe_gain(kTwoPi, 0.3) == doctest::Approx(1.0));
  sim::RngStream rng(99, "gain-conservation");
  for (int i = 0; i < 10'000; ++i) {
    const double xi = rng.uniform(1e-3, kTwoPi);
    const double z = rng.uniform(0.0, 0.999);
    const double g = main_lobe_gain(xi, z);
    CHECK(g >= 1.0);
    // total radiated power: main lobe over xi plus side lobes over the rest
    CHECK(g * xi + z * (kTwoPi - xi) == doctest::Approx(kTwoPi).epsilon(1e-12));
  }
  CHECK_THROWS_AS(main_lobe_gain(0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(main_lobe_gain(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("noise floor follows bandwidth and noise figure") {
  RadioConstants k = table_defaults();
  CHECK(noise_power_dbm(k) == doctest::Approx(-76.2390874094).epsilon(1e-12));
  k.bandwidth_hz = 2.16e9;
  CHECK(noise_power_dbm(k) == doctest::Approx(-74.6554624869).epsilon(1e-10));
}

TEST_CASE("received power composes the budget in linear milliwatts") {
  const RadioConstants k = table_defaults();
  RadioConstants k0 = k;
  k0.fc_ghz = 1.0;
  k0.a_los = 0.0;  // zero the whole loss: A + 20 log10(1) + n log10(1)
  CHECK(received_power_mw(0.0, 1.0, 1.0, k0, PathKind::Los, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // 3 dBm through the 60 GHz 4 m direct loss, isotropic ends
  const double expect = std::pow(10.0, (3.0 - 80.1042248343) / 10.0);
  CHECK(received_power_mw(3.0, 1.0, 1.0, k, PathKind::Los, 4.0) ==
        doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(1.948e-8).epsilon(1e-3));
  // inverse-square forcing under exponent 2
  const double near = received_power_mw(3.0, 2.0, 5.0, k, PathKind::Los, 7.0);
  const double far = received_power_mw(3.0, 2.0, 5.0, k, PathKind::Los, 14.0);
  CHECK(near / far == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("single-pair SNR sums the dB budget") {
  const RadioConstants k = table_defaults();
  const BeamPair p{0,
                   PathGeometry{PathKind::Los, 0, 0, 4.0},
                   deg_to_rad(10), deg_to_rad(15)};
  // 3 + 10log10(32.5) + 10log10(21.7) - 80.1042 + 76.2391
  const double expect = 3.0 + 10.0 * std::log10(32.5) +
                        10.0 * std::log10(21.7) - 80.1042248343 +
                        76.2390874094;
  CHECK(snr_db(p, 3.0, k) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("side-lobe interference enters through the victim path") {
  const RadioConstants k = table_defaults();
  const BeamPair los{0, PathGeometry{PathKind::Los, 0, 0, 4.0},
                     deg_to_rad(10), deg_to_rad(15)};
  const BeamPair nlos{1,
                      PathGeometry{PathKind::Nlos, deg_to_rad(10),
                                   deg_to_rad(20), 4.0},
                      deg_to_rad(10), deg_to_rad(15)};
  const std::vector<ActiveBeam> beams{{los, 3.0}, {nlos, 3.0}};

  // independent recomputation in linear milliwatts
  const double loss_los = std::pow(10.0, 80.1042248343 / 10.0);
  const double loss_nlos =
      std::pow(10.0, ref_loss_db(45.5, 1.4, 60.0, 4.125346568) / 10.0);
  const double noise = std::pow(10.0, -76.2390874094 / 10.0);
  const double pt = std::pow(10.0, 0.3);
  const double gt = 32.5, gr = 21.7, z = 0.1;
  const double sig_los = pt * gt * gr / loss_los;
  const double int_at_los = pt * z * gr / loss_los;
  const double expect_los = 10.0 * std::log10(sig_los / (noise + int_at_los));
  const double sig_nlos = pt * gt * gr / loss_nlos;
  const double int_at_nlos = pt * z * gr / loss_nlos;
  const double expect_nlos = 10.0 * std::log10(sig_nlos / (noise + int_at_nlos));

  CHECK(sinr_db(0, beams, k) == doctest::Approx(expect_los).epsilon(1e-10));
  CHECK(sinr_db(1, beams, k) == doctest::Approx(expect_nlos).epsilon(1e-10));

  // interference only hurts
  const std::vector<ActiveBeam> alone{{los, 3.0}};
  CHECK(sinr_db(0, alone, k) > sinr_db(0, beams, k));
  CHECK(sinr_db(0, alone, k) == doctest::Approx(snr_db(los, 3.0, k)));

  // with no side-lobe leakage the multi-beam case degenerates to plain SNR
  RadioConstants kz = k;
  kz.z = 0.0;
  const BeamPair los0{0, los.geometry, los.xi_t_rad, los.xi_r_rad};
  const std::vector<ActiveBeam> two{{los0, 3.0}, {nlos, 3.0}};
  CHECK(sinr_db(0, two, kz) == doctest::Approx(snr_db(los0, 3.0, kz)));
}

TEST_CASE("budget breakdown fields are mutually consistent") {
  const RadioConstants k = table_defaults();
  const BeamPair los{0, PathGeometry{PathKind::Los, 0, 0, 4.0},
                     deg_to_rad(10), deg_to_rad(15)};
  const BeamPair other{1,
                       PathGeometry{PathKind::Nlos, deg_to_rad(30),
                                    deg_to_rad(40), 4.0},
                       deg_to_rad(10), deg_to_rad(15)};
  const std::vector<ActiveBeam> beams{{los, 3.0}, {other, 0.0}};
  const LinkBudget b = link_budget(0, beams, k);
  CHECK(b.pt_dbm == 3.0);
  CHECK(b.loss_db == doctest::Approx(80.1042248343));
  CHECK(b.noise_dbm == doctest::Approx(-76.2390874094));
  const double sig_mw =
      std::pow(10.0, (b.pt_dbm + b.gt_db + b.gr_db - b.loss_db) / 10.0);
  const double denom = std::pow(10.0, b.noise_dbm / 10.0) + b.interference_mw;
  CHECK(b.sinr_db == doctest::Approx(10.0 * std::log10(sig_mw / denom)));
  CHECK(b.sinr_db == doctest::Approx(sinr_db(0, beams, k)));
}

TEST_CASE("rate is the bandwidth-scaled log of one plus linear SINR") {
  const double expect = 1.5e9 * std::log2(1.0 + std::pow(10.0, 1.5));
  CHECK(link_rate_bps(1.5e9, 15.0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(link_rate_bps(1.5e9, 15.0) == doctest::Approx(7.5418e9).epsilon(1e-4));
  CHECK(link_rate_bps(1e9, -300.0) == doctest::Approx(0.0).epsilon(1e-12));
  // strictly increasing in SINR
  CHECK(link_rate_bps(1e9, 10.0) < link_rate_bps(1e9, 10.5));
}
