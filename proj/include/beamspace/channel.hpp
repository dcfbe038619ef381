#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace beamspace::channel {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct RadioConstants {
  double fc_ghz = 60.0;        // carrier frequency
  double bandwidth_hz = 1.5e9;
  double nf_db = 6.0;          // receiver noise figure
  double a_los = 32.5;         // log-distance intercepts / exponents
  double a_nlos = 45.5;
  double n_los = 2.0;
  double n_nlos = 1.4;
  double z = 0.1;              // average side-lobe gain, linear
  double beta_per_m = 0.0;     // atmospheric absorption, dB/m (free-space model)
};

enum class PathKind { Los, Nlos };

// One propagation path between the transmit and receive arrays. Angles are
// boresight offsets relative to the LOS direction; NLOS distance follows
// from the reflection triangle over the LOS base.
struct PathGeometry {
  PathKind kind = PathKind::Los;
  double theta_t_rad = 0.0;
  double theta_r_rad = 0.0;
  double r_los_m = 4.0;
};

// A trained transmit/receive beam pair aimed along one path.
struct BeamPair {
  int id = 0;
  PathGeometry geometry;
  double xi_t_rad = 0.0;  // transmit beamwidth
  double xi_r_rad = 0.0;  // receive beamwidth
};

// A beam pair that is actively transmitting at a given power.
struct ActiveBeam {
  BeamPair pair;
  double pt_dbm = 0.0;
};

struct LinkBudget {
  double pt_dbm = 0.0;
  double gt_db = 0.0;
  double gr_db = 0.0;
  double loss_db = 0.0;
  double noise_dbm = 0.0;
  double interference_mw = 0.0;
  double sinr_db = 0.0;
};

// Deployment description shared by training, tracking and the sweep
// harness. paths[0] is conventionally the LOS path.
struct Scenario {
  RadioConstants radio;
  std::vector<PathGeometry> paths;
  double xi_t_rad = 0.0;
  double xi_r_rad = 0.0;
  int max_tx_beams = 10;   // concurrent beams the transmit array can form
  int max_rx_beams = 10;
  int tx_sectors = 0;      // scan sector counts; 0 = derive from path angles
  int rx_sectors = 0;
};

// Travel distance of a path. LOS returns the base distance; NLOS solves the
// reflection triangle and requires 0 < |theta_t| + |theta_r| < pi with both
// offsets nonzero.
double path_distance_m(const PathGeometry& g);

// Log-distance loss: A + 20 log10(fc_GHz) + 10 n log10(R_m). Distances are
// in meters; with A = 32.5 dB this matches free space at 1 m within 0.06 dB.
double path_loss_db(const RadioConstants& k, PathKind kind, double r_m);

// Free-space loss with absorption: 20 log10(4 pi R / lambda) plus beta * R,
// beta in dB per meter.
double friis_path_loss_db(const RadioConstants& k, double r_m);

double received_power_mw(double pt_dbm, double gt_linear, double gr_linear,
                         const RadioConstants& k, PathKind kind, double r_m);

// Sectored-pattern main-lobe gain (2 pi - (2 pi - xi) z) / xi. Conserves
// total radiated pattern: G_ma * xi + z * (2 pi - xi) == 2 pi.
double main_lobe_gain(double xi_rad, double z);

double noise_power_dbm(const RadioConstants& k);

// Single-link SNR with full main-lobe gains on both ends, no interference.
double snr_db(const BeamPair& pair, double pt_dbm, const RadioConstants& k);

// SINR of active[index] among concurrently transmitting beams; interferers
// couple through their transmit power and the victim's side lobes.
double sinr_db(std::size_t index, std::span<const ActiveBeam> active,
               const RadioConstants& k);

LinkBudget link_budget(std::size_t index, std::span<const ActiveBeam> active,
                       const RadioConstants& k);

// Shannon rate over the configured bandwidth.
double link_rate_bps(double bandwidth_hz, double sinr_db);

}  // namespace beamspace::channel
