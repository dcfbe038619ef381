#include "beamspace/channel.hpp"

#include <stdexcept>
#include <string>

namespace beamspace::channel {

double path_distance_m(const PathGeometry& g) {
  if (!(g.r_los_m > 0.0)) {
    throw std::domain_error("path_distance_m: base distance must be positive");
  }
  if (g.kind == PathKind::Los) return g.r_los_m;
  const double at = std::fabs(g.theta_t_rad);
  const double ar = std::fabs(g.theta_r_rad);
  if (!(at > 0.0) || !(ar > 0.0)) {
    throw std::domain_error("path_distance_m: reflected path needs nonzero offsets");
  }
  if (!(at + ar < kPi)) {
    throw std::domain_error("path_distance_m: offsets do not form a triangle");
  }
  // Law of sines over the reflection triangle whose base is the LOS segment.
  return (std::sin(at) + std::sin(ar)) / std::sin(kPi - at - ar) * g.r_los_m;
}

double path_loss_db(const RadioConstants& k, PathKind kind, double r_m) {
  if (!(r_m > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
  if (!(k.fc_ghz > 0.0)) throw std::domain_error("path_loss_db: fc must be positive");
  const double a = kind == PathKind::Los ? k.a_los : k.a_nlos;
  const double n = kind == PathKind::Los ? k.n_los : k.n_nlos;
  return a + 20.0 * std::log10(k.fc_ghz) + 10.0 * n * std::log10(r_m);
}

double friis_path_loss_db(const RadioConstants& k, double r_m) {
  if (!(r_m > 0.0)) throw std::domain_error("friis_path_loss_db: distance must be positive");
  const double lambda_m = kSpeedOfLight / (k.fc_ghz * 1e9);
  const double spreading = 20.0 * std::log10(4.0 * kPi * r_m / lambda_m);
  return spreading + k.beta_per_m * r_m;
}

double received_power_mw(double pt_dbm, double gt_linear, double gr_linear,
                         const RadioConstants& k, PathKind kind, double r_m) {
  if (!(gt_linear > 0.0) || !(gr_linear > 0.0)) {
    throw std::domain_error("received_power_mw: gains must be positive");
  }
  const double loss = db_to_linear(path_loss_db(k, kind, r_m));
  return dbm_to_mw(pt_dbm) * gt_linear * gr_linear / loss;
}

double main_lobe_gain(double xi_rad, double z) {
  if (!(xi_rad > 0.0) || !(xi_rad <= kTwoPi)) {
    throw std::invalid_argument("main_lobe_gain: xi outside (0, 2*pi]");
  }
  if (!(z >= 0.0) || !(z < 1.0)) {
    throw std::invalid_argument("main_lobe_gain: z outside [0, 1)");
  }
  return (kTwoPi - (kTwoPi - xi_rad) * z) / xi_rad;
}

double noise_power_dbm(const RadioConstants& k) {
  if (!(k.bandwidth_hz > 0.0)) {
    throw std::domain_error("noise_power_dbm: bandwidth must be positive");
  }
  return -174.0 + 10.0 * std::log10(k.bandwidth_hz) + k.nf_db;
}

double snr_db(const BeamPair& pair, double pt_dbm, const RadioConstants& k) {
  const double gt = main_lobe_gain(pair.xi_t_rad, k.z);
  const double gr = main_lobe_gain(pair.xi_r_rad, k.z);
  const double r = path_distance_m(pair.geometry);
  const double prx = received_power_mw(pt_dbm, gt, gr, k, pair.geometry.kind, r);
  return linear_to_db(prx / dbm_to_mw(noise_power_dbm(k)));
}

namespace {

struct BudgetParts {
  double signal_mw = 0.0;
  double interference_mw = 0.0;
  double noise_mw = 0.0;
  double gt = 0.0;
  double gr = 0.0;
  double loss_db = 0.0;
};

BudgetParts budget_parts(std::size_t index, std::span<const ActiveBeam> active,
                         const RadioConstants& k) {
  if (index >= active.size()) {
    throw std::out_of_range("sinr_db: beam index out of range");
  }
  const ActiveBeam& victim = active[index];
  BudgetParts out;
  out.gt = main_lobe_gain(victim.pair.xi_t_rad, k.z);
  out.gr = main_lobe_gain(victim.pair.xi_r_rad, k.z);
  const double r = path_distance_m(victim.pair.geometry);
  out.loss_db = path_loss_db(k, victim.pair.geometry.kind, r);
  const double loss = db_to_linear(out.loss_db);
  out.signal_mw = dbm_to_mw(victim.pt_dbm) * out.gt * out.gr / loss;
  out.noise_mw = dbm_to_mw(noise_power_dbm(k));
  // Interferers leak through their own side lobes into the victim's main
  // lobe and are attenuated by the victim's path loss.
  for (std::size_t j = 0; j < active.size(); ++j) {
    if (j == index) continue;
    out.interference_mw += dbm_to_mw(active[j].pt_dbm) * k.z * out.gr / loss;
  }
  return out;
}

}  // namespace

double sinr_db(std::size_t index, std::span<const ActiveBeam> active,
               const RadioConstants& k) {
  const BudgetParts p = budget_parts(index, active, k);
  return linear_to_db(p.signal_mw / (p.noise_mw + p.interference_mw));
}

LinkBudget link_budget(std::size_t index, std::span<const ActiveBeam> active,
                       const RadioConstants& k) {
  const BudgetParts p = budget_parts(index, active, k);
  LinkBudget b;
  b.pt_dbm = active[index].pt_dbm;
  b.gt_db = linear_to_db(p.gt);
  b.gr_db = linear_to_db(p.gr);
  b.loss_db = p.loss_db;
  b.noise_dbm = noise_power_dbm(k);
  b.interference_mw = p.interference_mw;
  b.sinr_db = linear_to_db(p.signal_mw / (p.noise_mw + p.interference_mw));
  return b;
}

double link_rate_bps(double bandwidth_hz, double sinr_db) {
  if (!(bandwidth_hz > 0.0)) {
    throw std::domain_error("link_rate_bps: bandwidth must be positive");
  }
  return bandwidth_hz * std::log2(1.0 + db_to_linear(sinr_db));
}

}  // namespace beamspace::channel
