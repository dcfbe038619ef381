#include "beamspace/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace beamspace::harness {

namespace {

using njson = nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

double as_double(const njson& v, const std::string& where) {
  if (!v.is_number()) fail("config: " + where + " must be a number");
  return v.get<double>();
}

std::int64_t as_int(const njson& v, const std::string& where) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    fail("config: " + where + " must be an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t as_u64(const njson& v, const std::string& where) {
  const std::int64_t n = as_int(v, where);
  if (n < 0) fail("config: " + where + " must be nonnegative");
  return static_cast<std::uint64_t>(n);
}

bool as_bool(const njson& v, const std::string& where) {
  if (!v.is_boolean()) fail("config: " + where + " must be a boolean");
  return v.get<bool>();
}

std::string as_string(const njson& v, const std::string& where) {
  if (!v.is_string()) fail("config: " + where + " must be a string");
  return v.get<std::string>();
}

std::vector<double> as_double_list(const njson& v, const std::string& where) {
  if (!v.is_array()) fail("config: " + where + " must be an array");
  std::vector<double> out;
  for (const njson& e : v) out.push_back(as_double(e, where + " element"));
  return out;
}

std::vector<int> as_int_list(const njson& v, const std::string& where) {
  if (!v.is_array()) fail("config: " + where + " must be an array");
  std::vector<int> out;
  for (const njson& e : v) {
    out.push_back(static_cast<int>(as_int(e, where + " element")));
  }
  return out;
}

void check_keys(const njson& obj, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&item](const char* k) { return item.key() == k; });
    if (!known) fail("config: unknown key '" + item.key() + "' in " + ctx);
  }
}

void parse_blockage(const njson& j, tracking::BlockageProcess& b) {
  if (!j.is_object()) fail("config: track.blockage must be an object");
  check_keys(j, "track.blockage",
             {"mode", "p", "epoch_us", "mean_on_us", "mean_off_us",
              "intervals"});
  if (j.contains("mode")) {
    const std::string m = as_string(j["mode"], "track.blockage.mode");
    using Mode = tracking::BlockageProcess::Mode;
    if (m == "none") {
      b.mode = Mode::None;
    } else if (m == "scripted") {
      b.mode = Mode::Scripted;
    } else if (m == "bernoulli") {
      b.mode = Mode::Bernoulli;
    } else if (m == "onoff") {
      b.mode = Mode::OnOff;
    } else {
      fail("config: track.blockage.mode must be none|scripted|bernoulli|onoff");
    }
  }
  if (j.contains("p")) b.p = as_double(j["p"], "track.blockage.p");
  if (j.contains("epoch_us")) {
    b.epoch_us = as_int(j["epoch_us"], "track.blockage.epoch_us");
  }
  if (j.contains("mean_on_us")) {
    b.mean_on_us = as_double(j["mean_on_us"], "track.blockage.mean_on_us");
  }
  if (j.contains("mean_off_us")) {
    b.mean_off_us = as_double(j["mean_off_us"], "track.blockage.mean_off_us");
  }
  if (j.contains("intervals")) {
    const njson& arr = j["intervals"];
    if (!arr.is_array()) fail("config: track.blockage.intervals must be an array");
    b.intervals.clear();
    for (const njson& e : arr) {
      if (!e.is_object()) {
        fail("config: track.blockage.intervals entries must be objects");
      }
      check_keys(e, "track.blockage.intervals[]",
                 {"pair", "from_us", "to_us", "full", "atten_db"});
      tracking::BlockageInterval iv;
      if (!e.contains("pair") || !e.contains("from_us") || !e.contains("to_us")) {
        fail("config: blockage interval needs pair, from_us, to_us");
      }
      iv.pair_id = static_cast<int>(as_int(e["pair"], "interval pair"));
      iv.from = as_int(e["from_us"], "interval from_us");
      iv.to = as_int(e["to_us"], "interval to_us");
      if (e.contains("full")) iv.full = as_bool(e["full"], "interval full");
      if (e.contains("atten_db")) {
        iv.atten_db = as_double(e["atten_db"], "interval atten_db");
      }
      b.intervals.push_back(iv);
    }
  }
}

void parse_track(const njson& j, TrackDemoConfig& t) {
  if (!j.is_object()) fail("config: track must be an object");
  check_keys(j, "track",
             {"t_end_us", "data_period_us", "ack_delay_us", "ack_timeout_us",
              "switch_window_us", "probe_period_us", "qosnull_delay_us",
              "refine_duration_us", "blocked_after_missed", "degrade_margin_db",
              "pt_dbm", "eta_db", "operating_pairs", "blockage"});
  tracking::TrackingConfig& p = t.protocol;
  if (j.contains("t_end_us")) p.t_end = as_int(j["t_end_us"], "track.t_end_us");
  if (j.contains("data_period_us")) {
    p.data_period = as_int(j["data_period_us"], "track.data_period_us");
  }
  if (j.contains("ack_delay_us")) {
    p.ack_delay = as_int(j["ack_delay_us"], "track.ack_delay_us");
  }
  if (j.contains("ack_timeout_us")) {
    p.ack_timeout = as_int(j["ack_timeout_us"], "track.ack_timeout_us");
  }
  if (j.contains("switch_window_us")) {
    p.switch_window = as_int(j["switch_window_us"], "track.switch_window_us");
  }
  if (j.contains("probe_period_us")) {
    p.probe_period = as_int(j["probe_period_us"], "track.probe_period_us");
  }
  if (j.contains("qosnull_delay_us")) {
    p.qosnull_delay = as_int(j["qosnull_delay_us"], "track.qosnull_delay_us");
  }
  if (j.contains("refine_duration_us")) {
    p.refine_duration = as_int(j["refine_duration_us"], "track.refine_duration_us");
  }
  if (j.contains("blocked_after_missed")) {
    p.blocked_after_missed =
        static_cast<int>(as_int(j["blocked_after_missed"], "track.blocked_after_missed"));
  }
  if (j.contains("degrade_margin_db")) {
    p.degrade_margin_db = as_double(j["degrade_margin_db"], "track.degrade_margin_db");
  }
  if (j.contains("pt_dbm")) p.pt_dbm = as_double(j["pt_dbm"], "track.pt_dbm");
  if (j.contains("eta_db")) p.eta_db = as_double(j["eta_db"], "track.eta_db");
  if (j.contains("operating_pairs")) {
    t.operating_pairs = as_int_list(j["operating_pairs"], "track.operating_pairs");
  }
  if (j.contains("blockage")) parse_blockage(j["blockage"], t.blockage);
}

void parse_sync(const njson& j, SyncDemoConfig& s) {
  if (!j.is_object()) fail("config: sync must be an object");
  check_keys(j, "sync",
             {"total_bytes", "weights", "rate_mbps", "cycles", "drop_cycle",
              "drop_link", "drop_factor", "drop_at_us", "tau1_us", "tau2_us"});
  if (j.contains("total_bytes")) {
    s.total_bytes = as_u64(j["total_bytes"], "sync.total_bytes");
  }
  if (j.contains("weights")) {
    s.weights = as_double_list(j["weights"], "sync.weights");
  }
  if (j.contains("rate_mbps")) {
    s.rate_mbps = as_double_list(j["rate_mbps"], "sync.rate_mbps");
  }
  if (j.contains("cycles")) {
    s.cycles = static_cast<int>(as_int(j["cycles"], "sync.cycles"));
  }
  if (j.contains("drop_cycle")) {
    s.drop_cycle = static_cast<int>(as_int(j["drop_cycle"], "sync.drop_cycle"));
  }
  if (j.contains("drop_link")) {
    s.drop_link = static_cast<int>(as_int(j["drop_link"], "sync.drop_link"));
  }
  if (j.contains("drop_factor")) {
    s.drop_factor = as_double(j["drop_factor"], "sync.drop_factor");
  }
  if (j.contains("drop_at_us")) {
    s.drop_at_us = as_int(j["drop_at_us"], "sync.drop_at_us");
  }
  if (j.contains("tau1_us")) s.timers.tau1 = as_int(j["tau1_us"], "sync.tau1_us");
  if (j.contains("tau2_us")) s.timers.tau2 = as_int(j["tau2_us"], "sync.tau2_us");
}

void validate(const ExperimentConfig& cfg) {
  const auto bad = [](const std::string& msg) { fail("config: " + msg); };
  if (!(cfg.radio.fc_ghz > 0)) bad("fc_ghz must be positive");
  if (!(cfg.radio.bandwidth_hz > 0)) bad("bandwidth_hz must be positive");
  if (!(cfg.radio.z >= 0.0 && cfg.radio.z < 1.0)) bad("z must lie in [0, 1)");
  if (!(cfg.r_los_m > 0)) bad("r_los_m must be positive");
  if (!(cfg.xi_t_deg > 0 && cfg.xi_t_deg <= 360)) bad("xi_t_deg must lie in (0, 360]");
  if (!(cfg.xi_r_deg > 0 && cfg.xi_r_deg <= 360)) bad("xi_r_deg must lie in (0, 360]");
  if (cfg.budget.n_max < 1) bad("n_max must be at least 1");
  if (channel::dbm_to_mw(cfg.budget.p_max_dbm) >
      channel::dbm_to_mw(cfg.budget.p_total_max_dbm) * (1 + 1e-12)) {
    bad("p_max_dbm must not exceed P_max_dbm");
  }
  if (cfg.theta_t_deg.size() != cfg.theta_r_deg.size()) {
    bad("theta_t_deg and theta_r_deg must have equal length");
  }
  for (std::size_t i = 0; i < cfg.theta_t_deg.size(); ++i) {
    const double t = cfg.theta_t_deg[i];
    const double r = cfg.theta_r_deg[i];
    if (!(t > 0 && t < 180) || !(r > 0 && r < 180) || !(t + r < 180)) {
      bad("offset angles must satisfy 0 < theta < 180 and theta_t + theta_r < 180");
    }
  }
  for (double p : cfg.p_block_list) {
    if (!(p >= 0.0 && p <= 1.0)) bad("p_block values must lie in [0, 1]");
  }
  for (int n : cfg.n_list) {
    if (n < 1) bad("n_list values must be at least 1");
  }
  for (double e : cfg.eta_db_list) {
    if (!std::isfinite(e)) bad("eta_db_list values must be finite");
  }
  if (cfg.trials < 1) bad("trials must be at least 1");
  if (cfg.policy != "ppa" && cfg.policy != "apa" && cfg.policy != "both") {
    bad("policy must be ppa, apa or both");
  }
  if (cfg.tx_sectors < 0 || cfg.rx_sectors < 0) bad("sector counts must be nonnegative");
  if (cfg.track.operating_pairs.empty()) bad("track.operating_pairs must not be empty");
  const auto& bl = cfg.track.blockage;
  if (!(bl.p >= 0.0 && bl.p <= 1.0)) bad("track.blockage.p must lie in [0, 1]");
  if (bl.epoch_us < 1) bad("track.blockage.epoch_us must be positive");
  if (!(bl.mean_on_us > 0) || !(bl.mean_off_us > 0)) {
    bad("track.blockage means must be positive");
  }
  const auto& sy = cfg.sync;
  if (sy.total_bytes < 1) bad("sync.total_bytes must be positive");
  if (sy.weights.empty()) bad("sync.weights must not be empty");
  if (sy.weights.size() != sy.rate_mbps.size()) {
    bad("sync.weights and sync.rate_mbps must have equal length");
  }
  for (double r : sy.rate_mbps) {
    if (!(r > 0)) bad("sync.rate_mbps values must be positive");
  }
  if (sy.cycles < 1) bad("sync.cycles must be at least 1");
  if (sy.drop_cycle < 0) bad("sync.drop_cycle must be nonnegative");
  if (sy.drop_cycle > 0) {
    if (sy.drop_link < 1 || sy.drop_link > static_cast<int>(sy.weights.size())) {
      bad("sync.drop_link is out of range");
    }
    if (!(sy.drop_factor > 0 && sy.drop_factor <= 1)) {
      bad("sync.drop_factor must lie in (0, 1]");
    }
    if (sy.drop_at_us < 0) bad("sync.drop_at_us must be nonnegative");
  }
  if (sy.timers.tau1 < 0 || sy.timers.tau2 < 0) bad("sync timers must be nonnegative");
}

void push_row(std::vector<ResultRow>& rows, const std::string& experiment,
              const std::string& x_name, const std::string& x_value,
              const std::string& metric, double value, const std::string& units) {
  rows.push_back(ResultRow{experiment, x_name, x_value, metric, value, units});
}

power::Policy named_policy(const std::string& name) {
  return name == "apa" ? power::Policy::Apa : power::Policy::Ppa;
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  for (int e = 0; e <= 30; ++e) cfg.eta_db_list.push_back(e);
  for (int i = 0; i <= 10; ++i) cfg.p_block_list.push_back(i / 10.0);
  cfg.track.protocol.eta_db = 10.0;  // keeps the offset paths operable
  cfg.track.blockage.mode = tracking::BlockageProcess::Mode::Scripted;
  cfg.track.blockage.intervals = {
      tracking::BlockageInterval{0, 5'000, 150'000, true, 0.0}};
  return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
  ExperimentConfig cfg = default_config();
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const std::exception& e) {
    fail(std::string("config: ") + e.what());
  }
  if (!j.is_object()) fail("config: top level must be an object");
  check_keys(j, "top level",
             {"fc_ghz", "bandwidth_hz", "n_max", "p_max_dbm", "P_max_dbm",
              "r_los_m", "xi_t_deg", "xi_r_deg", "a_los", "a_nlos", "n_los",
              "n_nlos", "z", "nf_db", "beta_per_m", "eta_db", "theta_t_deg",
              "theta_r_deg", "eta_db_list", "p_block_list", "n_list", "seed",
              "trials", "policy", "tx_sectors", "rx_sectors", "train_eta_db",
              "track", "sync"});
  if (j.contains("fc_ghz")) cfg.radio.fc_ghz = as_double(j["fc_ghz"], "fc_ghz");
  if (j.contains("bandwidth_hz")) {
    cfg.radio.bandwidth_hz = as_double(j["bandwidth_hz"], "bandwidth_hz");
  }
  if (j.contains("n_max")) {
    cfg.budget.n_max = static_cast<int>(as_int(j["n_max"], "n_max"));
  }
  if (j.contains("p_max_dbm")) {
    cfg.budget.p_max_dbm = as_double(j["p_max_dbm"], "p_max_dbm");
  }
  if (j.contains("P_max_dbm")) {
    cfg.budget.p_total_max_dbm = as_double(j["P_max_dbm"], "P_max_dbm");
  }
  if (j.contains("r_los_m")) cfg.r_los_m = as_double(j["r_los_m"], "r_los_m");
  if (j.contains("xi_t_deg")) cfg.xi_t_deg = as_double(j["xi_t_deg"], "xi_t_deg");
  if (j.contains("xi_r_deg")) cfg.xi_r_deg = as_double(j["xi_r_deg"], "xi_r_deg");
  if (j.contains("a_los")) cfg.radio.a_los = as_double(j["a_los"], "a_los");
  if (j.contains("a_nlos")) cfg.radio.a_nlos = as_double(j["a_nlos"], "a_nlos");
  if (j.contains("n_los")) cfg.radio.n_los = as_double(j["n_los"], "n_los");
  if (j.contains("n_nlos")) cfg.radio.n_nlos = as_double(j["n_nlos"], "n_nlos");
  if (j.contains("z")) cfg.radio.z = as_double(j["z"], "z");
  if (j.contains("nf_db")) cfg.radio.nf_db = as_double(j["nf_db"], "nf_db");
  if (j.contains("beta_per_m")) {
    cfg.radio.beta_per_m = as_double(j["beta_per_m"], "beta_per_m");
  }
  if (j.contains("eta_db")) cfg.budget.eta_db = as_double(j["eta_db"], "eta_db");
  if (j.contains("theta_t_deg")) {
    cfg.theta_t_deg = as_double_list(j["theta_t_deg"], "theta_t_deg");
  }
  if (j.contains("theta_r_deg")) {
    cfg.theta_r_deg = as_double_list(j["theta_r_deg"], "theta_r_deg");
  }
  if (j.contains("eta_db_list")) {
    cfg.eta_db_list = as_double_list(j["eta_db_list"], "eta_db_list");
  }
  if (j.contains("p_block_list")) {
    cfg.p_block_list = as_double_list(j["p_block_list"], "p_block_list");
  }
  if (j.contains("n_list")) cfg.n_list = as_int_list(j["n_list"], "n_list");
  if (j.contains("seed")) cfg.seed = as_u64(j["seed"], "seed");
  if (j.contains("trials")) {
    cfg.trials = static_cast<int>(as_int(j["trials"], "trials"));
  }
  if (j.contains("policy")) cfg.policy = as_string(j["policy"], "policy");
  if (j.contains("tx_sectors")) {
    cfg.tx_sectors = static_cast<int>(as_int(j["tx_sectors"], "tx_sectors"));
  }
  if (j.contains("rx_sectors")) {
    cfg.rx_sectors = static_cast<int>(as_int(j["rx_sectors"], "rx_sectors"));
  }
  if (j.contains("train_eta_db")) {
    cfg.train_eta_db = as_double(j["train_eta_db"], "train_eta_db");
  }
  if (j.contains("track")) parse_track(j["track"], cfg.track);
  if (j.contains("sync")) parse_sync(j["sync"], cfg.sync);
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string to_csv(std::span<const ResultRow> rows) {
  std::string out = "experiment,x_name,x_value,metric,value,units\n";
  for (const ResultRow& r : rows) {
    out += r.experiment;
    out += ',';
    out += r.x_name;
    out += ',';
    out += r.x_value;
    out += ',';
    out += r.metric;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += r.units;
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, std::span<const ResultRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_csv(rows);
}

double outage_analytic(std::span<const double> p_list) {
  double prod = 1.0;
  for (double p : p_list) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("outage: probability outside [0, 1]");
    }
    prod *= p;
  }
  return prod;
}

OutageEstimate outage_monte_carlo(double p, int n, int trials,
                                  std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("outage: probability outside [0, 1]");
  }
  if (n < 1 || trials < 1) {
    throw std::invalid_argument("outage: n and trials must be positive");
  }
  sim::RngStream rng(seed,
                     "outage/p=" + format_double(p) + "/n=" + std::to_string(n));
  long hits = 0;
  for (int t = 0; t < trials; ++t) {
    bool all_blocked = true;
    for (int k = 0; k < n; ++k) {
      if (!rng.bernoulli(p)) {
        all_blocked = false;
        break;
      }
    }
    if (all_blocked) ++hits;
  }
  OutageEstimate out;
  out.estimate = static_cast<double>(hits) / trials;
  out.half_width =
      1.96 * std::sqrt(out.estimate * (1.0 - out.estimate) / trials);
  return out;
}

channel::Scenario make_scenario(const ExperimentConfig& cfg) {
  channel::Scenario sc;
  sc.radio = cfg.radio;
  sc.xi_t_rad = channel::deg_to_rad(cfg.xi_t_deg);
  sc.xi_r_rad = channel::deg_to_rad(cfg.xi_r_deg);
  sc.max_tx_beams = cfg.budget.n_max;
  sc.max_rx_beams = cfg.budget.n_max;
  sc.tx_sectors = cfg.tx_sectors;
  sc.rx_sectors = cfg.rx_sectors;
  sc.paths.push_back(
      channel::PathGeometry{channel::PathKind::Los, 0.0, 0.0, cfg.r_los_m});
  for (std::size_t i = 0; i < cfg.theta_t_deg.size(); ++i) {
    sc.paths.push_back(channel::PathGeometry{
        channel::PathKind::Nlos, channel::deg_to_rad(cfg.theta_t_deg[i]),
        channel::deg_to_rad(cfg.theta_r_deg[i]), cfg.r_los_m});
  }
  return sc;
}

std::vector<channel::BeamPair> make_pairs(const ExperimentConfig& cfg) {
  const channel::Scenario sc = make_scenario(cfg);
  std::vector<channel::BeamPair> pairs;
  for (std::size_t i = 0; i < sc.paths.size(); ++i) {
    pairs.push_back(channel::BeamPair{static_cast<int>(i), sc.paths[i],
                                      sc.xi_t_rad, sc.xi_r_rad});
  }
  return pairs;
}

power::BeamwidthBounds make_bounds(const ExperimentConfig& cfg) {
  power::BeamwidthBounds b;
  b.xi_t_min_rad = channel::deg_to_rad(cfg.xi_t_deg);
  b.xi_t_max_rad = channel::kTwoPi;
  b.xi_r_min_rad = channel::deg_to_rad(cfg.xi_r_deg);
  b.xi_r_max_rad = channel::kTwoPi;
  return b;
}

ExperimentResult run_rate_map(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "rate_map";
  const channel::RadioConstants& k = cfg.radio;
  const double pt = cfg.budget.p_max_dbm;
  const channel::BeamPair los{
      0,
      channel::PathGeometry{channel::PathKind::Los, 0.0, 0.0, cfg.r_los_m},
      channel::deg_to_rad(cfg.xi_t_deg), channel::deg_to_rad(cfg.xi_r_deg)};
  for (double tt : cfg.theta_t_deg) {
    for (double tr : cfg.theta_r_deg) {
      if (!(tt + tr < 180.0)) continue;  // no reflection geometry there
      const channel::BeamPair nlos{
          1,
          channel::PathGeometry{channel::PathKind::Nlos,
                                channel::deg_to_rad(tt),
                                channel::deg_to_rad(tr), cfg.r_los_m},
          channel::deg_to_rad(cfg.xi_t_deg), channel::deg_to_rad(cfg.xi_r_deg)};
      const std::vector<channel::ActiveBeam> beams{{los, pt}, {nlos, pt}};
      const double s_los = channel::sinr_db(0, beams, k);
      const double s_nlos = channel::sinr_db(1, beams, k);
      const std::string x = format_double(tt) + ":" + format_double(tr);
      push_row(res.rows, res.name, "theta_t:theta_r", x, "los_sinr_db", s_los,
               "dB");
      push_row(res.rows, res.name, "theta_t:theta_r", x, "nlos_sinr_db", s_nlos,
               "dB");
      push_row(res.rows, res.name, "theta_t:theta_r", x, "los_rate_mbps",
               channel::link_rate_bps(k.bandwidth_hz, s_los) / 1e6, "Mbps");
      push_row(res.rows, res.name, "theta_t:theta_r", x, "nlos_rate_mbps",
               channel::link_rate_bps(k.bandwidth_hz, s_nlos) / 1e6, "Mbps");
    }
  }
  return res;
}

ExperimentResult run_rate_vs_eta(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "rate_vs_eta";
  const channel::RadioConstants& k = cfg.radio;
  const power::BeamwidthBounds bounds = make_bounds(cfg);
  const std::vector<channel::BeamPair> pairs = make_pairs(cfg);
  if (cfg.eta_db_list.empty()) fail("config: eta_db_list must not be empty");

  // Single-link baseline: the best pair alone, one beam at the per-beam cap.
  const double pt_single_mw = channel::dbm_to_mw(
      std::min(cfg.budget.p_max_dbm, cfg.budget.p_total_max_dbm));
  double best_single_snr = 0.0;
  for (const channel::BeamPair& p : pairs) {
    const double loss =
        channel::path_loss_db(k, p.geometry.kind, channel::path_distance_m(p.geometry));
    best_single_snr = std::max(
        best_single_snr, power::pencil_snr_linear(pt_single_mw, loss, bounds, k));
  }
  const double single_snr_db = channel::linear_to_db(best_single_snr);

  const std::span<const channel::BeamPair> offset_pairs =
      std::span<const channel::BeamPair>(pairs).subspan(1);
  const bool want_ppa = cfg.policy != "apa";
  const bool want_apa = cfg.policy != "ppa";
  bool any_feasible = false;
  for (double eta : cfg.eta_db_list) {
    power::PowerBudget b = cfg.budget;
    b.eta_db = eta;
    const std::string x = format_double(eta);
    const double single_rate =
        single_snr_db >= eta
            ? channel::link_rate_bps(k.bandwidth_hz,
                                     channel::linear_to_db(best_single_snr))
            : 0.0;
    push_row(res.rows, res.name, "eta_db", x, "rate_siso_mbps",
             single_rate / 1e6, "Mbps");
    any_feasible = any_feasible || single_rate > 0.0;
    if (want_ppa) {
      const power::Allocation a = power::ppa_allocate(pairs, b, bounds, k);
      push_row(res.rows, res.name, "eta_db", x, "rate_ppa_mbps",
               a.rate_bps / 1e6, "Mbps");
      push_row(res.rows, res.name, "eta_db", x, "n_ppa",
               static_cast<double>(a.links.size()), "count");
      any_feasible = any_feasible || a.feasible;
    }
    if (want_apa) {
      const power::Allocation a = power::apa_allocate(pairs, b, bounds, k);
      push_row(res.rows, res.name, "eta_db", x, "rate_apa_mbps",
               a.rate_bps / 1e6, "Mbps");
      push_row(res.rows, res.name, "eta_db", x, "n_apa",
               static_cast<double>(a.links.size()), "count");
      any_feasible = any_feasible || a.feasible;
    }
    if (!offset_pairs.empty()) {
      const power::Allocation a =
          named_policy(cfg.policy) == power::Policy::Apa
              ? power::apa_allocate(offset_pairs, b, bounds, k)
              : power::ppa_allocate(offset_pairs, b, bounds, k);
      push_row(res.rows, res.name, "eta_db", x, "rate_nlos_mbps",
               a.rate_bps / 1e6, "Mbps");
    }
  }
  if (!any_feasible) {
    throw InfeasibleError("rate_vs_eta: no link clears any swept threshold");
  }
  return res;
}

ExperimentResult run_outage(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "outage";
  if (cfg.trials < 1'000) fail("config: outage needs trials >= 1000");
  if (cfg.p_block_list.empty() || cfg.n_list.empty()) {
    fail("config: outage needs p_block_list and n_list");
  }
  for (double p : cfg.p_block_list) {
    const std::string x = format_double(p);
    for (int n : cfg.n_list) {
      const std::vector<double> ps(static_cast<std::size_t>(n), p);
      const double exact = outage_analytic(ps);
      const OutageEstimate mc = outage_monte_carlo(p, n, cfg.trials, cfg.seed);
      const std::string tag = "_n" + std::to_string(n);
      push_row(res.rows, res.name, "p_block", x, "analytic" + tag, exact,
               "probability");
      push_row(res.rows, res.name, "p_block", x, "mc" + tag, mc.estimate,
               "probability");
      push_row(res.rows, res.name, "p_block", x, "mc_halfwidth" + tag,
               mc.half_width, "probability");
    }
  }
  return res;
}

ExperimentResult run_training_demo(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "train";
  const channel::Scenario sc = make_scenario(cfg);
  const channel::RadioConstants& k = cfg.radio;
  const training::SectorGrid gt = training::make_grid(sc, training::Side::Mtx);
  const training::SectorGrid gr = training::make_grid(sc, training::Side::Mrx);
  const training::SweepPlan pt_plan =
      training::plan_sweep(gt.sectors, sc.max_tx_beams);
  const training::SweepPlan pr_plan =
      training::plan_sweep(gr.sectors, sc.max_rx_beams);
  const training::TrainingParams params{cfg.budget.p_max_dbm, cfg.train_eta_db};
  const training::CandidateSet tx =
      training::run_training(sc, training::Side::Mtx, params);
  const training::CandidateSet rx =
      training::run_training(sc, training::Side::Mrx, params);
  const training::PairSet pairset =
      training::beam_combining(sc, tx, rx, cfg.train_eta_db, cfg.budget.p_max_dbm);
  if (pairset.pairs.empty()) {
    throw InfeasibleError("train: no beam pair clears the training threshold");
  }
  const std::vector<channel::BeamPair> bpairs =
      training::to_beam_pairs(sc, pairset);
  const training::SelectionResult sel = training::select_combination(
      bpairs, cfg.budget, make_bounds(cfg), k, named_policy(cfg.policy));
  if (!sel.allocation.feasible) {
    throw InfeasibleError("train: no trained subset clears the threshold");
  }

  sim::SimTime t = 0;
  const auto scan_lines = [&res, &t](const training::SweepPlan& plan,
                                     const char* actor) {
    for (std::size_t r = 0; r < plan.layout.size(); ++r) {
      std::string sectors;
      for (std::size_t i = 0; i < plan.layout[r].size(); ++i) {
        if (i) sectors += '|';
        sectors += std::to_string(plan.layout[r][i]);
      }
      res.trace.push_back(sim::TraceEntry{
          t++, actor, "SCAN",
          "round=" + std::to_string(r + 1) + ",sectors=" + sectors});
    }
  };
  scan_lines(pt_plan, "MTX");
  scan_lines(pr_plan, "MRX");
  for (const training::PairEntry& p : pairset.pairs) {
    res.trace.push_back(sim::TraceEntry{
        t++, "MTX", "PAIR",
        "tx=" + std::to_string(p.tx_beam) + ",rx=" + std::to_string(p.rx_beam) +
            ",snr_db=" + format_double(p.snr_db)});
  }
  res.trace.push_back(sim::TraceEntry{
      t++, "MTX", "SELECT",
      "links=" + std::to_string(sel.allocation.links.size()) +
          ",rate_mbps=" + format_double(sel.allocation.rate_bps / 1e6)});

  const std::string xn = "run";
  const std::string xv = "0";
  push_row(res.rows, res.name, xn, xv, "sectors_tx", gt.sectors, "count");
  push_row(res.rows, res.name, xn, xv, "sectors_rx", gr.sectors, "count");
  push_row(res.rows, res.name, xn, xv, "beams_per_round_tx",
           pt_plan.beams_per_round, "count");
  push_row(res.rows, res.name, xn, xv, "beams_per_round_rx",
           pr_plan.beams_per_round, "count");
  push_row(res.rows, res.name, xn, xv, "rounds_multibeam_tx", pt_plan.rounds,
           "count");
  push_row(res.rows, res.name, xn, xv, "rounds_singlebeam_tx", gt.sectors,
           "count");
  push_row(res.rows, res.name, xn, xv, "rounds_multibeam_rx", pr_plan.rounds,
           "count");
  push_row(res.rows, res.name, xn, xv, "rounds_singlebeam_rx", gr.sectors,
           "count");
  push_row(res.rows, res.name, xn, xv, "candidates_tx",
           static_cast<double>(tx.entries.size()), "count");
  push_row(res.rows, res.name, xn, xv, "candidates_rx",
           static_cast<double>(rx.entries.size()), "count");
  push_row(res.rows, res.name, xn, xv, "tests_performed",
           static_cast<double>(pairset.tests_performed), "count");
  push_row(res.rows, res.name, xn, xv, "tests_exhaustive",
           static_cast<double>(tx.entries.size() * rx.entries.size()), "count");
  push_row(res.rows, res.name, xn, xv, "pairs_found",
           static_cast<double>(pairset.pairs.size()), "count");
  push_row(res.rows, res.name, xn, xv, "links_selected",
           static_cast<double>(sel.allocation.links.size()), "count");
  push_row(res.rows, res.name, xn, xv, "rate_mbps",
           sel.allocation.rate_bps / 1e6, "Mbps");
  return res;
}

ExperimentResult run_tracking_scenario(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "track";
  const std::vector<channel::BeamPair> all = make_pairs(cfg);
  std::vector<channel::BeamPair> ordered;
  std::vector<bool> used(all.size(), false);
  for (int id : cfg.track.operating_pairs) {
    const auto it = std::find_if(
        all.begin(), all.end(),
        [id](const channel::BeamPair& p) { return p.id == id; });
    if (it == all.end()) fail("config: track.operating_pairs names unknown pair");
    const std::size_t idx = static_cast<std::size_t>(it - all.begin());
    if (used[idx]) fail("config: track.operating_pairs repeats a pair");
    used[idx] = true;
    ordered.push_back(*it);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!used[i]) ordered.push_back(all[i]);
  }
  tracking::TrackingSim tsim(make_scenario(cfg), ordered,
                             static_cast<int>(cfg.track.operating_pairs.size()),
                             cfg.track.protocol, cfg.track.blockage, cfg.seed);
  res.trace = tsim.run();
  for (const tracking::LinkState& l : tsim.links()) {
    const std::string xv = std::to_string(l.link + 1);
    push_row(res.rows, res.name, "link", xv, "data_frames",
             static_cast<double>(l.data_frames), "count");
    push_row(res.rows, res.name, "link", xv, "ack_frames",
             static_cast<double>(l.ack_frames), "count");
    push_row(res.rows, res.name, "link", xv, "probe_frames",
             static_cast<double>(l.probe_frames), "count");
    push_row(res.rows, res.name, "link", xv, "final_pair",
             ordered[static_cast<std::size_t>(l.pair_index)].id, "id");
    push_row(res.rows, res.name, "link", xv, "final_status",
             static_cast<double>(static_cast<int>(l.status)), "code");
  }
  push_row(res.rows, res.name, "run", "0", "procedures_started",
           tsim.procedures_started(), "count");
  push_row(res.rows, res.name, "run", "0", "max_concurrent_procedures",
           tsim.max_concurrent_procedures(), "count");
  push_row(res.rows, res.name, "run", "0", "trace_events",
           static_cast<double>(res.trace.size()), "count");
  return res;
}

ExperimentResult run_sync_demo(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "sync";
  const SyncDemoConfig& sy = cfg.sync;
  const std::size_t n = sy.weights.size();
  sim::Simulator sim;
  sync::SplitPlan plan = sync::split_stream(sy.total_bytes, sy.weights);
  std::vector<double> current(n);
  for (std::size_t i = 0; i < n; ++i) current[i] = sy.rate_mbps[i] * 1e6;
  for (int cycle = 1; cycle <= sy.cycles; ++cycle) {
    const sim::SimTime t0 = sim.now();
    std::vector<sync::LinkRate> rates(n);
    for (std::size_t i = 0; i < n; ++i) rates[i].rate_bps = current[i];
    if (sy.drop_cycle == cycle) {
      const std::size_t li = static_cast<std::size_t>(sy.drop_link - 1);
      const double dropped = current[li] * sy.drop_factor;
      rates[li].steps.push_back(sync::RateStep{t0 + sy.drop_at_us, dropped});
      current[li] = dropped;  // the impairment persists into later cycles
    }
    const sync::CycleOutcome out = sync::run_cycle(plan, rates, sy.timers, sim);
    const std::string xv = std::to_string(cycle);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string tag = "_link" + std::to_string(i + 1);
      push_row(res.rows, res.name, "cycle", xv, "share" + tag + "_bytes",
               static_cast<double>(plan.shares[i]), "bytes");
      push_row(res.rows, res.name, "cycle", xv, "finish" + tag + "_us",
               static_cast<double>(out.finish_at[i]), "us");
      push_row(res.rows, res.name, "cycle", xv, "remainder" + tag + "_bytes",
               static_cast<double>(out.remainder_bytes[i]), "bytes");
    }
    push_row(res.rows, res.name, "cycle", xv, "overrun", out.overrun ? 1 : 0,
             "flag");
    push_row(res.rows, res.name, "cycle", xv, "tau1_us",
             static_cast<double>(out.tau1), "us");
    push_row(res.rows, res.name, "cycle", xv, "tau2_us",
             static_cast<double>(out.tau2), "us");
    if (out.overrun) {
      plan = sync::rebalance(plan, out);
      std::string w;
      for (std::size_t i = 0; i < n; ++i) {
        if (i) w += ':';
        w += format_double(plan.weights[i]);
      }
      sim.emit("MTX", "REBALANCE", "weights=" + w);
      for (std::size_t i = 0; i < n; ++i) {
        push_row(res.rows, res.name, "cycle", xv,
                 "weight_link" + std::to_string(i + 1), plan.weights[i],
                 "ratio");
      }
    }
  }
  res.trace = sim.trace();
  return res;
}

ValidationReport run_validation(const ExperimentConfig& cfg, int instances) {
  if (instances < 1) fail("config: validation needs at least one instance");
  ValidationReport rep;
  rep.instances = instances;
  const channel::RadioConstants& k = cfg.radio;
  const power::BeamwidthBounds bounds = make_bounds(cfg);
  sim::RngStream rng(cfg.seed, "validate");
  for (int t = 0; t < instances; ++t) {
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    const double r_los = rng.uniform(1.0, 30.0);
    std::vector<channel::BeamPair> pairs;
    for (int i = 0; i < n; ++i) {
      channel::PathGeometry g;
      g.r_los_m = r_los;
      if (i == 0 && rng.bernoulli(0.5)) {
        g.kind = channel::PathKind::Los;
      } else {
        g.kind = channel::PathKind::Nlos;
        g.theta_t_rad = channel::deg_to_rad(rng.uniform(5.0, 85.0));
        g.theta_r_rad = channel::deg_to_rad(rng.uniform(5.0, 85.0));
      }
      pairs.push_back(channel::BeamPair{i, g, bounds.xi_t_min_rad,
                                        bounds.xi_r_min_rad});
    }
    power::PowerBudget b;
    b.p_max_dbm = rng.uniform(0.0, 6.0);
    b.p_total_max_dbm = b.p_max_dbm + rng.uniform(0.0, 9.0);
    b.n_max = static_cast<int>(rng.uniform_int(1, 8));
    b.eta_db = rng.uniform(-5.0, 25.0);
    const power::Allocation oracle = power::oracle_allocate(pairs, b, bounds, k);
    const power::PolicyComparison cmp =
        power::compare_policies(pairs, b, bounds, k);
    const double best =
        std::max(cmp.ppa.rate_bps, cmp.apa.rate_bps);
    if (oracle.rate_bps < best * (1.0 - 1e-9)) {
      ++rep.oracle_below_policies;
      const double shortfall =
          10.0 * std::log10(best / std::max(oracle.rate_bps, 1e-300));
      rep.max_shortfall_db = std::max(rep.max_shortfall_db, shortfall);
    }
    if (cmp.equal_split_regime) {
      ++rep.regime_cases;
      if (!cmp.identical) ++rep.regime_mismatches;
    }
  }
  const std::string xn = "run";
  const std::string xv = "0";
  push_row(rep.rows, "validate", xn, xv, "instances", rep.instances, "count");
  push_row(rep.rows, "validate", xn, xv, "oracle_below_policies",
           rep.oracle_below_policies, "count");
  push_row(rep.rows, "validate", xn, xv, "regime_cases", rep.regime_cases,
           "count");
  push_row(rep.rows, "validate", xn, xv, "regime_mismatches",
           rep.regime_mismatches, "count");
  push_row(rep.rows, "validate", xn, xv, "max_shortfall_db",
           rep.max_shortfall_db, "dB");
  return rep;
}

}  // namespace beamspace::harness
