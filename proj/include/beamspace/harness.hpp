#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "beamspace/channel.hpp"
#include "beamspace/power.hpp"
#include "beamspace/simkernel.hpp"
#include "beamspace/sync.hpp"
#include "beamspace/tracking.hpp"
#include "beamspace/training.hpp"

namespace beamspace::harness {

// Maps to process exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Maps to process exit code 3: the scenario admits no link at the threshold.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyncDemoConfig {
  std::uint64_t total_bytes = 3'000;
  std::vector<double> weights = {2.0, 1.0};
  std::vector<double> rate_mbps = {16.0, 8.0};
  int cycles = 5;
  int drop_cycle = 3;  // 1-based cycle where the rate drop hits (0 = never)
  int drop_link = 1;   // 1-based link index
  double drop_factor = 0.25;
  sim::SimTime drop_at_us = 500;  // offset into the cycle; drop persists
  sync::SyncConfig timers;        // tau1/tau2, 0 = auto
};

struct TrackDemoConfig {
  tracking::TrackingConfig protocol;
  tracking::BlockageProcess blockage;
  std::vector<int> operating_pairs = {0, 2, 1};  // pair ids, in link order
};

struct ExperimentConfig {
  channel::RadioConstants radio;  // Table-style constants
  power::PowerBudget budget;      // p_max_dbm, P_max_dbm, n_max, eta_db
  double r_los_m = 4.0;
  double xi_t_deg = 10.0;
  double xi_r_deg = 15.0;
  std::vector<double> theta_t_deg = {10, 20, 30, 40, 50, 60, 70, 80};
  std::vector<double> theta_r_deg = {20, 30, 40, 40, 60, 70, 80, 80};
  std::vector<double> eta_db_list;     // rate-vs-eta sweep; default 0..30
  std::vector<double> p_block_list;    // outage sweep; default 0, 0.1, .., 1
  std::vector<int> n_list = {1, 2, 4, 8};
  std::uint64_t seed = 1;
  int trials = 100'000;
  std::string policy = "both";  // ppa | apa | both
  int tx_sectors = 0;           // 0 = derive from the path angles
  int rx_sectors = 0;
  double train_eta_db = -10.0;
  TrackDemoConfig track;
  SyncDemoConfig sync;
};

ExperimentConfig default_config();
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// One point of one experiment curve. x_value is preformatted so composite
// sweep keys like "10:20" stay representable.
struct ResultRow {
  std::string experiment;
  std::string x_name;
  std::string x_value;
  std::string metric;
  double value = 0.0;
  std::string units;
};

// Fixed 10-significant-digit decimal form, locale independent, so emitted
// files are byte-stable across runs.
std::string format_double(double v);
std::string to_csv(std::span<const ResultRow> rows);
void write_csv(const std::string& path, std::span<const ResultRow> rows);

double outage_analytic(std::span<const double> p_list);

struct OutageEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // 95% normal approximation
};

OutageEstimate outage_monte_carlo(double p, int n, int trials,
                                  std::uint64_t seed);

struct ExperimentResult {
  std::string name;
  std::vector<ResultRow> rows;
  sim::EventTrace trace;
};

// Scenario assembly shared by the runners: pair id 0 is the boresight path,
// ids 1..k the offset paths zipped from the angle lists.
channel::Scenario make_scenario(const ExperimentConfig& cfg);
std::vector<channel::BeamPair> make_pairs(const ExperimentConfig& cfg);
power::BeamwidthBounds make_bounds(const ExperimentConfig& cfg);

ExperimentResult run_rate_map(const ExperimentConfig& cfg);
ExperimentResult run_rate_vs_eta(const ExperimentConfig& cfg);
ExperimentResult run_outage(const ExperimentConfig& cfg);
ExperimentResult run_training_demo(const ExperimentConfig& cfg);
ExperimentResult run_tracking_scenario(const ExperimentConfig& cfg);
ExperimentResult run_sync_demo(const ExperimentConfig& cfg);

struct ValidationReport {
  int instances = 0;
  int oracle_below_policies = 0;  // grid slack violations (expected 0)
  int regime_cases = 0;           // instances in the equal-split regime
  int regime_mismatches = 0;      // identity violations there (expected 0)
  double max_shortfall_db = 0.0;  // worst oracle deficit vs the policies
  std::vector<ResultRow> rows;
};

// Randomized cross-check of the closed-form allocators against the
// exhaustive search; `instances` draws, pair counts 1..max_pairs.
ValidationReport run_validation(const ExperimentConfig& cfg, int instances);

}  // namespace beamspace::harness
