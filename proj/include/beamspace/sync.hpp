#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "beamspace/simkernel.hpp"

namespace beamspace::sync {

struct SyncConfig {
  sim::SimTime tau1 = 0;  // cycle planning bound; 0 = longest planned share
  sim::SimTime tau2 = 0;  // straggler window from the first finish; 0 = tau1/10
};

// Byte shares per link for one transmission cycle. Shares are integral and
// conserve the total exactly (largest-remainder rounding, ties to the lower
// index).
struct SplitPlan {
  std::uint64_t total_bytes = 0;
  std::vector<std::uint64_t> shares;
  std::vector<double> weights;  // the ratio basis the shares were cut from
};

SplitPlan split_stream(std::uint64_t total_bytes,
                       std::span<const double> weights);

// Piecewise-constant service rate: rate_bps applies from the cycle start,
// each step replaces it from `at` (absolute sim time) onward.
struct RateStep {
  sim::SimTime at = 0;
  double rate_bps = 0.0;
};

struct LinkRate {
  double rate_bps = 0.0;
  std::vector<RateStep> steps;
};

struct CycleOutcome {
  sim::SimTime start_at = 0;
  sim::SimTime end_at = 0;
  std::vector<sim::SimTime> finish_at;         // -1 when cut off unfinished
  std::vector<std::uint64_t> remainder_bytes;  // 0 for finished links
  bool overrun = false;
  sim::SimTime tau1 = 0;
  sim::SimTime tau2 = 0;
  sim::SimTime timer2_start = -1;    // first finish
  sim::SimTime timer2_deadline = -1;
};

// Runs one cycle on the shared clock: every link streams its share, the
// first finisher arms the straggler timer, and expiry cuts the cycle short,
// leaving remainders. Trace kinds: CYCLE_START, LINK_DONE, TIMER2_EXPIRE.
CycleOutcome run_cycle(const SplitPlan& plan, std::span<const LinkRate> rates,
                       const SyncConfig& cfg, sim::Simulator& sim);

// Next-cycle weights: an overrunning link's weight drops from its previous
// share D to D - 2 * remainder, floored at floor_fraction * D; finished
// links keep their share as weight.
SplitPlan rebalance(const SplitPlan& prev, const CycleOutcome& outcome,
                    double floor_fraction = 0.01);

}  // namespace beamspace::sync
