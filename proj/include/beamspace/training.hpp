#pragma once

#include <functional>
#include <span>
#include <vector>

#include "beamspace/channel.hpp"
#include "beamspace/power.hpp"

namespace beamspace::training {

enum class Side { Mtx, Mrx };

// Scan sectors indexed over the offset magnitude from boresight. Sector s
// is centered at s * span_rad, so a boundary angle resolves to the
// lower-indexed sector.
struct SectorGrid {
  Side side = Side::Mtx;
  int sectors = 1;        // M
  double span_rad = 0.0;  // per-sector width = beamwidth on that side
};

SectorGrid make_grid(const channel::Scenario& sc, Side side);
int sector_index(const SectorGrid& grid, double angle_rad);

// Multi-beam sweep schedule: n = min(M, cap) concurrent beams finish M
// sectors in ceil(M / n) rounds; round r scans sectors {r, r + rounds, ...}
// so beams within a round stay maximally separated.
struct SweepPlan {
  int sectors = 0;
  int beams_per_round = 0;
  int rounds = 0;
  std::vector<std::vector<int>> layout;  // layout[r] = sectors scanned in round r
};

SweepPlan plan_sweep(int sectors, int max_concurrent);

struct Candidate {
  int beam_id = 0;  // equals the scanned sector index
  double snr_db = 0.0;
  int path_index = -1;  // strongest path seen by this sector
};

// Ordered by decreasing SNR; equal SNR resolves to the lower beam id.
struct CandidateSet {
  Side side = Side::Mtx;
  std::vector<Candidate> entries;
};

struct TrainingParams {
  double pt_dbm = 3.0;
  double eta_db = -10.0;  // admission threshold on the measured SNR
};

// One-sided sweep: the probed side beamforms per sector while the peer
// listens quasi-omnidirectionally (unit gain).
CandidateSet run_training(const channel::Scenario& sc, Side side,
                          const TrainingParams& params);

struct PairEntry {
  int tx_beam = 0;
  int rx_beam = 0;
  double snr_db = 0.0;
  int path_index = -1;
};

struct PairSet {
  std::vector<PairEntry> pairs;  // ordered by decreasing SNR
  double eta_db = 0.0;
  long tests_performed = 0;
};

using PairMeasure = std::function<double(int tx_beam, int rx_beam)>;

// Greedy pairing: walk transmit candidates in quality order, give each the
// best still-unpaired receive beam, and keep the pair only when the best
// measured SNR clears eta.
PairSet beam_combining(const CandidateSet& tx, const CandidateSet& rx,
                       double eta_db, const PairMeasure& measure);

// Scenario-driven variant: a (tx, rx) test measures the strongest path
// whose offsets fall into both scanned sectors, with full directional
// gains on both ends.
PairSet beam_combining(const channel::Scenario& sc, const CandidateSet& tx,
                       const CandidateSet& rx, double eta_db, double pt_dbm);

// Pairwise tests consumed by the greedy search when every combination
// passes eta. The count stays quadratic in the smaller side instead of
// n_tx * n_rx for an exhaustive scan.
long combining_test_count(long n_tx, long n_rx);

// Materializes trained pairs into beam pairs carrying path geometry.
std::vector<channel::BeamPair> to_beam_pairs(const channel::Scenario& sc,
                                             const PairSet& set);

struct SelectionResult {
  std::vector<int> chosen;  // indices into the input span
  power::Allocation allocation;
};

// Best subset of trained pairs under the active allocation policy;
// enumerates sizes min(n, n_max)..1 and prefers larger subsets on rate
// ties. Instances above enumeration_cap pairs are rejected.
SelectionResult select_combination(std::span<const channel::BeamPair> pairs,
                                   const power::PowerBudget& budget,
                                   const power::BeamwidthBounds& bounds,
                                   const channel::RadioConstants& k,
                                   power::Policy policy,
                                   int enumeration_cap = 15);

}  // namespace beamspace::training
