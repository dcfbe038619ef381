#include "beamspace/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace beamspace::training {

namespace {

using channel::PathGeometry;
using channel::Scenario;

double side_angle(const PathGeometry& g, Side side) {
  return std::fabs(side == Side::Mtx ? g.theta_t_rad : g.theta_r_rad);
}

}  // namespace

SectorGrid make_grid(const Scenario& sc, Side side) {
  SectorGrid grid;
  grid.side = side;
  grid.span_rad = side == Side::Mtx ? sc.xi_t_rad : sc.xi_r_rad;
  if (!(grid.span_rad > 0.0)) {
    throw std::invalid_argument("make_grid: beamwidth must be positive");
  }
  const int configured = side == Side::Mtx ? sc.tx_sectors : sc.rx_sectors;
  if (configured > 0) {
    grid.sectors = configured;
    return grid;
  }
  int max_index = 0;
  for (const PathGeometry& g : sc.paths) {
    SectorGrid probe = grid;
    probe.sectors = std::numeric_limits<int>::max();
    max_index = std::max(max_index, sector_index(probe, side_angle(g, side)));
  }
  grid.sectors = max_index + 1;
  return grid;
}

int sector_index(const SectorGrid& grid, double angle_rad) {
  const double a = std::fabs(angle_rad);
  // Sector s covers (s*span - span/2, s*span + span/2]; the shared boundary
  // rounds down to the lower-indexed sector.
  int idx = static_cast<int>(std::ceil(a / grid.span_rad - 0.5));
  if (idx < 0) idx = 0;
  return idx;
}

SweepPlan plan_sweep(int sectors, int max_concurrent) {
  if (sectors < 1 || max_concurrent < 1) {
    throw std::invalid_argument("plan_sweep: sectors and beam cap must be >= 1");
  }
  SweepPlan plan;
  plan.sectors = sectors;
  plan.beams_per_round = std::min(sectors, max_concurrent);
  plan.rounds = (sectors + plan.beams_per_round - 1) / plan.beams_per_round;
  plan.layout.resize(plan.rounds);
  for (int r = 0; r < plan.rounds; ++r) {
    for (int s = r; s < sectors; s += plan.rounds) {
      plan.layout[r].push_back(s);
    }
  }
  return plan;
}

CandidateSet run_training(const Scenario& sc, Side side,
                          const TrainingParams& params) {
  const SectorGrid grid = make_grid(sc, side);
  const double noise_dbm = channel::noise_power_dbm(sc.radio);
  const double gain_db =
      channel::linear_to_db(channel::main_lobe_gain(grid.span_rad, sc.radio.z));

  struct SectorBest {
    double snr_db = -std::numeric_limits<double>::infinity();
    int path_index = -1;
  };
  std::map<int, SectorBest> by_sector;
  for (std::size_t p = 0; p < sc.paths.size(); ++p) {
    const PathGeometry& g = sc.paths[p];
    const int s = sector_index(grid, side_angle(g, side));
    if (s >= grid.sectors) continue;  // outside the scanned region
    const double loss =
        channel::path_loss_db(sc.radio, g.kind, channel::path_distance_m(g));
    // The probed side beamforms; the peer listens quasi-omni (0 dB).
    const double snr = params.pt_dbm + gain_db - loss - noise_dbm;
    SectorBest& best = by_sector[s];
    if (snr > best.snr_db) best = SectorBest{snr, static_cast<int>(p)};
  }

  CandidateSet out;
  out.side = side;
  for (const auto& [s, best] : by_sector) {
    if (best.snr_db < params.eta_db) continue;
    out.entries.push_back(Candidate{s, best.snr_db, best.path_index});
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.snr_db != b.snr_db) return a.snr_db > b.snr_db;
                     return a.beam_id < b.beam_id;
                   });
  return out;
}

PairSet beam_combining(const CandidateSet& tx, const CandidateSet& rx,
                       double eta_db, const PairMeasure& measure) {
  if (!measure) throw std::invalid_argument("beam_combining: missing measure");
  PairSet out;
  out.eta_db = eta_db;
  std::vector<Candidate> available(rx.entries);
  for (const Candidate& t : tx.entries) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_at = available.size();
    for (std::size_t i = 0; i < available.size(); ++i) {
      const double snr = measure(t.beam_id, available[i].beam_id);
      ++out.tests_performed;
      if (snr > best) {
        best = snr;
        best_at = i;
      }
    }
    if (best_at == available.size() || best < eta_db) continue;
    out.pairs.push_back(
        PairEntry{t.beam_id, available[best_at].beam_id, best, -1});
    available.erase(available.begin() + static_cast<std::ptrdiff_t>(best_at));
  }
  std::stable_sort(out.pairs.begin(), out.pairs.end(),
                   [](const PairEntry& a, const PairEntry& b) {
                     if (a.snr_db != b.snr_db) return a.snr_db > b.snr_db;
                     return a.tx_beam < b.tx_beam;
                   });
  return out;
}

PairSet beam_combining(const Scenario& sc, const CandidateSet& tx,
                       const CandidateSet& rx, double eta_db, double pt_dbm) {
  const SectorGrid tgrid = make_grid(sc, Side::Mtx);
  const SectorGrid rgrid = make_grid(sc, Side::Mrx);
  const double noise_dbm = channel::noise_power_dbm(sc.radio);
  const double gt_db =
      channel::linear_to_db(channel::main_lobe_gain(sc.xi_t_rad, sc.radio.z));
  const double gr_db =
      channel::linear_to_db(channel::main_lobe_gain(sc.xi_r_rad, sc.radio.z));

  struct Cell {
    double snr_db = -std::numeric_limits<double>::infinity();
    int path_index = -1;
  };
  std::map<std::pair<int, int>, Cell> cells;
  for (std::size_t p = 0; p < sc.paths.size(); ++p) {
    const PathGeometry& g = sc.paths[p];
    const auto key = std::make_pair(sector_index(tgrid, side_angle(g, Side::Mtx)),
                                    sector_index(rgrid, side_angle(g, Side::Mrx)));
    const double loss =
        channel::path_loss_db(sc.radio, g.kind, channel::path_distance_m(g));
    const double snr = pt_dbm + gt_db + gr_db - loss - noise_dbm;
    Cell& cell = cells[key];
    if (snr > cell.snr_db) cell = Cell{snr, static_cast<int>(p)};
  }

  PairSet out = beam_combining(
      tx, rx, eta_db, [&cells](int tb, int rb) {
        const auto it = cells.find(std::make_pair(tb, rb));
        return it == cells.end()
                   ? -std::numeric_limits<double>::infinity()
                   : it->second.snr_db;
      });
  for (PairEntry& pair : out.pairs) {
    pair.path_index = cells.at(std::make_pair(pair.tx_beam, pair.rx_beam)).path_index;
  }
  return out;
}

long combining_test_count(long n_tx, long n_rx) {
  if (n_tx < 0 || n_rx < 0) {
    throw std::invalid_argument("combining_test_count: negative beam count");
  }
  if (n_tx >= n_rx) return n_rx * (n_rx + 1) / 2;
  return n_tx * n_rx - n_tx * (n_tx - 1) / 2;
}

std::vector<channel::BeamPair> to_beam_pairs(const Scenario& sc,
                                             const PairSet& set) {
  std::vector<channel::BeamPair> out;
  out.reserve(set.pairs.size());
  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    const PairEntry& e = set.pairs[i];
    if (e.path_index < 0 ||
        e.path_index >= static_cast<int>(sc.paths.size())) {
      throw std::out_of_range("to_beam_pairs: pair lacks a path reference");
    }
    channel::BeamPair bp;
    bp.id = static_cast<int>(i);
    bp.geometry = sc.paths[static_cast<std::size_t>(e.path_index)];
    bp.xi_t_rad = sc.xi_t_rad;
    bp.xi_r_rad = sc.xi_r_rad;
    out.push_back(bp);
  }
  return out;
}

SelectionResult select_combination(std::span<const channel::BeamPair> pairs,
                                   const power::PowerBudget& budget,
                                   const power::BeamwidthBounds& bounds,
                                   const channel::RadioConstants& k,
                                   power::Policy policy, int enumeration_cap) {
  if (policy == power::Policy::Oracle) {
    throw std::invalid_argument("select_combination: pick a closed-form policy");
  }
  const int n = static_cast<int>(pairs.size());
  if (n > enumeration_cap) {
    throw std::invalid_argument(
        "select_combination: pair set above the enumeration cap");
  }

  SelectionResult best;
  best.allocation.policy = policy;
  double best_rate = 0.0;

  std::vector<channel::BeamPair> subset_pairs;
  const int kmax = std::min(n, budget.n_max);
  for (int size = kmax; size >= 1; --size) {
    std::vector<int> subset(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) subset[static_cast<std::size_t>(i)] = i;
    while (true) {
      subset_pairs.clear();
      for (int idx : subset) subset_pairs.push_back(pairs[static_cast<std::size_t>(idx)]);
      power::Allocation alloc =
          policy == power::Policy::Ppa
              ? power::ppa_allocate(subset_pairs, budget, bounds, k)
              : power::apa_allocate(subset_pairs, budget, bounds, k);
      // Larger subsets are visited first, so a strict improvement rule
      // keeps the largest set among rate ties.
      if (alloc.feasible && alloc.rate_bps > best_rate) {
        best_rate = alloc.rate_bps;
        best.chosen = subset;
        best.allocation = std::move(alloc);
      }

      int pos = size - 1;
      while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == n - size + pos) --pos;
      if (pos < 0) break;
      ++subset[static_cast<std::size_t>(pos)];
      for (int i = pos + 1; i < size; ++i) {
        subset[static_cast<std::size_t>(i)] = subset[static_cast<std::size_t>(i - 1)] + 1;
      }
    }
  }
  return best;
}

}  // namespace beamspace::training
