#pragma once

#include <span>
#include <vector>

#include "beamspace/channel.hpp"

namespace beamspace::power {

enum class Policy { Ppa, Apa, Oracle };

struct PowerBudget {
  double p_max_dbm = 3.0;        // per-beam cap
  double p_total_max_dbm = 9.0;  // array-wide cap
  int n_max = 10;                // concurrent-link cap
  double eta_db = 16.0;          // minimum acceptable SNR
};

struct BeamwidthBounds {
  double xi_t_min_rad = 0.0;
  double xi_t_max_rad = 0.0;
  double xi_r_min_rad = 0.0;
  double xi_r_max_rad = 0.0;
};

struct AllocatedLink {
  int pair_id = 0;
  double pt_mw = 0.0;
  double snr_db = 0.0;
  double rate_bps = 0.0;
};

struct Allocation {
  Policy policy = Policy::Ppa;
  std::vector<AllocatedLink> links;  // ordered by decreasing link quality
  double rate_bps = 0.0;
  bool feasible = false;  // false <=> no link could be served
};

// Per-link optimum: full per-beam power at the narrowest beamwidths.
struct LinkOptimum {
  double pt_mw = 0.0;
  double xi_t_rad = 0.0;
  double xi_r_rad = 0.0;
  double snr_db = 0.0;
  double rate_bps = 0.0;
};

// Linear SNR of a pencil-beam link: pt * (2 pi / xi_t_min)(2 pi / xi_r_min)
// / (pathloss * noise). Side lobes vanish in the narrow-beam limit, so gains
// reduce to 2 pi / xi.
double pencil_snr_linear(double pt_mw, double loss_db,
                         const BeamwidthBounds& bounds,
                         const channel::RadioConstants& k);

LinkOptimum link_optimum(const channel::BeamPair& pair,
                         const PowerBudget& budget,
                         const BeamwidthBounds& bounds,
                         const channel::RadioConstants& k);

// Priority policy: per-beam cap to the floor(P/p) best links, the remainder
// to the next one when it still clears eta.
Allocation ppa_allocate(std::span<const channel::BeamPair> pairs,
                        const PowerBudget& budget,
                        const BeamwidthBounds& bounds,
                        const channel::RadioConstants& k);

// Averaging policy: equal split over the best links, dropping the worst
// link until every survivor clears eta.
Allocation apa_allocate(std::span<const channel::BeamPair> pairs,
                        const PowerBudget& budget,
                        const BeamwidthBounds& bounds,
                        const channel::RadioConstants& k);

struct OracleOptions {
  int grid_steps = 64;  // per-beam power grid resolution
  int max_pairs = 6;    // enumeration size cap
};

// Exhaustive reference: enumerates subsets and per-beam power grids against
// the aggregate-rate objective under the same caps (no eta constraint). The
// grid always contains the closed-form policies' exact power levels, so the
// oracle never scores below either policy.
Allocation oracle_allocate(std::span<const channel::BeamPair> pairs,
                           const PowerBudget& budget,
                           const BeamwidthBounds& bounds,
                           const channel::RadioConstants& k,
                           const OracleOptions& opts = {});

struct PolicyComparison {
  Allocation ppa;
  Allocation apa;
  bool equal_split_regime = false;  // floor(P/p) >= min(n_pairs, n_max)
  bool identical = false;           // same links, powers and rates
};

PolicyComparison compare_policies(std::span<const channel::BeamPair> pairs,
                                  const PowerBudget& budget,
                                  const BeamwidthBounds& bounds,
                                  const channel::RadioConstants& k);

}  // namespace beamspace::power
