#include "beamspace/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace beamspace::power {

namespace {

using channel::BeamPair;
using channel::RadioConstants;

void validate_budget(const PowerBudget& b) {
  const double p = channel::dbm_to_mw(b.p_max_dbm);
  const double total = channel::dbm_to_mw(b.p_total_max_dbm);
  if (!(p > 0.0) || !(total > 0.0)) {
    throw std::invalid_argument("power budget: caps must be positive");
  }
  if (p > total) {
    throw std::invalid_argument("power budget: per-beam cap exceeds array cap");
  }
  if (b.n_max < 1) {
    throw std::invalid_argument("power budget: n_max must be at least 1");
  }
}

void validate_bounds(const BeamwidthBounds& b) {
  if (!(b.xi_t_min_rad > 0.0) || !(b.xi_r_min_rad > 0.0) ||
      !(b.xi_t_max_rad >= b.xi_t_min_rad) ||
      !(b.xi_r_max_rad >= b.xi_r_min_rad)) {
    throw std::invalid_argument("beamwidth bounds: need 0 < min <= max per side");
  }
}

struct RankedPair {
  const BeamPair* pair = nullptr;
  double loss_db = 0.0;
  double snr_star = 0.0;  // linear SNR at the per-beam cap
};

// Pairs ordered by decreasing cap SNR; equal quality resolves to the lower id.
std::vector<RankedPair> rank_pairs(std::span<const BeamPair> pairs,
                                   double p_cap_mw,
                                   const BeamwidthBounds& bounds,
                                   const RadioConstants& k) {
  std::vector<RankedPair> out;
  out.reserve(pairs.size());
  for (const BeamPair& p : pairs) {
    RankedPair r;
    r.pair = &p;
    r.loss_db = channel::path_loss_db(k, p.geometry.kind,
                                      channel::path_distance_m(p.geometry));
    r.snr_star = pencil_snr_linear(p_cap_mw, r.loss_db, bounds, k);
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedPair& a, const RankedPair& b) {
                     if (a.snr_star != b.snr_star) return a.snr_star > b.snr_star;
                     return a.pair->id < b.pair->id;
                   });
  return out;
}

double rate_of(double snr_linear, const RadioConstants& k) {
  return k.bandwidth_hz * std::log2(1.0 + snr_linear);
}

AllocatedLink make_link(const RankedPair& r, double pt_mw,
                        const BeamwidthBounds& bounds,
                        const RadioConstants& k) {
  AllocatedLink l;
  l.pair_id = r.pair->id;
  l.pt_mw = pt_mw;
  const double snr = pencil_snr_linear(pt_mw, r.loss_db, bounds, k);
  l.snr_db = channel::linear_to_db(snr);
  l.rate_bps = rate_of(snr, k);
  return l;
}

Allocation finish(Policy policy, std::vector<AllocatedLink> links) {
  Allocation a;
  a.policy = policy;
  a.links = std::move(links);
  a.feasible = !a.links.empty();
  for (const AllocatedLink& l : a.links) a.rate_bps += l.rate_bps;
  return a;
}

// floor/ceil of the cap ratio with an exactness guard: a ratio within 1e-9
// of an integer counts as that integer and leaves no remainder beam.
struct CapRatio {
  int fl = 0;
  int ce = 0;
  double remainder_mw = 0.0;  // 0 when the ratio is integral
};

CapRatio cap_ratio(double p_total_mw, double p_cap_mw) {
  const double ratio = p_total_mw / p_cap_mw;
  CapRatio c;
  const double nearest = std::round(ratio);
  if (std::fabs(ratio - nearest) < 1e-9 * std::max(1.0, ratio)) {
    c.fl = c.ce = static_cast<int>(nearest);
  } else {
    c.fl = static_cast<int>(std::floor(ratio));
    c.ce = c.fl + 1;
    c.remainder_mw = p_total_mw - c.fl * p_cap_mw;
  }
  return c;
}

}  // namespace

double pencil_snr_linear(double pt_mw, double loss_db,
                         const BeamwidthBounds& bounds,
                         const RadioConstants& k) {
  if (!(pt_mw > 0.0)) throw std::domain_error("pencil_snr_linear: power must be positive");
  validate_bounds(bounds);
  const double gt = channel::kTwoPi / bounds.xi_t_min_rad;
  const double gr = channel::kTwoPi / bounds.xi_r_min_rad;
  const double noise_mw = channel::dbm_to_mw(channel::noise_power_dbm(k));
  return pt_mw * gt * gr / (channel::db_to_linear(loss_db) * noise_mw);
}

LinkOptimum link_optimum(const channel::BeamPair& pair,
                         const PowerBudget& budget,
                         const BeamwidthBounds& bounds,
                         const RadioConstants& k) {
  validate_budget(budget);
  validate_bounds(bounds);
  LinkOptimum opt;
  opt.pt_mw = std::min(channel::dbm_to_mw(budget.p_max_dbm),
                       channel::dbm_to_mw(budget.p_total_max_dbm));
  opt.xi_t_rad = bounds.xi_t_min_rad;
  opt.xi_r_rad = bounds.xi_r_min_rad;
  const double loss = channel::path_loss_db(
      k, pair.geometry.kind, channel::path_distance_m(pair.geometry));
  const double snr = pencil_snr_linear(opt.pt_mw, loss, bounds, k);
  opt.snr_db = channel::linear_to_db(snr);
  opt.rate_bps = rate_of(snr, k);
  return opt;
}

Allocation ppa_allocate(std::span<const channel::BeamPair> pairs,
                        const PowerBudget& budget,
                        const BeamwidthBounds& bounds,
                        const RadioConstants& k) {
  validate_budget(budget);
  validate_bounds(bounds);
  const double p_cap = channel::dbm_to_mw(budget.p_max_dbm);
  const double p_total = channel::dbm_to_mw(budget.p_total_max_dbm);
  const double eta = channel::db_to_linear(budget.eta_db);

  std::vector<RankedPair> ranked = rank_pairs(pairs, p_cap, bounds, k);
  std::erase_if(ranked, [eta](const RankedPair& r) { return r.snr_star < eta; });
  const int usable = static_cast<int>(
      std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(budget.n_max)));
  if (usable == 0) return finish(Policy::Ppa, {});

  const CapRatio c = cap_ratio(p_total, p_cap);
  std::vector<AllocatedLink> links;
  if (c.fl >= usable) {
    // Budget covers every usable link at the per-beam cap.
    for (int i = 0; i < usable; ++i)
      links.push_back(make_link(ranked[i], p_cap, bounds, k));
  } else {
    for (int i = 0; i < c.fl; ++i)
      links.push_back(make_link(ranked[i], p_cap, bounds, k));
    if (c.remainder_mw > 0.0 && c.ce <= usable) {
      const RankedPair& w = ranked[c.fl];
      const double snr_w = pencil_snr_linear(c.remainder_mw, w.loss_db, bounds, k);
      if (snr_w >= eta) links.push_back(make_link(w, c.remainder_mw, bounds, k));
    }
  }
  return finish(Policy::Ppa, std::move(links));
}

Allocation apa_allocate(std::span<const channel::BeamPair> pairs,
                        const PowerBudget& budget,
                        const BeamwidthBounds& bounds,
                        const RadioConstants& k) {
  validate_budget(budget);
  validate_bounds(bounds);
  const double p_cap = channel::dbm_to_mw(budget.p_max_dbm);
  const double p_total = channel::dbm_to_mw(budget.p_total_max_dbm);
  const double eta = channel::db_to_linear(budget.eta_db);

  std::vector<RankedPair> ranked = rank_pairs(pairs, p_cap, bounds, k);
  int n = static_cast<int>(
      std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(budget.n_max)));

  while (n > 0) {
    const double equal = p_total / n;
    // Guard the cap comparison against division rounding so the capped
    // branch reproduces the per-beam cap bit for bit.
    const double pt = equal >= p_cap * (1.0 - 1e-12) ? p_cap : equal;
    // Equal powers make the worst link the one with the highest loss, i.e.
    // the last in quality order.
    const double worst = pencil_snr_linear(pt, ranked[n - 1].loss_db, bounds, k);
    if (worst >= eta) {
      std::vector<AllocatedLink> links;
      for (int i = 0; i < n; ++i)
        links.push_back(make_link(ranked[i], pt, bounds, k));
      return finish(Policy::Apa, std::move(links));
    }
    --n;
  }
  return finish(Policy::Apa, {});
}

Allocation oracle_allocate(std::span<const channel::BeamPair> pairs,
                           const PowerBudget& budget,
                           const BeamwidthBounds& bounds,
                           const RadioConstants& k, const OracleOptions& opts) {
  validate_budget(budget);
  validate_bounds(bounds);
  if (static_cast<int>(pairs.size()) > opts.max_pairs) {
    throw std::invalid_argument(
        "oracle_allocate: instance above the enumeration size cap (" +
        std::to_string(pairs.size()) + " > " + std::to_string(opts.max_pairs) + ")");
  }
  if (opts.grid_steps < 8) {
    throw std::invalid_argument("oracle_allocate: grid too coarse");
  }
  if (pairs.empty()) return finish(Policy::Oracle, {});

  const double p_cap = channel::dbm_to_mw(budget.p_max_dbm);
  const double p_total = channel::dbm_to_mw(budget.p_total_max_dbm);
  std::vector<RankedPair> ranked = rank_pairs(pairs, p_cap, bounds, k);
  const int kmax = static_cast<int>(
      std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(budget.n_max)));

  // Linear SNR per milliwatt for every pair.
  std::vector<double> gain(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    gain[i] = pencil_snr_linear(1.0, ranked[i].loss_db, bounds, k);
  }

  const CapRatio cr = cap_ratio(p_total, p_cap);

  double best_rate = -1.0;
  std::vector<int> best_members;  // indices into ranked
  std::vector<double> best_powers;

  for (int size = kmax; size >= 1; --size) {
    // Full resolution up to three beams; larger subsets shrink the grid to
    // keep steps^size bounded while retaining the exact policy levels.
    int steps = opts.grid_steps;
    if (size == 4) steps = std::min(steps, 20);
    if (size == 5) steps = std::min(steps, 12);
    if (size >= 6) steps = std::min(steps, 9);

    std::vector<double> grid;
    const double lo = p_cap * 1e-3;
    for (int s = 0; s < steps; ++s) {
      grid.push_back(lo * std::pow(p_cap / lo, static_cast<double>(s) /
                                                   (steps - 1)));
    }
    grid.push_back(p_cap);
    if (cr.remainder_mw > 0.0 && cr.remainder_mw <= p_cap)
      grid.push_back(cr.remainder_mw);
    for (int n = 1; n <= kmax; ++n) {
      const double equal = p_total / n;
      grid.push_back(equal >= p_cap * (1.0 - 1e-12) ? p_cap : equal);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::erase_if(grid, [&](double v) { return !(v > 0.0) || v > p_cap * (1.0 + 1e-12); });

    // Rate contribution of each ranked pair at each grid level.
    const std::size_t g = grid.size();
    std::vector<double> term(ranked.size() * g);
    std::vector<double> top_term(ranked.size());  // best affordable term
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      for (std::size_t j = 0; j < g; ++j) {
        term[i * g + j] = std::log2(1.0 + grid[j] * gain[i]);
      }
      top_term[i] = term[i * g + (g - 1)];
    }

    std::vector<int> subset(size);
    // Enumerate size-subsets of the quality-ordered pairs.
    for (int i = 0; i < size; ++i) subset[i] = i;
    const int n_pairs = static_cast<int>(ranked.size());
    while (true) {
      // Depth-first over power levels, highest first, with budget and
      // optimistic-bound pruning.
      // Suffix bound: best possible remaining contribution.
      std::vector<double> suffix(size + 1, 0.0);
      for (int i = size - 1; i >= 0; --i)
        suffix[i] = suffix[i + 1] + top_term[subset[i]];

      std::vector<std::size_t> choice(size, 0);
      int depth = 0;
      double used = 0.0;
      double sum_rate = 0.0;
      std::vector<double> used_at(size + 1, 0.0);
      std::vector<double> rate_at(size + 1, 0.0);
      choice[0] = g;  // start above the top level; decremented before use
      while (depth >= 0) {
        if (choice[depth] == 0) {
          --depth;
          if (depth >= 0) continue;
          break;
        }
        --choice[depth];
        const std::size_t j = choice[depth];
        const double v = grid[j];
        used = used_at[depth] + v;
        if (used > p_total * (1.0 + 1e-12)) continue;  // over budget; try lower
        sum_rate = rate_at[depth] + term[subset[depth] * g + j];
        if (sum_rate + suffix[depth + 1] <= best_rate) {
          // Even the optimistic completion cannot win; lower levels only
          // score worse, so abandon this depth.
          choice[depth] = 0;
          continue;
        }
        if (depth + 1 == size) {
          if (sum_rate > best_rate) {
            best_rate = sum_rate;
            best_members.assign(subset.begin(), subset.end());
            best_powers.assign(size, 0.0);
            for (int i = 0; i < size; ++i) best_powers[i] = grid[choice[i]];
          }
          continue;
        }
        ++depth;
        used_at[depth] = used;
        rate_at[depth] = sum_rate;
        choice[depth] = g;
      }

      // Next combination in lexicographic order.
      int pos = size - 1;
      while (pos >= 0 && subset[pos] == n_pairs - size + pos) --pos;
      if (pos < 0) break;
      ++subset[pos];
      for (int i = pos + 1; i < size; ++i) subset[i] = subset[i - 1] + 1;
    }
  }

  if (best_rate < 0.0) return finish(Policy::Oracle, {});
  // Rebuild the winning allocation through the same arithmetic path the
  // closed-form policies use, so equal inputs give bit-equal outputs.
  std::vector<AllocatedLink> links;
  for (std::size_t i = 0; i < best_members.size(); ++i) {
    links.push_back(make_link(ranked[best_members[i]], best_powers[i], bounds, k));
  }
  Allocation out = finish(Policy::Oracle, std::move(links));
  return out;
}

PolicyComparison compare_policies(std::span<const channel::BeamPair> pairs,
                                  const PowerBudget& budget,
                                  const BeamwidthBounds& bounds,
                                  const RadioConstants& k) {
  PolicyComparison cmp;
  cmp.ppa = ppa_allocate(pairs, budget, bounds, k);
  cmp.apa = apa_allocate(pairs, budget, bounds, k);

  const double p_cap = channel::dbm_to_mw(budget.p_max_dbm);
  const double p_total = channel::dbm_to_mw(budget.p_total_max_dbm);
  const int limit = static_cast<int>(
      std::min<std::size_t>(pairs.size(), static_cast<std::size_t>(budget.n_max)));
  cmp.equal_split_regime = cap_ratio(p_total, p_cap).fl >= limit;

  const auto& a = cmp.ppa.links;
  const auto& b = cmp.apa.links;
  cmp.identical = a.size() == b.size();
  if (cmp.identical) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const bool same_pair = a[i].pair_id == b[i].pair_id;
      const bool same_pt =
          std::fabs(a[i].pt_mw - b[i].pt_mw) <= 1e-12 * std::max(a[i].pt_mw, b[i].pt_mw);
      const bool same_rate = std::fabs(a[i].rate_bps - b[i].rate_bps) <=
                             1e-12 * std::max(a[i].rate_bps, b[i].rate_bps);
      if (!(same_pair && same_pt && same_rate)) {
        cmp.identical = false;
        break;
      }
    }
  }
  return cmp;
}

}  // namespace beamspace::power
