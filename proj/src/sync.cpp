#include "beamspace/sync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace beamspace::sync {

SplitPlan split_stream(std::uint64_t total_bytes,
                       std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("split_stream: no links");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("split_stream: weights must be finite and >= 0");
    }
    sum += w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("split_stream: all weights zero");

  SplitPlan plan;
  plan.total_bytes = total_bytes;
  plan.weights.assign(weights.begin(), weights.end());
  plan.shares.resize(weights.size(), 0);

  std::vector<double> fraction(weights.size(), 0.0);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total_bytes) * (weights[i] / sum);
    const double base = std::floor(exact);
    plan.shares[i] = static_cast<std::uint64_t>(base);
    fraction[i] = exact - base;
    assigned += plan.shares[i];
  }

  // Largest-remainder top-up; ties favor the lower index.
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&fraction](std::size_t a, std::size_t b) {
                     return fraction[a] > fraction[b];
                   });
  std::uint64_t leftover = total_bytes - assigned;
  for (std::size_t i = 0; leftover > 0; i = (i + 1) % order.size()) {
    ++plan.shares[order[i]];
    --leftover;
  }
  return plan;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Piecewise-constant rate of one link from t0 onward, as (start, rate)
// breakpoints covering [t0, inf).
std::vector<RateStep> effective_steps(const LinkRate& lr, sim::SimTime t0) {
  std::vector<RateStep> out;
  double current = lr.rate_bps;
  for (std::size_t i = 0; i < lr.steps.size(); ++i) {
    const RateStep& s = lr.steps[i];
    if (!(s.rate_bps >= 0.0)) {
      throw std::invalid_argument("run_cycle: negative rate step");
    }
    if (i > 0 && s.at < lr.steps[i - 1].at) {
      throw std::invalid_argument("run_cycle: rate steps must be time-ordered");
    }
    if (s.at <= t0) {
      current = s.rate_bps;
    } else {
      out.push_back(s);
    }
  }
  out.insert(out.begin(), RateStep{t0, current});
  return out;
}

// Absolute finish time (exact, microseconds as double) for `bits` starting
// at t0; +inf when the tail rate cannot carry the residue.
double exact_finish_us(const std::vector<RateStep>& steps, double bits) {
  if (bits <= 0.0) return static_cast<double>(steps.front().at);
  double remaining = bits;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double start = static_cast<double>(steps[i].at);
    const double rate = steps[i].rate_bps;
    const bool last = i + 1 == steps.size();
    const double end = last ? kInf : static_cast<double>(steps[i + 1].at);
    if (rate <= 0.0) {
      if (last) return kInf;
      continue;
    }
    const double capacity = last ? kInf : rate * (end - start) * 1e-6;
    if (remaining <= capacity) return start + remaining / rate * 1e6;
    remaining -= capacity;
  }
  return kInf;
}

// Bits carried over [t0, t_end].
double bits_sent(const std::vector<RateStep>& steps, sim::SimTime t_end) {
  double bits = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double start = static_cast<double>(steps[i].at);
    const bool last = i + 1 == steps.size();
    const double end =
        std::min(static_cast<double>(t_end),
                 last ? static_cast<double>(t_end) : static_cast<double>(steps[i + 1].at));
    if (end <= start) break;
    bits += steps[i].rate_bps * (end - start) * 1e-6;
  }
  return bits;
}

}  // namespace

CycleOutcome run_cycle(const SplitPlan& plan, std::span<const LinkRate> rates,
                       const SyncConfig& cfg, sim::Simulator& sim) {
  const std::size_t n = plan.shares.size();
  if (n == 0 || rates.size() != n) {
    throw std::invalid_argument("run_cycle: plan and rate table sizes differ");
  }

  const sim::SimTime t0 = sim.now();
  CycleOutcome out;
  out.start_at = t0;
  out.finish_at.assign(n, -1);
  out.remainder_bytes.assign(n, 0);

  std::vector<std::vector<RateStep>> steps(n);
  std::vector<sim::SimTime> finish(n, -1);
  sim::SimTime planned_max = 1;
  for (std::size_t i = 0; i < n; ++i) {
    steps[i] = effective_steps(rates[i], t0);
    const double bits = static_cast<double>(plan.shares[i]) * 8.0;
    const double exact = exact_finish_us(steps[i], bits);
    finish[i] = std::isfinite(exact)
                    ? static_cast<sim::SimTime>(std::ceil(exact))
                    : -1;
    const double r0 = steps[i].front().rate_bps;
    if (r0 > 0.0 && bits > 0.0) {
      planned_max = std::max(
          planned_max, static_cast<sim::SimTime>(std::ceil(bits / r0 * 1e6)));
    }
  }

  out.tau1 = cfg.tau1 > 0 ? cfg.tau1 : planned_max;
  out.tau2 = cfg.tau2 > 0 ? cfg.tau2 : std::max<sim::SimTime>(1, out.tau1 / 10);

  sim::SimTime first_finish = -1;
  sim::SimTime last_finish = -1;
  bool all_finish = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (finish[i] < 0) {
      all_finish = false;
      continue;
    }
    if (first_finish < 0 || finish[i] < first_finish) first_finish = finish[i];
    if (finish[i] > last_finish) last_finish = finish[i];
  }

  sim::SimTime deadline;
  if (first_finish >= 0) {
    out.timer2_start = first_finish;
    deadline = first_finish + out.tau2;
  } else {
    // Nothing ever finishes (all tail rates zero): fall back to the
    // planning bound as the cutoff.
    deadline = t0 + out.tau1 + out.tau2;
  }
  out.timer2_deadline = deadline;
  out.end_at = (all_finish && last_finish <= deadline) ? last_finish : deadline;
  if (out.end_at < t0) out.end_at = t0;

  sim.schedule(t0, "MTX", "CYCLE_START",
               "links=" + std::to_string(n) +
                   ",total_bytes=" + std::to_string(plan.total_bytes));
  int unfinished = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (finish[i] >= 0 && finish[i] <= out.end_at) {
      out.finish_at[i] = finish[i];
      sim.schedule(finish[i], "vMTX" + std::to_string(i + 1), "LINK_DONE",
                   "bytes=" + std::to_string(plan.shares[i]));
    } else {
      ++unfinished;
      const double sent = std::floor(bits_sent(steps[i], out.end_at) / 8.0);
      const std::uint64_t sent_bytes =
          std::min(plan.shares[i],
                   static_cast<std::uint64_t>(std::max(0.0, sent)));
      out.remainder_bytes[i] = plan.shares[i] - sent_bytes;
    }
  }
  out.overrun = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.remainder_bytes[i] > 0) out.overrun = true;
  }
  if (unfinished > 0) {
    sim.schedule(out.end_at, "MTX", "TIMER2_EXPIRE",
                 "unfinished=" + std::to_string(unfinished));
  }
  sim.run_until(out.end_at);
  return out;
}

SplitPlan rebalance(const SplitPlan& prev, const CycleOutcome& outcome,
                    double floor_fraction) {
  if (prev.shares.size() != outcome.remainder_bytes.size()) {
    throw std::invalid_argument("rebalance: cycle shape mismatch");
  }
  if (!(floor_fraction >= 0.0) || !(floor_fraction <= 1.0)) {
    throw std::invalid_argument("rebalance: floor fraction outside [0,1]");
  }
  std::vector<double> weights(prev.shares.size(), 0.0);
  for (std::size_t i = 0; i < prev.shares.size(); ++i) {
    const double share = static_cast<double>(prev.shares[i]);
    const double rem = static_cast<double>(outcome.remainder_bytes[i]);
    if (rem > 0.0) {
      weights[i] = std::max(share - 2.0 * rem, floor_fraction * share);
    } else {
      weights[i] = share;
    }
  }
  return split_stream(prev.total_bytes, weights);
}

}  // namespace beamspace::sync
