#include <stdexcept>
#include <string>
#include <vector>

#include "beamspace/channel.hpp"
#include "beamspace/simkernel.hpp"
#include "beamspace/tracking.hpp"
#include "doctest.h"

using namespace beamspace;
using channel::BeamPair;
using channel::PathGeometry;
using channel::PathKind;
using channel::Scenario;
using tracking::BlockageInterval;
using tracking::BlockageProcess;
using tracking::LinkStatus;
using tracking::TrackingConfig;
using tracking::TrackingSim;

namespace {

Scenario base_scenario() {
  Scenario sc;
  sc.xi_t_rad = channel::deg_to_rad(10.0);
  sc.xi_r_rad = channel::deg_to_rad(15.0);
  return sc;
}

BeamPair make_pair(int id, PathKind kind, double tt_deg, double tr_deg,
                   const Scenario& sc) {
  BeamPair p;
  p.id = id;
  p.geometry.kind = kind;
  p.geometry.theta_t_rad = channel::deg_to_rad(tt_deg);
  p.geometry.theta_r_rad = channel::deg_to_rad(tr_deg);
  p.geometry.r_los_m = 4.0;
  p.xi_t_rad = sc.xi_t_rad;
  p.xi_r_rad = sc.xi_r_rad;
  return p;
}

// Pair ids follow the reflection order of the shared deployment: 0 = LOS,
// then NLOS offsets (10,20), (20,30), (40,40), (50,60).
std::vector<BeamPair> make_pairs(const Scenario& sc, int count) {
  const double tt[] = {0, 10, 20, 40, 50};
  const double tr[] = {0, 20, 30, 40, 60};
  std::vector<BeamPair> pairs;
  for (int i = 0; i < count; ++i) {
    pairs.push_back(make_pair(i, i == 0 ? PathKind::Los : PathKind::Nlos,
                              tt[i], tr[i], sc));
  }
  return pairs;
}

TrackingConfig demo_config() {
  TrackingConfig cfg;
  cfg.t_end = 200'000;
  cfg.eta_db = 10.0;  // blocked threshold; degrade at 16 dB
  return cfg;
}

BlockageProcess scripted(std::vector<BlockageInterval> intervals) {
  BlockageProcess b;
  b.mode = BlockageProcess::Mode::Scripted;
  b.intervals = std::move(intervals);
  return b;
}

struct Expect {
  std::string actor;    // empty = any
  std::string kind;
  std::string details;  // substring; empty = any
};

// True when the expectations appear in the trace in order (not necessarily
// adjacent).
bool has_subsequence(const sim::EventTrace& trace,
                     const std::vector<Expect>& expects, std::string* missing) {
  std::size_t at = 0;
  for (const Expect& e : expects) {
    bool found = false;
    for (; at < trace.size(); ++at) {
      const sim::TraceEntry& t = trace[at];
      if (t.kind != e.kind) continue;
      if (!e.actor.empty() && t.actor != e.actor) continue;
      if (!e.details.empty() && t.details.find(e.details) == std::string::npos)
        continue;
      found = true;
      ++at;
      break;
    }
    if (!found) {
      if (missing) *missing = e.actor + " " + e.kind + " " + e.details;
      return false;
    }
  }
  return true;
}

long count_kind(const sim::EventTrace& trace, const std::string& kind) {
  long n = 0;
  for (const auto& t : trace)
    if (t.kind == kind) ++n;
  return n;
}

}  // namespace

TEST_CASE("state detection thresholds are half-open") {
  const tracking::Thresholds th{22.0, 16.0};
  CHECK(tracking::detect_state(30.0, th) == LinkStatus::Active);
  CHECK(tracking::detect_state(22.0, th) == LinkStatus::Active);
  CHECK(tracking::detect_state(21.99, th) == LinkStatus::Degraded);
  CHECK(tracking::detect_state(16.0, th) == LinkStatus::Degraded);
  CHECK(tracking::detect_state(15.99, th) == LinkStatus::Blocked);
  // Hard shadowing wins regardless of the computed SINR.
  CHECK(tracking::detect_state(30.0, th, true) == LinkStatus::Blocked);
  CHECK_THROWS_AS(tracking::detect_state(20.0, tracking::Thresholds{10.0, 16.0}),
                  std::invalid_argument);

  CHECK(std::string(tracking::to_string(LinkStatus::Active)) == "active");
  CHECK(std::string(tracking::to_string(LinkStatus::Degraded)) == "degraded");
  CHECK(std::string(tracking::to_string(LinkStatus::Blocked)) == "blocked");
}

TEST_CASE("arbitration prefers refinement and then the lower pair id") {
  using tracking::PendingRequest;
  CHECK(tracking::arbitrate({}) == -1);

  const std::vector<PendingRequest> single = {{0, LinkStatus::Blocked, 4}};
  CHECK(tracking::arbitrate(single) == 0);

  const std::vector<PendingRequest> mixed = {{0, LinkStatus::Blocked, 0},
                                             {1, LinkStatus::Degraded, 5}};
  CHECK(tracking::arbitrate(mixed) == 1);

  const std::vector<PendingRequest> ties = {{0, LinkStatus::Blocked, 3},
                                            {1, LinkStatus::Blocked, 1},
                                            {2, LinkStatus::Blocked, 2}};
  CHECK(tracking::arbitrate(ties) == 1);
}

TEST_CASE("construction validates timing, pair ids and intervals") {
  const Scenario sc = base_scenario();
  const std::vector<BeamPair> pairs = make_pairs(sc, 3);

  CHECK_THROWS_AS((TrackingSim(sc, pairs, 0, demo_config(), {}, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS((TrackingSim(sc, pairs, 4, demo_config(), {}, 1)),
                  std::invalid_argument);

  TrackingConfig bad = demo_config();
  bad.ack_timeout = bad.ack_delay;  // ack cannot beat its own timeout
  CHECK_THROWS_AS((TrackingSim(sc, pairs, 2, bad, {}, 1)), std::invalid_argument);
  bad = demo_config();
  bad.ack_timeout = bad.data_period + 1;
  CHECK_THROWS_AS((TrackingSim(sc, pairs, 2, bad, {}, 1)), std::invalid_argument);

  std::vector<BeamPair> dup = pairs;
  dup[2].id = dup[0].id;
  CHECK_THROWS_AS((TrackingSim(sc, dup, 2, demo_config(), {}, 1)),
                  std::invalid_argument);

  CHECK_THROWS_AS((TrackingSim(sc, pairs, 2, demo_config(),
                              scripted({{7, 0, 10, true, 0.0}}), 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS((TrackingSim(sc, pairs, 2, demo_config(),
                              scripted({{0, 10, 10, true, 0.0}}), 1)),
                  std::invalid_argument);
}

TEST_CASE("undisturbed links just exchange data and acks") {
  const Scenario sc = base_scenario();
  TrackingConfig cfg = demo_config();
  cfg.t_end = 20'000;
  TrackingSim sim(sc, make_pairs(sc, 2), 2, cfg, {}, 1);
  const sim::EventTrace& trace = sim.run();

  for (const char* kind : {"DETECT_DEGRADED", "DETECT_BLOCKED", "REQUEST",
                           "PROC_START", "SWITCH", "REVERT", "REFINE",
                           "ESCALATE", "ABORT", "ACK_TIMEOUT"}) {
    CHECK(count_kind(trace, kind) == 0);
  }
  CHECK(sim.procedures_started() == 0);
  for (const tracking::LinkState& l : sim.links()) {
    CHECK(l.status == LinkStatus::Active);
    CHECK(l.pair_index == l.initial_pair_index);
    CHECK(l.probe_frames == 0);
    CHECK(l.data_frames == 20);  // one per period from t = 1000 to t_end
    CHECK(l.data_frames - l.ack_frames <= 1);  // final ack lands past t_end
  }
}

TEST_CASE("full blockage triggers helper-carried re-steering") {
  // Links on pairs 0 (LOS), 2, 1; candidates 3 and 4. The strongest
  // reflection (pair 1) runs the third link and becomes the helper when the
  // LOS link is obstructed.
  const Scenario sc = base_scenario();
  std::vector<BeamPair> pairs = make_pairs(sc, 5);
  std::swap(pairs[1], pairs[2]);  // operating order: ids 0, 2, 1
  TrackingSim sim(sc, pairs, 3, demo_config(),
                  scripted({{0, 5'000, 150'000, true, 0.0}}), 1);
  const sim::EventTrace& trace = sim.run();

  std::string missing;
  const bool ok = has_subsequence(
      trace,
      {
          {"env", "BLOCK_ON", "pair=0,full"},
          {"vMTX1", "ACK_TIMEOUT", "missed=3"},
          {"vMTX1", "DETECT_BLOCKED", "pair=0"},
          {"vMTX1", "REQUEST", "type=track,pair=0"},
          {"MTX", "PROC_START", "type=track,link=vMTX1"},
          {"MTX", "HELPER", "helper=vMTX3,target=vMTX1"},
          {"vMTX3", "DATA", "BBPO=1,CBPO=1"},
          {"vMTX1", "SWITCH", "pair=3,order=1"},
          {"vMTX1", "QOSNULL", "pair=3"},
          {"vMRX1", "ACK", "qosnull,pair=3"},
          {"vMTX1", "RESTORED", "pair=3,order=1"},
          {"MTX", "PROC_END", "type=track,link=vMTX1,outcome=restored"},
          // The fallback beam is weaker than the degrade threshold, so a
          // refinement pass follows and leaves the link usable but degraded.
          {"vMTX1", "DETECT_DEGRADED", "pair=3"},
          {"MTX", "PROC_START", "type=refine,link=vMTX1"},
          {"vMTX1", "REFINE", "pair=3"},
          {"vMRX1", "REFINE_DONE", "pair=3"},
          {"MTX", "PROC_END", "type=refine,link=vMTX1,outcome=partial"},
      },
      &missing);
  CHECK_MESSAGE(ok, "missing trace entry: ", missing);

  CHECK(sim.procedures_started() == 2);
  CHECK(sim.max_concurrent_procedures() == 1);
  CHECK(sim.candidate_pool().size() == 1);  // pair 3 consumed, pair 4 left

  const tracking::LinkState& l0 = sim.links()[0];
  CHECK(pairs[static_cast<std::size_t>(l0.pair_index)].id == 3);
  CHECK(l0.status == LinkStatus::Degraded);
  CHECK(l0.candidate_order == 1);
  CHECK(l0.probe_frames == 0);
  for (int i : {1, 2}) CHECK(sim.links()[static_cast<std::size_t>(i)].status == LinkStatus::Active);
}

TEST_CASE("exhausted candidates revert to the initial beam and probe") {
  // One spare pair that is itself obstructed for the whole run: the switch
  // attempt times out, the link reverts and periodic probes restore it once
  // the original path clears at t = 60 ms.
  const Scenario sc = base_scenario();
  const std::vector<BeamPair> pairs = make_pairs(sc, 3);
  TrackingConfig cfg = demo_config();
  cfg.t_end = 80'000;
  TrackingSim sim(sc, pairs, 2, cfg,
                  scripted({{0, 5'000, 60'000, true, 0.0},
                            {2, 0, 80'000, true, 0.0}}),
                  1);
  const sim::EventTrace& trace = sim.run();

  std::string missing;
  const bool ok = has_subsequence(
      trace,
      {
          {"vMTX1", "DETECT_BLOCKED", "pair=0"},
          {"MTX", "HELPER", "helper=vMTX2,target=vMTX1"},
          {"vMTX1", "SWITCH", "pair=2,order=1"},
          {"vMTX1", "ACK_TIMEOUT", "qosnull,order=1"},
          {"vMTX1", "REVERT", "pair=0,order=0"},
          {"MTX", "PROC_END", "type=track,link=vMTX1,outcome=reverted"},
          {"vMTX1", "QOSNULL", "probe,pair=0"},
          {"vMRX1", "ACK", "probe,pair=0"},
          {"vMTX1", "RESTORED", "pair=0,order=0"},
      },
      &missing);
  CHECK_MESSAGE(ok, "missing trace entry: ", missing);

  const tracking::LinkState& l0 = sim.links()[0];
  CHECK(l0.status == LinkStatus::Active);
  CHECK(l0.pair_index == l0.initial_pair_index);
  CHECK(l0.probe_frames >= 4);  // ~10 ms cadence across a 50 ms outage
  CHECK(sim.candidate_pool().size() == 1);  // nothing was consumed

  // The restoring probe fires only after the obstruction lifts.
  for (const auto& t : trace) {
    if (t.kind == "RESTORED") CHECK(t.at >= 60'000);
  }
}

TEST_CASE("partial obstruction refines in place") {
  const Scenario sc = base_scenario();
  const std::vector<BeamPair> pairs = make_pairs(sc, 2);
  TrackingConfig cfg = demo_config();
  cfg.t_end = 60'000;
  TrackingSim sim(sc, pairs, 2, cfg,
                  scripted({{1, 5'000, 50'000, false, 4.0}}), 1);
  const sim::EventTrace& trace = sim.run();

  std::string missing;
  const bool ok = has_subsequence(
      trace,
      {
          {"env", "BLOCK_ON", "pair=1,atten_db=4"},
          {"vMTX2", "DETECT_DEGRADED", "pair=1"},
          {"vMTX2", "REQUEST", "type=refine,pair=1"},
          {"MTX", "PROC_START", "type=refine,link=vMTX2"},
          {"vMTX2", "REFINE", "pair=1"},
          {"vMRX2", "REFINE_DONE", "pair=1"},
          {"MTX", "PROC_END", "type=refine,link=vMTX2,outcome=refined"},
      },
      &missing);
  CHECK_MESSAGE(ok, "missing trace entry: ", missing);

  CHECK(count_kind(trace, "SWITCH") == 0);
  CHECK(count_kind(trace, "ESCALATE") == 0);
  CHECK(sim.procedures_started() == 1);
  CHECK(sim.links()[1].status == LinkStatus::Active);
  CHECK(sim.links()[1].pair_index == sim.links()[1].initial_pair_index);
}

TEST_CASE("hard shadowing during refinement escalates to re-steering") {
  const Scenario sc = base_scenario();
  const std::vector<BeamPair> pairs = make_pairs(sc, 3);
  TrackingConfig cfg = demo_config();
  cfg.t_end = 60'000;
  // The partial loss degrades pair 1 at 5 ms; full shadowing lands while
  // the refinement exchange is still in flight.
  TrackingSim sim(sc, pairs, 2, cfg,
                  scripted({{1, 5'000, 50'000, false, 4.0},
                            {1, 5'250, 50'000, true, 0.0}}),
                  1);
  const sim::EventTrace& trace = sim.run();

  std::string missing;
  const bool ok = has_subsequence(
      trace,
      {
          {"vMTX2", "DETECT_DEGRADED", "pair=1"},
          {"vMTX2", "REFINE", "pair=1"},
          {"vMTX2", "ESCALATE", "pair=1"},
          {"MTX", "PROC_END", "type=refine,link=vMTX2,outcome=escalated"},
          {"vMTX2", "REQUEST", "type=track,pair=1"},
          {"MTX", "PROC_START", "type=track,link=vMTX2"},
          {"MTX", "HELPER", "helper=vMTX1,target=vMTX2"},
          {"vMTX2", "SWITCH", "pair=2,order=1"},
          {"vMTX2", "RESTORED", "pair=2,order=1"},
      },
      &missing);
  CHECK_MESSAGE(ok, "missing trace entry: ", missing);

  CHECK(sim.procedures_started() == 2);
  CHECK(sim.candidate_pool().empty());
  const tracking::LinkState& l1 = sim.links()[1];
  CHECK(pairs[static_cast<std::size_t>(l1.pair_index)].id == 2);
  CHECK(l1.status == LinkStatus::Active);
}

TEST_CASE("a blocked helper aborts the procedure and a new helper finishes it") {
  const Scenario sc = base_scenario();
  const std::vector<BeamPair> pairs = make_pairs(sc, 5);
  TrackingConfig cfg = demo_config();
  cfg.t_end = 100'000;
  // Pair 0 dies at 5 ms and drafts pair 1 as helper; pair 1 dies right
  // after, and both spares are obstructed long enough that the switch
  // attempts are still pending when the helper drops out (detected at 12 ms).
  // The second spare clears at 12.5 ms for the rerun under the new helper.
  TrackingSim sim(sc, pairs, 3, cfg,
                  scripted({{0, 5'000, 70'000, true, 0.0},
                            {1, 8'200, 70'000, true, 0.0},
                            {3, 0, 70'000, true, 0.0},
                            {4, 0, 12'500, true, 0.0}}),
                  1);
  const sim::EventTrace& trace = sim.run();

  std::string missing;
  const bool ok = has_subsequence(
      trace,
      {
          {"vMTX1", "DETECT_BLOCKED", "pair=0"},
          {"MTX", "HELPER", "helper=vMTX2,target=vMTX1"},
          {"vMTX2", "DETECT_BLOCKED", "pair=1"},
          {"MTX", "ABORT", "helper=vMTX2,target=vMTX1"},
          {"MTX", "PROC_END", "type=track,link=vMTX1,outcome=aborted"},
          // The re-queued request restarts with the remaining helper and
          // lands on the second spare, the first being obstructed.
          {"MTX", "HELPER", "helper=vMTX3,target=vMTX1"},
          {"vMTX1", "SWITCH", "pair=4,order=2"},
          {"vMTX1", "RESTORED", "pair=4,order=2"},
      },
      &missing);
  CHECK_MESSAGE(ok, "missing trace entry: ", missing);

  const tracking::LinkState& l0 = sim.links()[0];
  CHECK(pairs[static_cast<std::size_t>(l0.pair_index)].id == 4);

  // The helper's own outage recovers by probing once its path clears.
  const tracking::LinkState& l1 = sim.links()[1];
  CHECK(l1.status == LinkStatus::Active);
  CHECK(l1.pair_index == l1.initial_pair_index);
  CHECK(l1.probe_frames >= 1);
  CHECK(sim.candidate_pool().size() == 1);
  CHECK(sim.max_concurrent_procedures() == 1);
}

TEST_CASE("random blockage runs are reproducible and single-slotted") {
  const Scenario sc = base_scenario();
  BlockageProcess bern;
  bern.mode = BlockageProcess::Mode::Bernoulli;
  bern.p = 0.25;
  bern.epoch_us = 10'000;
  TrackingConfig cfg = demo_config();
  cfg.t_end = 100'000;

  auto run_once = [&](std::uint64_t seed) {
    TrackingSim sim(sc, make_pairs(sc, 5), 3, cfg, bern, seed);
    return sim::format_trace(sim.run());
  };
  const std::string a = run_once(42);
  CHECK(a == run_once(42));
  CHECK(a != run_once(43));

  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    TrackingSim sim(sc, make_pairs(sc, 5), 3, cfg, bern, seed);
    const sim::EventTrace& trace = sim.run();
    CHECK(sim.max_concurrent_procedures() <= 1);
    const long starts = count_kind(trace, "PROC_START");
    const long ends = count_kind(trace, "PROC_END");
    CHECK(starts == sim.procedures_started());
    CHECK(ends <= starts);
    CHECK(starts - ends <= 1);  // at most the procedure cut off by t_end
    for (std::size_t i = 1; i < trace.size(); ++i)
      CHECK(trace[i - 1].at <= trace[i].at);
  }

  BlockageProcess onoff;
  onoff.mode = BlockageProcess::Mode::OnOff;
  onoff.mean_on_us = 5'000;
  onoff.mean_off_us = 20'000;
  TrackingSim sim(sc, make_pairs(sc, 4), 2, cfg, onoff, 7);
  const sim::EventTrace& trace = sim.run();
  CHECK(count_kind(trace, "BLOCK_ON") > 0);
}

TEST_CASE("a queued refinement is withdrawn when the link recovers by itself") {
  const Scenario sc = base_scenario();
  const std::vector<BeamPair> pairs = make_pairs(sc, 3);
  TrackingConfig cfg = demo_config();
  cfg.t_end = 40'000;
  cfg.refine_duration = 2'000;  // keep the slot busy past the recovery
  // Both reflections degrade at 5 ms; the lower pair id wins the slot, and
  // the other one's obstruction ends before its turn ever comes.
  TrackingSim sim(sc, pairs, 3, cfg,
                  scripted({{1, 5'000, 30'000, false, 4.0},
                            {2, 5'000, 5'200, false, 4.0}}),
                  1);
  const sim::EventTrace& trace = sim.run();

  std::string missing;
  const bool ok = has_subsequence(
      trace,
      {
          {"vMTX3", "REQUEST", "type=refine,pair=2"},
          {"vMTX3", "RECOVERED", "pair=2"},
          {"vMRX2", "REFINE_DONE", "pair=1"},
      },
      &missing);
  CHECK_MESSAGE(ok, "missing trace entry: ", missing);

  // Only the granted refinement ever ran; the withdrawn one left no trace.
  CHECK(sim.procedures_started() == 1);
  bool saw_refine_pair2 = false;
  for (const auto& t : trace) {
    if (t.kind == "REFINE" && t.details == "pair=2") saw_refine_pair2 = true;
  }
  CHECK(!saw_refine_pair2);
  CHECK(sim.links()[1].status == LinkStatus::Active);
  CHECK(sim.links()[2].status == LinkStatus::Active);
}
