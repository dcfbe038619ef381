#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamspace/channel.hpp"
#include "beamspace/simkernel.hpp"

namespace beamspace::tracking {

enum class LinkStatus { Active, Degraded, Blocked };

const char* to_string(LinkStatus s);

struct Thresholds {
  double degrade_db = 22.0;  // below: Degraded (misaligned but usable)
  double blocked_db = 16.0;  // below, or hard-shadowed: Blocked
};

LinkStatus detect_state(double sinr_db, const Thresholds& th,
                        bool hard_block = false);

struct BlockageInterval {
  int pair_id = 0;
  sim::SimTime from = 0;  // [from, to)
  sim::SimTime to = 0;
  bool full = true;       // impenetrable obstruction
  double atten_db = 0.0;  // partial: extra loss on the victim path
};

struct BlockageProcess {
  enum class Mode { None, Scripted, Bernoulli, OnOff };
  Mode mode = Mode::None;
  std::vector<BlockageInterval> intervals;  // Scripted
  double p = 0.0;                           // Bernoulli: P(epoch obstructed)
  sim::SimTime epoch_us = 10'000;
  double mean_on_us = 5'000;   // OnOff: exponential holding means
  double mean_off_us = 20'000;
};

struct TrackingConfig {
  sim::SimTime t_end = 200'000;
  sim::SimTime data_period = 1'000;
  sim::SimTime ack_delay = 100;
  sim::SimTime ack_timeout = 1'000;     // lost-ack declaration window
  sim::SimTime switch_window = 2'000;   // per candidate-switch attempt
  sim::SimTime probe_period = 10'000;
  sim::SimTime qosnull_delay = 10;
  sim::SimTime refine_duration = 200;
  int blocked_after_missed = 3;    // consecutive lost acks before Blocked
  double degrade_margin_db = 6.0;  // degrade threshold = eta + margin
  double pt_dbm = 3.0;
  double eta_db = 16.0;
};

struct PendingRequest {
  int link = 0;
  LinkStatus severity = LinkStatus::Blocked;
  int pair_id = 0;
};

// Single recovery slot: refinement outranks re-steering, ties go to the
// lower pair id. Returns the index of the granted request, -1 when empty.
int arbitrate(std::span<const PendingRequest> requests);

struct LinkState {
  int link = 0;               // actor names are vMTX<link+1> / vMRX<link+1>
  int pair_index = 0;         // current beam pair (index into the pair list)
  int initial_pair_index = 0;
  LinkStatus status = LinkStatus::Active;
  int candidate_order = 0;    // m of the candidate in use; 0 = initial beam
  int missed_acks = 0;
  std::uint64_t next_seq = 0;
  std::uint64_t last_acked = 0;  // 1-based; 0 = none yet
  long data_frames = 0;
  long ack_frames = 0;
  long probe_frames = 0;
  int loop_generation = 0;
};

// Discrete-event model of the in-band recovery protocol: per-link data/ack
// traffic, loss-counter blockage detection, degrade refinement, helper-
// carried re-steering orders over the remaining candidate pairs, revert to
// probing when all fail. One virtual array anchors both ends, so control
// hops between co-located links are free; only air frames take time.
class TrackingSim {
 public:
  TrackingSim(channel::Scenario scenario, std::vector<channel::BeamPair> pairs,
              int operating_links, TrackingConfig cfg,
              BlockageProcess blockage, std::uint64_t seed);

  TrackingSim(const TrackingSim&) = delete;
  TrackingSim& operator=(const TrackingSim&) = delete;

  const sim::EventTrace& run();

  const std::vector<LinkState>& links() const { return links_; }
  const std::vector<int>& candidate_pool() const { return candidates_; }
  const sim::Simulator& simulator() const { return sim_; }
  int procedures_started() const { return procedures_started_; }
  int max_concurrent_procedures() const { return max_concurrent_; }

 private:
  struct Grant {
    int link = -1;
    bool refine = false;
    int helper = -1;
    int attempt = 0;  // current candidate order in flight
  };
  struct HelperOrder {
    int target = -1;
    int order = 0;  // 1..n_cpair = switch; 0 = revert
  };
  struct StampedInterval {
    sim::SimTime from = 0;
    sim::SimTime to = 0;
    bool full = true;
    double atten_db = 0.0;
    bool refined = false;  // partial loss compensated by a refinement pass
  };

  std::string tx(int link) const;
  std::string rx(int link) const;
  int pair_id(int pair_index) const;

  bool pair_clear(int pair_index, sim::SimTime t) const;
  double pair_attenuation(int pair_index, sim::SimTime t) const;
  double effective_sinr(int link, sim::SimTime t) const;
  bool deliverable(int link, sim::SimTime t) const;

  void build_blockage(const BlockageProcess& blockage, std::uint64_t seed);
  void start();
  void schedule_data(int link, sim::SimTime at);
  void send_data(int link, int generation);
  void on_ack_timeout(int link, std::uint64_t seq);
  void mark_blocked(int link);
  void evaluate_on_ack(int link);

  void request_procedure(int link, LinkStatus severity);
  void withdraw_request(int link);
  void try_grant();
  void begin_refine(int link);
  void begin_track(int link);
  void issue_order(int target, int order);
  void on_fields_sent(int helper, int target, int order);
  void on_attempt_timeout(int target, int order);
  void on_helper_lost(int helper);
  void finish_procedure(const std::string& type, int link,
                        const std::string& outcome);
  void start_probing(int link);
  void send_probe(int link);
  void restore(int link, int new_pair_index, int order);

  channel::Scenario sc_;
  std::vector<channel::BeamPair> pairs_;
  TrackingConfig cfg_;
  Thresholds th_;
  std::vector<LinkState> links_;
  std::vector<int> candidates_;  // pair indices, consumed on restoration
  std::vector<std::vector<StampedInterval>> blocks_;  // per pair index
  sim::Simulator sim_;
  std::optional<Grant> grant_;
  std::optional<HelperOrder> order_;
  std::vector<PendingRequest> pending_;
  int procedures_started_ = 0;
  int concurrent_ = 0;
  int max_concurrent_ = 0;
  bool ran_ = false;
};

}  // namespace beamspace::tracking
