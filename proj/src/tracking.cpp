#include "beamspace/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace beamspace::tracking {

const char* to_string(LinkStatus s) {
  switch (s) {
    case LinkStatus::Active: return "active";
    case LinkStatus::Degraded: return "degraded";
    case LinkStatus::Blocked: return "blocked";
  }
  return "?";
}

LinkStatus detect_state(double sinr_db, const Thresholds& th, bool hard_block) {
  if (th.degrade_db < th.blocked_db) {
    throw std::invalid_argument("detect_state: degrade threshold below blocked");
  }
  if (hard_block || sinr_db < th.blocked_db) return LinkStatus::Blocked;
  if (sinr_db < th.degrade_db) return LinkStatus::Degraded;
  return LinkStatus::Active;
}

int arbitrate(std::span<const PendingRequest> requests) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(requests.size()); ++i) {
    if (best < 0) {
      best = i;
      continue;
    }
    const PendingRequest& a = requests[static_cast<std::size_t>(i)];
    const PendingRequest& b = requests[static_cast<std::size_t>(best)];
    const bool a_deg = a.severity == LinkStatus::Degraded;
    const bool b_deg = b.severity == LinkStatus::Degraded;
    if (a_deg != b_deg) {
      if (a_deg) best = i;
    } else if (a.pair_id < b.pair_id) {
      best = i;
    }
  }
  return best;
}

TrackingSim::TrackingSim(channel::Scenario scenario,
                         std::vector<channel::BeamPair> pairs,
                         int operating_links, TrackingConfig cfg,
                         BlockageProcess blockage, std::uint64_t seed)
    : sc_(std::move(scenario)), pairs_(std::move(pairs)), cfg_(cfg) {
  if (operating_links < 1 ||
      operating_links > static_cast<int>(pairs_.size())) {
    throw std::invalid_argument("tracking: operating link count out of range");
  }
  if (cfg_.data_period < 1 || cfg_.probe_period < 1 || cfg_.ack_delay < 1 ||
      cfg_.ack_timeout <= cfg_.ack_delay || cfg_.ack_timeout > cfg_.data_period ||
      cfg_.switch_window <= cfg_.ack_delay || cfg_.blocked_after_missed < 1 ||
      cfg_.degrade_margin_db < 0.0) {
    throw std::invalid_argument("tracking: inconsistent protocol timing");
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs_.size(); ++j) {
      if (pairs_[i].id == pairs_[j].id) {
        throw std::invalid_argument("tracking: duplicate pair ids");
      }
    }
  }
  th_ = Thresholds{cfg_.eta_db + cfg_.degrade_margin_db, cfg_.eta_db};
  links_.resize(static_cast<std::size_t>(operating_links));
  for (int i = 0; i < operating_links; ++i) {
    LinkState& l = links_[static_cast<std::size_t>(i)];
    l.link = i;
    l.pair_index = i;
    l.initial_pair_index = i;
  }
  for (int i = operating_links; i < static_cast<int>(pairs_.size()); ++i) {
    candidates_.push_back(i);
  }
  build_blockage(blockage, seed);
}

std::string TrackingSim::tx(int link) const {
  return "vMTX" + std::to_string(link + 1);
}

std::string TrackingSim::rx(int link) const {
  return "vMRX" + std::to_string(link + 1);
}

int TrackingSim::pair_id(int pair_index) const {
  return pairs_[static_cast<std::size_t>(pair_index)].id;
}

void TrackingSim::build_blockage(const BlockageProcess& blockage,
                                 std::uint64_t seed) {
  blocks_.resize(pairs_.size());
  using Mode = BlockageProcess::Mode;
  switch (blockage.mode) {
    case Mode::None:
      break;
    case Mode::Scripted:
      for (const BlockageInterval& iv : blockage.intervals) {
        const auto at = std::find_if(
            pairs_.begin(), pairs_.end(),
            [&iv](const channel::BeamPair& p) { return p.id == iv.pair_id; });
        if (at == pairs_.end()) {
          throw std::invalid_argument("tracking: interval names unknown pair");
        }
        if (iv.to <= iv.from) {
          throw std::invalid_argument("tracking: empty blockage interval");
        }
        blocks_[static_cast<std::size_t>(at - pairs_.begin())].push_back(
            StampedInterval{iv.from, iv.to, iv.full, iv.atten_db, false});
      }
      break;
    case Mode::Bernoulli:
      for (std::size_t p = 0; p < pairs_.size(); ++p) {
        sim::RngStream rng(seed, "blockage/pair" + std::to_string(pairs_[p].id));
        for (sim::SimTime t = 0; t < cfg_.t_end; t += blockage.epoch_us) {
          if (rng.bernoulli(blockage.p)) {
            blocks_[p].push_back(
                StampedInterval{t, t + blockage.epoch_us, true, 0.0, false});
          }
        }
      }
      break;
    case Mode::OnOff:
      for (std::size_t p = 0; p < pairs_.size(); ++p) {
        sim::RngStream rng(seed, "blockage/pair" + std::to_string(pairs_[p].id));
        sim::SimTime t = 0;
        while (t < cfg_.t_end) {
          t += static_cast<sim::SimTime>(
              std::ceil(rng.exponential(blockage.mean_off_us)));
          if (t >= cfg_.t_end) break;
          const sim::SimTime on = static_cast<sim::SimTime>(
              std::ceil(rng.exponential(blockage.mean_on_us)));
          blocks_[p].push_back(StampedInterval{t, t + on, true, 0.0, false});
          t += on;
        }
      }
      break;
  }
}

bool TrackingSim::pair_clear(int pair_index, sim::SimTime t) const {
  for (const StampedInterval& iv : blocks_[static_cast<std::size_t>(pair_index)]) {
    if (iv.full && t >= iv.from && t < iv.to) return false;
  }
  return true;
}

double TrackingSim::pair_attenuation(int pair_index, sim::SimTime t) const {
  double atten = 0.0;
  for (const StampedInterval& iv : blocks_[static_cast<std::size_t>(pair_index)]) {
    if (!iv.full && !iv.refined && t >= iv.from && t < iv.to) {
      atten += iv.atten_db;
    }
  }
  return atten;
}

double TrackingSim::effective_sinr(int link, sim::SimTime t) const {
  const LinkState& me = links_[static_cast<std::size_t>(link)];
  std::vector<channel::ActiveBeam> active;
  active.push_back(channel::ActiveBeam{
      pairs_[static_cast<std::size_t>(me.pair_index)], cfg_.pt_dbm});
  for (const LinkState& other : links_) {
    if (other.link == link || other.status == LinkStatus::Blocked) continue;
    active.push_back(channel::ActiveBeam{
        pairs_[static_cast<std::size_t>(other.pair_index)], cfg_.pt_dbm});
  }
  // Partial obstructions attenuate the victim's own path.
  return channel::sinr_db(0, active, sc_.radio) -
         pair_attenuation(me.pair_index, t);
}

bool TrackingSim::deliverable(int link, sim::SimTime t) const {
  const LinkState& l = links_[static_cast<std::size_t>(link)];
  const bool hard = !pair_clear(l.pair_index, t);
  return detect_state(effective_sinr(link, t), th_, hard) != LinkStatus::Blocked;
}

void TrackingSim::start() {
  for (std::size_t p = 0; p < blocks_.size(); ++p) {
    for (const StampedInterval& iv : blocks_[p]) {
      const std::string what = iv.full
                                   ? std::string("full")
                                   : "atten_db=" + std::to_string(iv.atten_db);
      sim_.schedule(iv.from, "env", "BLOCK_ON",
                    "pair=" + std::to_string(pair_id(static_cast<int>(p))) +
                        "," + what);
      sim_.schedule(iv.to, "env", "BLOCK_OFF",
                    "pair=" + std::to_string(pair_id(static_cast<int>(p))));
    }
  }
  for (const LinkState& l : links_) {
    schedule_data(l.link, cfg_.data_period);
  }
}

void TrackingSim::schedule_data(int link, sim::SimTime at) {
  const int generation = links_[static_cast<std::size_t>(link)].loop_generation;
  sim_.schedule_silent(at, [this, link, generation] {
    send_data(link, generation);
  });
}

void TrackingSim::send_data(int link, int generation) {
  LinkState& l = links_[static_cast<std::size_t>(link)];
  if (generation != l.loop_generation) return;  // superseded loop
  if (l.status == LinkStatus::Blocked) return;  // loop dies until restored

  const std::uint64_t seq = ++l.next_seq;
  std::string details = "seq=" + std::to_string(seq);

  bool carries_order = false;
  HelperOrder pending_order;
  if (order_ && grant_ && !grant_->refine && grant_->helper == link &&
      l.status == LinkStatus::Active) {
    pending_order = *order_;
    order_.reset();
    carries_order = true;
    details += ",BBPO=1,CBPO=" + std::to_string(pending_order.order);
  }
  sim_.emit(tx(link), "DATA", details);
  ++l.data_frames;

  if (carries_order) {
    // The co-located arrays share state at zero cost: the target reacts in
    // the same tick the helper's frame goes out.
    on_fields_sent(link, pending_order.target, pending_order.order);
  }

  const sim::SimTime sent_at = sim_.now();
  sim_.schedule_silent(sent_at + cfg_.ack_delay, [this, link, seq] {
    LinkState& me = links_[static_cast<std::size_t>(link)];
    if (!deliverable(link, sim_.now())) return;  // frame lost; timeout decides
    me.last_acked = seq;
    me.missed_acks = 0;
    ++me.ack_frames;
    sim_.emit(rx(link), "ACK", "seq=" + std::to_string(seq));
    evaluate_on_ack(link);
  });
  sim_.schedule_silent(sent_at + cfg_.ack_timeout, [this, link, seq] {
    on_ack_timeout(link, seq);
  });
  schedule_data(link, sent_at + cfg_.data_period);
}

void TrackingSim::on_ack_timeout(int link, std::uint64_t seq) {
  LinkState& l = links_[static_cast<std::size_t>(link)];
  if (l.last_acked >= seq) return;
  if (l.status == LinkStatus::Blocked) return;
  ++l.missed_acks;
  sim_.emit(tx(link), "ACK_TIMEOUT",
            "seq=" + std::to_string(seq) +
                ",missed=" + std::to_string(l.missed_acks));
  if (l.missed_acks >= cfg_.blocked_after_missed) mark_blocked(link);
}

void TrackingSim::mark_blocked(int link) {
  LinkState& l = links_[static_cast<std::size_t>(link)];
  l.status = LinkStatus::Blocked;
  ++l.loop_generation;  // stop the data loop
  sim_.emit(tx(link), "DETECT_BLOCKED",
            "pair=" + std::to_string(pair_id(l.pair_index)));
  if (grant_ && !grant_->refine && grant_->helper == link) {
    on_helper_lost(link);
  }
  if (grant_ && grant_->link == link) {
    // Already under recovery (degrade refinement); the refine response
    // path escalates, nothing to queue here.
    return;
  }
  request_procedure(link, LinkStatus::Blocked);
}

void TrackingSim::evaluate_on_ack(int link) {
  LinkState& l = links_[static_cast<std::size_t>(link)];
  const bool hard = !pair_clear(l.pair_index, sim_.now());
  const LinkStatus st = detect_state(effective_sinr(link, sim_.now()), th_, hard);
  if (st == LinkStatus::Degraded && l.status == LinkStatus::Active) {
    l.status = LinkStatus::Degraded;
    sim_.emit(tx(link), "DETECT_DEGRADED",
              "pair=" + std::to_string(pair_id(l.pair_index)));
    if (grant_ && !grant_->refine && grant_->helper == link) {
      // A degraded helper can no longer carry re-steering orders.
      on_helper_lost(link);
    }
    request_procedure(link, LinkStatus::Degraded);
  } else if (st == LinkStatus::Active && l.status == LinkStatus::Degraded) {
    l.status = LinkStatus::Active;
    sim_.emit(tx(link), "RECOVERED",
              "pair=" + std::to_string(pair_id(l.pair_index)));
    withdraw_request(link);
  }
}

void TrackingSim::request_procedure(int link, LinkStatus severity) {
  for (PendingRequest& r : pending_) {
    if (r.link == link) {
      r.severity = severity;
      try_grant();
      return;
    }
  }
  const LinkState& l = links_[static_cast<std::size_t>(link)];
  pending_.push_back(PendingRequest{link, severity, pair_id(l.pair_index)});
  sim_.emit(tx(link), "REQUEST",
            std::string("type=") +
                (severity == LinkStatus::Degraded ? "refine" : "track") +
                ",pair=" + std::to_string(pair_id(l.pair_index)));
  try_grant();
}

void TrackingSim::withdraw_request(int link) {
  std::erase_if(pending_,
                [link](const PendingRequest& r) { return r.link == link; });
}

void TrackingSim::try_grant() {
  if (grant_ || pending_.empty()) return;
  const int idx = arbitrate(pending_);
  const PendingRequest req = pending_[static_cast<std::size_t>(idx)];
  pending_.erase(pending_.begin() + idx);
  ++procedures_started_;
  ++concurrent_;
  max_concurrent_ = std::max(max_concurrent_, concurrent_);
  const bool refine = req.severity == LinkStatus::Degraded;
  sim_.emit("MTX", "PROC_START",
            std::string("type=") + (refine ? "refine" : "track") +
                ",link=" + tx(req.link));
  if (refine) {
    begin_refine(req.link);
  } else {
    begin_track(req.link);
  }
}

void TrackingSim::begin_refine(int link) {
  grant_ = Grant{link, true, -1, 0};
  LinkState& l = links_[static_cast<std::size_t>(link)];
  sim_.emit(tx(link), "REFINE", "pair=" + std::to_string(pair_id(l.pair_index)));
  sim_.schedule_silent(sim_.now() + cfg_.refine_duration, [this, link] {
    if (!grant_ || !grant_->refine || grant_->link != link) return;
    LinkState& me = links_[static_cast<std::size_t>(link)];
    if (pair_clear(me.pair_index, sim_.now())) {
      // The retrained pattern compensates the current partial obstruction.
      for (StampedInterval& iv :
           blocks_[static_cast<std::size_t>(me.pair_index)]) {
        if (!iv.full && sim_.now() >= iv.from && sim_.now() < iv.to) {
          iv.refined = true;
        }
      }
      sim_.emit(rx(link), "REFINE_DONE",
                "pair=" + std::to_string(pair_id(me.pair_index)));
      me.status = detect_state(effective_sinr(link, sim_.now()), th_, false);
      ++me.loop_generation;  // restart the loop whatever state it was in
      schedule_data(link, sim_.now() + cfg_.data_period);
      finish_procedure("refine", link,
                       me.status == LinkStatus::Active ? "refined" : "partial");
      if (me.status == LinkStatus::Blocked) {
        request_procedure(link, LinkStatus::Blocked);
      }
    } else {
      // Hard shadowing arrived mid-exchange: hand over to re-steering.
      sim_.emit(tx(link), "ESCALATE",
                "pair=" + std::to_string(pair_id(me.pair_index)));
      me.status = LinkStatus::Blocked;
      ++me.loop_generation;
      finish_procedure("refine", link, "escalated");
      request_procedure(link, LinkStatus::Blocked);
    }
  });
}

void TrackingSim::begin_track(int link) {
  grant_ = Grant{link, false, -1, 0};
  if (candidates_.empty()) {
    finish_procedure("track", link, "no_candidates");
    start_probing(link);
    return;
  }
  int helper = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (const LinkState& other : links_) {
    if (other.link == link || other.status != LinkStatus::Active) continue;
    const double snr = effective_sinr(other.link, sim_.now());
    const int id = pair_id(other.pair_index);
    if (snr > best || (snr == best && helper >= 0 &&
                       id < pair_id(links_[static_cast<std::size_t>(helper)]
                                        .pair_index))) {
      best = snr;
      helper = other.link;
    }
  }
  if (helper < 0) {
    finish_procedure("track", link, "no_helper");
    start_probing(link);
    return;
  }
  grant_->helper = helper;
  sim_.emit("MTX", "HELPER",
            "helper=" + tx(helper) + ",target=" + tx(link));
  issue_order(link, 1);
}

void TrackingSim::issue_order(int target, int order) {
  grant_->attempt = order;
  order_ = HelperOrder{target, order};
}

void TrackingSim::on_fields_sent(int helper, int target, int order) {
  (void)helper;
  LinkState& t = links_[static_cast<std::size_t>(target)];
  if (order == 0) {
    sim_.emit(tx(target), "REVERT",
              "pair=" + std::to_string(pair_id(t.initial_pair_index)) +
                  ",order=0");
    t.pair_index = t.initial_pair_index;
    t.candidate_order = 0;
    finish_procedure("track", target, "reverted");
    start_probing(target);
    return;
  }
  const int cand = candidates_[static_cast<std::size_t>(order - 1)];
  t.pair_index = cand;
  t.candidate_order = order;
  sim_.emit(tx(target), "SWITCH",
            "pair=" + std::to_string(pair_id(cand)) +
                ",order=" + std::to_string(order));
  const sim::SimTime at = sim_.now() + cfg_.qosnull_delay;
  sim_.schedule_silent(at, [this, target, order] {
    if (!grant_ || grant_->refine || grant_->link != target ||
        grant_->attempt != order) {
      return;  // procedure moved on
    }
    LinkState& me = links_[static_cast<std::size_t>(target)];
    sim_.emit(tx(target), "QOSNULL",
              "pair=" + std::to_string(pair_id(me.pair_index)));
    sim_.schedule_silent(sim_.now() + cfg_.ack_delay, [this, target, order] {
      if (!grant_ || grant_->refine || grant_->link != target ||
          grant_->attempt != order) {
        return;
      }
      if (!deliverable(target, sim_.now())) return;
      LinkState& in = links_[static_cast<std::size_t>(target)];
      sim_.emit(rx(target), "ACK",
                "qosnull,pair=" + std::to_string(pair_id(in.pair_index)));
      // The acknowledged switch is what consumes the candidate; probe
      // restores re-confirm a pair without touching the pool.
      candidates_.erase(candidates_.begin() + (order - 1));
      restore(target, in.pair_index, order);
      finish_procedure("track", target, "restored");
    });
    sim_.schedule_silent(sim_.now() + cfg_.switch_window, [this, target, order] {
      on_attempt_timeout(target, order);
    });
  });
}

void TrackingSim::on_attempt_timeout(int target, int order) {
  if (!grant_ || grant_->refine || grant_->link != target ||
      grant_->attempt != order) {
    return;  // restored or superseded
  }
  if (links_[static_cast<std::size_t>(target)].status == LinkStatus::Active) {
    return;
  }
  sim_.emit(tx(target), "ACK_TIMEOUT", "qosnull,order=" + std::to_string(order));
  const int next = order + 1;
  if (next <= static_cast<int>(candidates_.size())) {
    issue_order(target, next);
  } else {
    issue_order(target, 0);  // exhausted: revert directive
  }
}

void TrackingSim::on_helper_lost(int helper) {
  const int target = grant_->link;
  sim_.emit("MTX", "ABORT", "helper=" + tx(helper) + ",target=" + tx(target));
  LinkState& t = links_[static_cast<std::size_t>(target)];
  if (t.pair_index != t.initial_pair_index) {
    // Only an acknowledged switch commits; fall back to the initial beam.
    sim_.emit(tx(target), "REVERT",
              "pair=" + std::to_string(pair_id(t.initial_pair_index)) +
                  ",order=0,reason=abort");
    t.pair_index = t.initial_pair_index;
    t.candidate_order = 0;
  }
  pending_.push_back(PendingRequest{target, LinkStatus::Blocked,
                                    pair_id(t.pair_index)});
  finish_procedure("track", target, "aborted");
}

void TrackingSim::finish_procedure(const std::string& type, int link,
                                   const std::string& outcome) {
  sim_.emit("MTX", "PROC_END",
            "type=" + type + ",link=" + tx(link) + ",outcome=" + outcome);
  grant_.reset();
  order_.reset();
  --concurrent_;
  try_grant();
}

void TrackingSim::start_probing(int link) {
  const sim::SimTime at = sim_.now() + cfg_.probe_period;
  sim_.schedule_silent(at, [this, link] { send_probe(link); });
}

void TrackingSim::send_probe(int link) {
  LinkState& l = links_[static_cast<std::size_t>(link)];
  if (l.status != LinkStatus::Blocked) return;  // restored meanwhile
  ++l.probe_frames;
  sim_.emit(tx(link), "QOSNULL",
            "probe,pair=" + std::to_string(pair_id(l.pair_index)));
  sim_.schedule_silent(sim_.now() + cfg_.ack_delay, [this, link] {
    LinkState& me = links_[static_cast<std::size_t>(link)];
    if (me.status != LinkStatus::Blocked) return;
    if (!deliverable(link, sim_.now())) return;
    sim_.emit(rx(link), "ACK",
              "probe,pair=" + std::to_string(pair_id(me.pair_index)));
    restore(link, me.pair_index, me.candidate_order);
  });
  // Fixed cadence from probe to probe, independent of the ack outcome.
  sim_.schedule_silent(sim_.now() + cfg_.probe_period,
                       [this, link] { send_probe(link); });
}

void TrackingSim::restore(int link, int new_pair_index, int order) {
  LinkState& l = links_[static_cast<std::size_t>(link)];
  l.pair_index = new_pair_index;
  l.candidate_order = order;
  l.status = LinkStatus::Active;
  l.missed_acks = 0;
  sim_.emit(tx(link), "RESTORED",
            "pair=" + std::to_string(pair_id(new_pair_index)) +
                ",order=" + std::to_string(order));
  ++l.loop_generation;
  schedule_data(link, sim_.now() + cfg_.data_period);
}

const sim::EventTrace& TrackingSim::run() {
  if (ran_) return sim_.trace();
  ran_ = true;
  start();
  return sim_.run_until(cfg_.t_end);
}

}  // namespace beamspace::tracking
