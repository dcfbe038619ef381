#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace beamspace::sim {

// Virtual time in integer microsecond ticks.
using SimTime = std::int64_t;

struct TraceEntry {
  SimTime at = 0;
  std::string actor;
  std::string kind;
  std::string details;
};

using EventTrace = std::vector<TraceEntry>;

// One line per entry: ticks<TAB>actor<TAB>kind<TAB>details
std::string format_trace(const EventTrace& trace);
void write_trace(std::ostream& os, const EventTrace& trace);

// Deterministic event-driven scheduler. Events fire in (time, insertion
// order); an action may schedule further events at or after the current
// clock. Scheduling into the virtual past throws.
class Simulator {
 public:
  using Action = std::function<void()>;

  SimTime now() const { return now_; }

  void schedule(SimTime at, std::string actor, std::string kind,
                std::string details = {}, Action action = {});

  // Driver event that leaves no trace line of its own; the action usually
  // emits one or more entries once their content is known.
  void schedule_silent(SimTime at, Action action);

  // Appends a trace entry at the current clock.
  void emit(std::string actor, std::string kind, std::string details = {});

  // Processes every event with timestamp <= t_end, then parks the clock at
  // t_end. Later events stay queued for a subsequent call.
  const EventTrace& run_until(SimTime t_end);

  const EventTrace& trace() const { return trace_; }
  std::size_t scheduled_count() const { return scheduled_; }
  std::size_t processed_count() const { return processed_; }
  std::size_t pending_count() const { return heap_.size(); }

 private:
  struct Pending {
    SimTime at = 0;
    std::uint64_t seq = 0;
    std::string actor;
    std::string kind;
    std::string details;
    Action action;
    bool silent = false;
  };

  static bool later(const Pending& a, const Pending& b) {
    if (a.at != b.at) return a.at > b.at;
    return a.seq > b.seq;
  }

  std::vector<Pending> heap_;
  EventTrace trace_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::size_t scheduled_ = 0;
  std::size_t processed_ = 0;
};

// Named pseudo-random stream: the (seed, label) pair fully determines the
// sequence, independent of platform and of draws made on other streams.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label);

  std::uint64_t next_u64();
  double next_double();  // [0, 1)
  double uniform(double lo, double hi);
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive
  bool bernoulli(double p);
  double exponential(double mean);

 private:
  std::uint64_t state_ = 0;
};

}  // namespace beamspace::sim
