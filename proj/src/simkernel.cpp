#include "beamspace/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace beamspace::sim {

std::string format_trace(const EventTrace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

void write_trace(std::ostream& os, const EventTrace& trace) {
  for (const TraceEntry& e : trace) {
    os << e.at << '\t' << e.actor << '\t' << e.kind << '\t' << e.details
       << '\n';
  }
}

void Simulator::schedule(SimTime at, std::string actor, std::string kind,
                         std::string details, Action action) {
  if (at < now_) {
    throw std::invalid_argument("schedule at t=" + std::to_string(at) +
                                " is in the past (now=" +
                                std::to_string(now_) + ", kind=" + kind + ")");
  }
  heap_.push_back(Pending{at, next_seq_++, std::move(actor), std::move(kind),
                          std::move(details), std::move(action), false});
  std::push_heap(heap_.begin(), heap_.end(), later);
  ++scheduled_;
}

void Simulator::schedule_silent(SimTime at, Action action) {
  if (at < now_) {
    throw std::invalid_argument("schedule at t=" + std::to_string(at) +
                                " is in the past (now=" +
                                std::to_string(now_) + ")");
  }
  heap_.push_back(Pending{at, next_seq_++, {}, {}, {}, std::move(action), true});
  std::push_heap(heap_.begin(), heap_.end(), later);
  ++scheduled_;
}

void Simulator::emit(std::string actor, std::string kind, std::string details) {
  trace_.push_back(
      TraceEntry{now_, std::move(actor), std::move(kind), std::move(details)});
}

const EventTrace& Simulator::run_until(SimTime t_end) {
  while (!heap_.empty() && heap_.front().at <= t_end) {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    Pending ev = std::move(heap_.back());
    heap_.pop_back();
    now_ = ev.at;
    if (!ev.silent) {
      trace_.push_back(TraceEntry{ev.at, ev.actor, ev.kind, ev.details});
    }
    ++processed_;
    if (ev.action) ev.action();
  }
  if (t_end > now_) now_ = t_end;
  return trace_;
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view label) {
  std::uint64_t mix = seed ^ 0x6a09e667f3bcc909ull;
  state_ = splitmix64(mix) ^ fnv1a(label);
  // Burn one step so trivially related labels decorrelate.
  splitmix64(state_);
}

std::uint64_t RngStream::next_u64() { return splitmix64(state_); }

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
  return lo + static_cast<std::int64_t>(next_u64() % span);
}

bool RngStream::bernoulli(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("bernoulli: p outside [0,1]");
  return next_double() < p;
}

double RngStream::exponential(double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("exponential: mean <= 0");
  double u = next_double();
  // next_double() < 1, so the argument of log stays positive.
  return -mean * std::log1p(-u);
}

}  // namespace beamspace::sim
