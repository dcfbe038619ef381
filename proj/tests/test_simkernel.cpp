#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "beamspace/simkernel.hpp"

using namespace beamspace::sim;

TEST_CASE("events fire in time order with FIFO ties") {
  Simulator sim;
  std::vector<int> order;
  sim.schedule(20, "a", "second", "", [&] { order.push_back(2); });
  sim.schedule(10, "a", "first", "", [&] { order.push_back(1); });
  sim.schedule(20, "a", "third", "", [&] { order.push_back(3); });
  sim.run_until(100);
  CHECK(order == std::vector<int>{1, 2, 3});
  const EventTrace& t = sim.trace();
  REQUIRE(t.size() == 3);
  CHECK(t[0].kind == "first");
  CHECK(t[1].kind == "second");
  CHECK(t[2].kind == "third");
}

TEST_CASE("actions may schedule at the current instant but not in the past") {
  Simulator sim;
  int fired = 0;
  sim.schedule(5, "a", "k", "", [&] {
    sim.schedule(5, "a", "same-tick", "", [&] { ++fired; });
    CHECK_THROWS_AS(sim.schedule(4, "a", "past", "", [] {}),
                    std::invalid_argument);
  });
  sim.run_until(10);
  CHECK(fired == 1);
}

TEST_CASE("run_until processes inclusive bound and parks the clock") {
  Simulator sim;
  int hits = 0;
  sim.schedule(10, "a", "at-bound", "", [&] { ++hits; });
  sim.schedule(11, "a", "beyond", "", [&] { ++hits; });
  sim.run_until(10);
  CHECK(hits == 1);
  CHECK(sim.now() == 10);
  CHECK(sim.pending_count() == 1);
  sim.run_until(20);
  CHECK(hits == 2);
  CHECK(sim.now() == 20);
}

TEST_CASE("silent events run actions without trace entries") {
  Simulator sim;
  int fired = 0;
  sim.schedule_silent(3, [&] {
    ++fired;
    sim.emit("env", "VISIBLE", "x=1");
  });
  sim.run_until(5);
  CHECK(fired == 1);
  REQUIRE(sim.trace().size() == 1);
  CHECK(sim.trace()[0].at == 3);
  CHECK(sim.trace()[0].kind == "VISIBLE");
}

TEST_CASE("identical schedules replay to identical traces") {
  const auto run = [] {
    Simulator sim;
    RngStream rng(7, "replay");
    for (int i = 0; i < 50; ++i) {
      const SimTime at = rng.uniform_int(0, 1000);
      sim.schedule(at, "a", "k", std::to_string(i), [] {});
    }
    sim.run_until(1000);
    return format_trace(sim.trace());
  };
  CHECK(run() == run());
}

TEST_CASE("trace format is ticks tab actor tab kind tab details") {
  EventTrace t{{12, "vMTX1", "DATA", "seq=3"}};
  CHECK(format_trace(t) == "12\tvMTX1\tDATA\tseq=3\n");
}

TEST_CASE("stream draws depend on seed and label only") {
  RngStream a(42, "alpha");
  RngStream b(42, "alpha");
  RngStream c(42, "beta");
  RngStream d(43, "alpha");
  bool all_equal = true;
  bool c_differs = false;
  bool d_differs = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    if (va != b.next_u64()) all_equal = false;
    if (va != c.next_u64()) c_differs = true;
    if (va != d.next_u64()) d_differs = true;
  }
  CHECK(all_equal);
  CHECK(c_differs);
  CHECK(d_differs);
}

TEST_CASE("next_double lies in the unit interval") {
  RngStream rng(1, "unit");
  for (int i = 0; i < 10'000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_int covers both inclusive endpoints") {
  RngStream rng(5, "range");
  std::set<std::int64_t> seen;
  for (int i = 0; i < 1'000; ++i) {
    const std::int64_t v = rng.uniform_int(3, 6);
    CHECK(v >= 3);
    CHECK(v <= 6);
    seen.insert(v);
  }
  CHECK(seen == std::set<std::int64_t>{3, 4, 5, 6});
}

TEST_CASE("degenerate probability parameters are exact") {
  RngStream rng(9, "bern");
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));
  }
}

TEST_CASE("exponential matches its mean to sampling accuracy") {
  RngStream rng(11, "exp");
  double sum = 0.0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) sum += rng.exponential(5.0);
  CHECK(std::abs(sum / n - 5.0) < 0.1);
}
