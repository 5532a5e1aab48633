#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fog/simcore/engine.hpp"
#include "fog/simcore/rng.hpp"
#include "oracles.hpp"

using namespace fog::simcore;

namespace {

Handler record(std::vector<int>& out, int tag) {
  return [&out, tag](Engine&, const SimEvent&) { out.push_back(tag); };
}

}  // namespace

TEST_CASE("zero-delay event fires after already-queued same-time events") {
  Engine e;
  std::vector<int> order;
  e.schedule(0, record(order, 1));
  e.schedule(0, [&](Engine& eng, const SimEvent&) {
    order.push_back(2);
    eng.schedule(0, record(order, 4));
  });
  e.schedule(0, record(order, 3));
  e.run();
  CHECK(order == std::vector<int>{1, 2, 3, 4});
  CHECK(e.now() == 0);
}

TEST_CASE("delays add to the current clock") {
  Engine e;
  SimTime fired = 0;
  e.schedule(5000, [&](Engine& eng, const SimEvent&) {
    eng.schedule(1000, [&](Engine& inner, const SimEvent&) { fired = inner.now(); });
  });
  e.run();
  CHECK(fired == 6000);
}

TEST_CASE("equal fire times dispatch in insertion order") {
  Engine e;
  e.enable_log(true);
  std::vector<int> order;
  e.schedule(10, record(order, 1), 7, 100);
  e.schedule(10, record(order, 2), 7, 200);
  e.schedule(10, record(order, 3), 7, 300);
  e.run();
  REQUIRE(e.dispatch_log().size() == 3);
  CHECK(order == std::vector<int>{1, 2, 3});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(e.dispatch_log()[i].fire_time == 10);
    CHECK(e.dispatch_log()[i].target == 100 * (i + 1));
  }
  CHECK(e.dispatch_log()[0].sequence < e.dispatch_log()[1].sequence);
  CHECK(e.dispatch_log()[1].sequence < e.dispatch_log()[2].sequence);
}

TEST_CASE("run_until on an empty queue advances the clock") {
  Engine e;
  CHECK(e.run_until(10) == 0);
  CHECK(e.now() == 10);
}

TEST_CASE("run_until dispatches only events at or before t_end") {
  Engine e;
  std::vector<int> order;
  for (SimTime t : {1, 2, 3, 4, 5}) e.schedule(t * 100, record(order, static_cast<int>(t)));
  e.schedule(600, record(order, 6));
  e.schedule(700, record(order, 7));
  CHECK(e.run_until(500) == 5);
  CHECK(e.now() == 500);
  CHECK(e.pending() == 2);
  CHECK(e.run() == 2);
  CHECK(e.now() == 700);
}

TEST_CASE("run_until includes an event exactly at t_end") {
  Engine e;
  int n = 0;
  e.schedule(50, [&](Engine&, const SimEvent&) { ++n; });
  CHECK(e.run_until(50) == 1);
  CHECK(n == 1);
}

TEST_CASE("cancelled events never dispatch") {
  Engine e;
  std::vector<int> order;
  e.schedule(10, record(order, 1));
  auto h = e.schedule(20, record(order, 2));
  e.schedule(30, record(order, 3));
  CHECK(e.cancel(h));
  CHECK_FALSE(e.cancel(h));
  e.run();
  CHECK(order == std::vector<int>{1, 3});
}

TEST_CASE("a throwing handler surfaces the failing event") {
  Engine e;
  e.schedule(5, [](Engine&, const SimEvent&) {}, 1, 11);
  e.schedule(9, [](Engine&, const SimEvent&) { throw std::runtime_error("boom"); }, 2, 22);
  e.schedule(12, [](Engine&, const SimEvent&) {}, 3, 33);
  try {
    e.run();
    FAIL("expected EventFailure");
  } catch (const EventFailure& f) {
    CHECK(f.event().fire_time == 9);
    CHECK(f.event().kind == 2);
    CHECK(f.event().target == 22);
    CHECK_THROWS_AS(std::rethrow_exception(f.cause()), std::runtime_error);
  }
}

TEST_CASE("time overflow is rejected") {
  Engine e;
  e.run_until(10);
  CHECK_THROWS_AS(e.schedule(std::numeric_limits<SimTime>::max(), [](Engine&, const SimEvent&) {}), TimeOverflow);
}

TEST_CASE("scheduling after finish is rejected") {
  Engine e;
  e.finish();
  CHECK_THROWS_AS(e.schedule(1, [](Engine&, const SimEvent&) {}), EngineFinished);
}

TEST_CASE("dispatch order is strictly increasing and the clock never decreases") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Engine e;
    e.enable_log(true);
    RngStream rng(seed, "sched");
    SimTime last_now = 0;
    bool monotone = true;
    std::function<void(Engine&, const SimEvent&)> h = [&](Engine& eng, const SimEvent&) {
      if (eng.now() < last_now) monotone = false;
      last_now = eng.now();
      if (rng.below(3) == 0 && eng.dispatch_log().size() < 400) eng.schedule(rng.below(50), h);
    };
    for (int i = 0; i < 100; ++i) e.schedule(rng.below(200), h);
    e.run();
    CHECK(monotone);
    const auto& log = e.dispatch_log();
    for (std::size_t i = 1; i < log.size(); ++i) {
      const bool increasing = log[i - 1].fire_time < log[i].fire_time ||
                              (log[i - 1].fire_time == log[i].fire_time && log[i - 1].sequence < log[i].sequence);
      CHECK(increasing);
    }
  }
}

TEST_CASE("replays with the same seed give identical dispatch logs") {
  auto replay = [](std::uint64_t seed) {
    Engine e;
    e.enable_log(true);
    RngStream rng(seed, "replay");
    for (int i = 0; i < 200; ++i) e.schedule(rng.below(1000), [](Engine&, const SimEvent&) {}, i % 5, rng.next_u64());
    e.run();
    return e.dispatch_log();
  };
  CHECK(replay(42) == replay(42));
  CHECK_FALSE(replay(42) == replay(43));
}

TEST_CASE("ms_to_us rounds to the nearest microsecond") {
  CHECK(ms_to_us(33.27) == 33270);
  CHECK(ms_to_us(0.0004) == 0);
  CHECK(ms_to_us(0.0006) == 1);
  CHECK(us_to_ms(1500) == doctest::Approx(1.5));
}

TEST_CASE("constant distribution is degenerate") {
  RngStream s(1, "c");
  for (int i = 0; i < 100; ++i) CHECK(s.draw(Constant{7.5}) == 7.5);
}

TEST_CASE("zero-variance truncated normal returns its mean") {
  RngStream s(1, "t");
  for (int i = 0; i < 100; ++i) CHECK(s.draw(TruncNormal{10, 0, 0}) == 10.0);
}

TEST_CASE("truncated normal (100, 5, 50) averages 100 within 0.1") {
  RngStream s(2024, "lln");
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += s.draw(TruncNormal{100, 5, 50});
  CHECK(std::abs(sum / n - 100.0) < 0.1);
}

TEST_CASE("truncated normal respects its lower bound and matches the truncated mean") {
  const TruncNormal d{10, 8, 5};
  RngStream s(9, "trunc");
  double sum = 0, lo = 1e300;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = s.draw(d);
    lo = std::min(lo, v);
    sum += v;
  }
  CHECK(lo >= 5.0);
  const double expected = oracle::latency_mean(d);
  CHECK(std::abs(sum / n - expected) < 4 * 6.0 / std::sqrt(n));
  CHECK(mean(d) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("uniform draws stay in range with the right mean") {
  RngStream s(3, "u");
  double sum = 0;
  bool in_range = true;
  for (int i = 0; i < 100000; ++i) {
    const double v = s.draw(Uniform{2, 4});
    in_range &= v >= 2 && v <= 4;
    sum += v;
  }
  CHECK(in_range);
  CHECK(std::abs(sum / 100000 - 3.0) < 0.01);
}

TEST_CASE("invalid distribution parameters are rejected") {
  RngStream s(1, "bad");
  CHECK_THROWS_AS(s.draw(TruncNormal{1, -1, 0}), ParameterError);
  CHECK_THROWS_AS(s.draw(Uniform{3, 2}), ParameterError);
  CHECK_THROWS_AS(validate(TruncNormal{std::nan(""), 1, 0}), ParameterError);
}

TEST_CASE("streams are reproducible and distinct ids diverge") {
  RngStream a(77, "node-a"), b(77, "node-a"), c(77, "node-b"), d(78, "node-a");
  bool all_equal = true, c_differs = false, d_differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    all_equal &= x == b.next_u64();
    c_differs |= x != c.next_u64();
    d_differs |= x != d.next_u64();
  }
  CHECK(all_equal);
  CHECK(c_differs);
  CHECK(d_differs);
}

TEST_CASE("independent streams are uncorrelated") {
  RngStream a(5, "x"), b(5, "y");
  const int n = 100000;
  double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform01(), y = b.uniform01();
    sa += x, sb += y, sab += x * y, saa += x * x, sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double r = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::abs(r) < 0.02);
}

TEST_CASE("FNV-1a stream ids match published vectors") {
  CHECK(stream_id_for("") == 0xcbf29ce484222325ULL);
  CHECK(stream_id_for("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(stream_id_for("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("splitmix64 matches the reference sequence") {
  std::uint64_t state = 1234567;
  CHECK(splitmix64(state) == 6457827717110365317ULL);
  CHECK(splitmix64(state) == 3203168211198807973ULL);
  CHECK(splitmix64(state) == 9817491932198370423ULL);
}
