#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "fog/error.hpp"

namespace fog::simcore {

/// Simulated time in integer microseconds.
using SimTime = std::uint64_t;

inline constexpr SimTime kMicrosPerMs = 1000;

/// Converts a non-negative millisecond quantity to the nearest microsecond.
SimTime ms_to_us(double ms);
inline double us_to_ms(SimTime us) { return static_cast<double>(us) / 1000.0; }

struct SimEvent {
  SimTime fire_time = 0;
  std::uint64_t sequence = 0;
  std::uint32_t kind = 0;
  std::uint64_t target = 0;

  bool operator==(const SimEvent&) const = default;
};

struct EventHandle {
  std::uint64_t sequence = 0;
};

class TimeOverflow : public Error {
 public:
  using Error::Error;
};

class EngineFinished : public Error {
 public:
  using Error::Error;
};

/// Raised out of run()/run_until() when a handler throws. Carries the event
/// that was being dispatched and the original exception.
class EventFailure : public Error {
 public:
  EventFailure(const SimEvent& event, std::exception_ptr cause, const std::string& what);

  const SimEvent& event() const { return event_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  SimEvent event_;
  std::exception_ptr cause_;
};

class Engine;
using Handler = std::function<void(Engine&, const SimEvent&)>;

/// Deterministic discrete-event loop. Events fire in (fire_time, sequence)
/// order, so same-time events run in insertion order. Single-threaded.
class Engine {
 public:
  Engine() = default;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  SimTime now() const { return now_; }

  EventHandle schedule(SimTime delay, Handler handler, std::uint32_t kind = 0, std::uint64_t target = 0);
  EventHandle schedule_at(SimTime fire_time, Handler handler, std::uint32_t kind = 0, std::uint64_t target = 0);

  /// Returns false if the event already fired or was cancelled.
  bool cancel(EventHandle handle);

  /// Dispatches every event with fire_time <= t_end, then advances the clock
  /// to t_end. Returns the number of events dispatched.
  std::size_t run_until(SimTime t_end);

  /// Dispatches until the queue is empty; the clock stays at the last event.
  std::size_t run();

  /// After finish(), schedule() throws EngineFinished.
  void finish() { finished_ = true; }
  bool finished() const { return finished_; }

  std::size_t pending() const { return handlers_.size(); }

  void enable_log(bool on) { log_enabled_ = on; }
  const std::vector<SimEvent>& dispatch_log() const { return log_; }

 private:
  struct Key {
    SimTime fire_time;
    std::uint64_t sequence;
    bool operator>(const Key& o) const {
      return fire_time != o.fire_time ? fire_time > o.fire_time : sequence > o.sequence;
    }
  };
  struct Entry {
    SimEvent event;
    Handler handler;
  };

  bool dispatch_next(SimTime limit);

  SimTime now_ = 0;
  std::uint64_t next_sequence_ = 0;
  bool finished_ = false;
  bool log_enabled_ = false;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> queue_;
  std::unordered_map<std::uint64_t, Entry> handlers_;
  std::vector<SimEvent> log_;
};

}  // namespace fog::simcore
