#include "fog/simcore/engine.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fog::simcore {

SimTime ms_to_us(double ms) {
  if (!(ms >= 0.0) || !std::isfinite(ms)) throw TimeOverflow("ms_to_us: negative or non-finite duration");
  const double us = std::round(ms * 1000.0);
  if (us >= 18446744073709549568.0) throw TimeOverflow("ms_to_us: duration overflows 64-bit microseconds");
  return static_cast<SimTime>(us);
}

EventFailure::EventFailure(const SimEvent& event, std::exception_ptr cause, const std::string& what)
    : Error(what), event_(event), cause_(std::move(cause)) {}

EventHandle Engine::schedule(SimTime delay, Handler handler, std::uint32_t kind, std::uint64_t target) {
  if (delay > std::numeric_limits<SimTime>::max() - now_)
    throw TimeOverflow("schedule: now + delay overflows 64-bit microseconds");
  return schedule_at(now_ + delay, std::move(handler), kind, target);
}

EventHandle Engine::schedule_at(SimTime fire_time, Handler handler, std::uint32_t kind, std::uint64_t target) {
  if (finished_) throw EngineFinished("schedule: simulation already finished");
  if (fire_time < now_) throw TimeOverflow("schedule_at: fire time is in the past");
  const std::uint64_t seq = next_sequence_++;
  queue_.push(Key{fire_time, seq});
  handlers_.emplace(seq, Entry{SimEvent{fire_time, seq, kind, target}, std::move(handler)});
  return EventHandle{seq};
}

bool Engine::cancel(EventHandle handle) { return handlers_.erase(handle.sequence) > 0; }

bool Engine::dispatch_next(SimTime limit) {
  while (!queue_.empty()) {
    const Key top = queue_.top();
    if (top.fire_time > limit) return false;
    queue_.pop();
    auto it = handlers_.find(top.sequence);
    if (it == handlers_.end()) continue;  // cancelled
    Entry entry = std::move(it->second);
    handlers_.erase(it);
    now_ = top.fire_time;
    if (log_enabled_) log_.push_back(entry.event);
    try {
      entry.handler(*this, entry.event);
    } catch (const std::exception& e) {
      throw EventFailure(entry.event, std::current_exception(),
                         "event seq=" + std::to_string(entry.event.sequence) + " kind=" +
                             std::to_string(entry.event.kind) + " at t=" + std::to_string(entry.event.fire_time) +
                             "us failed: " + e.what());
    }
    return true;
  }
  return false;
}

std::size_t Engine::run_until(SimTime t_end) {
  if (t_end < now_) throw TimeOverflow("run_until: t_end is before the current time");
  std::size_t count = 0;
  while (dispatch_next(t_end)) ++count;
  now_ = t_end;
  return count;
}

std::size_t Engine::run() {
  std::size_t count = 0;
  while (dispatch_next(std::numeric_limits<SimTime>::max())) ++count;
  return count;
}

}  // namespace fog::simcore
