#include "desvar/kernel/calendar.hpp"

#include "desvar/error.hpp"

#include <cmath>
#include <string>

namespace desvar {

std::uint64_t EventCalendar::schedule(double time, std::uint32_t tag, std::uint32_t entity,
                                      std::uint32_t target) {
    if (!(time >= clock_) || std::isnan(time)) {
        throw SimulationError("causality violation: event at t=" + std::to_string(time) +
                              " scheduled with clock at t=" + std::to_string(clock_));
    }
    const std::uint64_t seq = next_sequence_++;
    queue_.push(Event{time, seq, tag, entity, target});
    return seq;
}

Event EventCalendar::pop() {
    Event ev = queue_.top();
    queue_.pop();
    clock_ = ev.time;
    return ev;
}

}  // namespace desvar
