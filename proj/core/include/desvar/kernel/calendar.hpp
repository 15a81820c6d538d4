#pragma once

#include <cstdint>
#include <queue>
#include <vector>

namespace desvar {

struct Event {
    double time = 0;
    std::uint64_t sequence = 0;
    std::uint32_t tag = 0;     // model-defined transition
    std::uint32_t entity = 0;  // payload
    std::uint32_t target = 0;  // payload (resource, station, ...)
};

// Future event list ordered by (time, insertion sequence). Ties fire in the
// order they were scheduled.
class EventCalendar {
public:
    double now() const noexcept { return clock_; }
    bool empty() const noexcept { return queue_.empty(); }
    std::size_t size() const noexcept { return queue_.size(); }
    double next_time() const { return queue_.top().time; }

    // Throws SimulationError("causality violation ...") when time < now().
    std::uint64_t schedule(double time, std::uint32_t tag, std::uint32_t entity = 0,
                           std::uint32_t target = 0);

    // Removes the earliest event and advances the clock to its time.
    Event pop();

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const noexcept {
            if (a.time != b.time) return a.time > b.time;
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    double clock_ = 0;
    std::uint64_t next_sequence_ = 0;
};

}  // namespace desvar
