#include "desvar/kernel/schedule.hpp"

#include "desvar/error.hpp"

#include <algorithm>
#include <cmath>

namespace desvar {

CapacitySchedule CapacitySchedule::fixed(int capacity) {
    return CapacitySchedule({{0.0, capacity}});
}

CapacitySchedule::CapacitySchedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw ValidationError("capacity schedule: no segments");
    if (segments_.front().start != 0.0) throw ValidationError("capacity schedule: must start at t=0");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].capacity < 0) throw ValidationError("capacity schedule: negative capacity");
        if (!std::isfinite(segments_[i].start)) throw ValidationError("capacity schedule: bad start");
        if (i > 0 && !(segments_[i].start > segments_[i - 1].start)) {
            throw ValidationError("capacity schedule: starts must increase");
        }
    }
}

int CapacitySchedule::at(double t) const noexcept {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment& s) { return v < s.start; });
    if (it == segments_.begin()) return segments_.front().capacity;
    return std::prev(it)->capacity;
}

std::optional<double> CapacitySchedule::next_change_after(double t) const noexcept {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment& s) { return v < s.start; });
    if (it == segments_.end()) return std::nullopt;
    return it->start;
}

RateSchedule::RateSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw ValidationError("arrival schedule: no intervals");
    if (segments_.front().start != 0.0) throw ValidationError("arrival schedule: must start at t=0");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (!(s.end > s.start) || !std::isfinite(s.end)) {
            throw ValidationError("arrival schedule: empty or unbounded interval");
        }
        if (!(s.rate_per_minute >= 0) || !std::isfinite(s.rate_per_minute)) {
            throw ValidationError("arrival schedule: rate must be finite and >= 0");
        }
        if (i > 0 && s.start != segments_[i - 1].end) {
            throw ValidationError("arrival schedule: intervals must tile without gaps or overlap");
        }
    }
}

double RateSchedule::cumulative(double t) const noexcept {
    double total = 0;
    for (const auto& s : segments_) {
        if (t <= s.start) break;
        total += s.rate_per_minute * (std::min(t, s.end) - s.start);
    }
    return total;
}

std::optional<double> RateSchedule::inverse_cumulative(double level) const noexcept {
    double total = 0;
    for (const auto& s : segments_) {
        const double mass = s.rate_per_minute * (s.end - s.start);
        if (s.rate_per_minute > 0 && total + mass >= level) {
            const double t = s.start + (level - total) / s.rate_per_minute;
            return std::min(t, s.end);
        }
        total += mass;
    }
    return std::nullopt;
}

}  // namespace desvar
