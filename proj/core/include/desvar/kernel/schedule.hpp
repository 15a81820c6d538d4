#pragma once

#include <optional>
#include <vector>

namespace desvar {

// Piecewise-constant capacity over time. The first segment starts at 0 and the
// last one extends forever.
class CapacitySchedule {
public:
    struct Segment {
        double start = 0;
        int capacity = 0;

        friend bool operator==(const Segment&, const Segment&) = default;
    };

    CapacitySchedule() : segments_{{0.0, 1}} {}
    static CapacitySchedule fixed(int capacity);
    // Validates: non-empty, first start 0, strictly increasing starts, capacity >= 0.
    explicit CapacitySchedule(std::vector<Segment> segments);

    int at(double t) const noexcept;
    // Start of the first segment beginning strictly after t.
    std::optional<double> next_change_after(double t) const noexcept;

    const std::vector<Segment>& segments() const noexcept { return segments_; }
    bool is_fixed() const noexcept { return segments_.size() == 1; }

    friend bool operator==(const CapacitySchedule&, const CapacitySchedule&) = default;

private:
    std::vector<Segment> segments_;
};

// Piecewise-constant arrival rate on [0, end()); no arrivals afterwards.
class RateSchedule {
public:
    struct Segment {
        double start = 0;
        double end = 0;
        double rate_per_minute = 0;

        friend bool operator==(const Segment&, const Segment&) = default;
    };

    RateSchedule() = default;
    // Segments must start at 0, tile without gaps or overlap, rate >= 0.
    explicit RateSchedule(std::vector<Segment> segments);

    double end() const noexcept { return segments_.empty() ? 0.0 : segments_.back().end; }
    // Integrated rate over [0, t].
    double cumulative(double t) const noexcept;
    // Earliest t with cumulative(t) == level; absent when level exceeds the total.
    std::optional<double> inverse_cumulative(double level) const noexcept;

    const std::vector<Segment>& segments() const noexcept { return segments_; }

    friend bool operator==(const RateSchedule&, const RateSchedule&) = default;

private:
    std::vector<Segment> segments_;
};

}  // namespace desvar
