#pragma once

#include <cstdint>
#include <optional>

namespace desvar {

// Observation-based statistic (per-entity times).
class Tally {
public:
    void add(double x) noexcept {
        sum_ += x;
        ++count_;
    }
    void reset() noexcept { *this = Tally{}; }

    std::uint64_t count() const noexcept { return count_; }
    double sum() const noexcept { return sum_; }
    // Absent when nothing was observed.
    std::optional<double> mean() const noexcept {
        if (count_ == 0) return std::nullopt;
        return sum_ / static_cast<double>(count_);
    }

private:
    double sum_ = 0;
    std::uint64_t count_ = 0;
};

// Time-persistent statistic over a piecewise-constant signal.
class TimeWeighted {
public:
    explicit TimeWeighted(double start_time = 0, double initial_value = 0) noexcept
        : start_(start_time), last_time_(start_time), last_value_(initial_value) {}

    // Extends the integral with the previous value over [last_time, at], then
    // switches to `value`. Throws SimulationError on time regression.
    void update(double value, double at);

    // Integral up to `at` without changing the current value.
    void advance(double at) { update(last_value_, at); }

    // Restarts integration at `at`, keeping the current value.
    void reset(double at) noexcept {
        start_ = at;
        last_time_ = at;
        integral_ = 0;
    }

    double integral() const noexcept { return integral_; }
    double last_value() const noexcept { return last_value_; }
    double last_time() const noexcept { return last_time_; }
    double start_time() const noexcept { return start_; }

    // Time-average over [start, last_time]; absent for an empty interval.
    std::optional<double> average() const noexcept {
        const double span = last_time_ - start_;
        if (!(span > 0)) return std::nullopt;
        return integral_ / span;
    }

private:
    double start_;
    double last_time_;
    double last_value_;
    double integral_ = 0;
};

// Rates are per minute of simulated time.
struct CostRates {
    double busy_per_minute = 0;
    double idle_per_minute = 0;
    double per_use = 0;

    friend bool operator==(const CostRates&, const CostRates&) = default;
};

inline double resource_cost(const CostRates& rates, double busy_minutes, double idle_minutes,
                            std::uint64_t uses) noexcept {
    return busy_minutes * rates.busy_per_minute + idle_minutes * rates.idle_per_minute +
           static_cast<double>(uses) * rates.per_use;
}

}  // namespace desvar
