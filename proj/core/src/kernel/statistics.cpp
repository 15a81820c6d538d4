#include "desvar/kernel/statistics.hpp"

#include "desvar/error.hpp"

#include <string>

namespace desvar {

void TimeWeighted::update(double value, double at) {
    if (at < last_time_) {
        throw SimulationError("time-weighted statistic: time regression from t=" +
                              std::to_string(last_time_) + " to t=" + std::to_string(at));
    }
    integral_ += last_value_ * (at - last_time_);
    last_time_ = at;
    last_value_ = value;
}

}  // namespace desvar
