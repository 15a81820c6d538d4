#pragma once

#include "desvar/kernel/network.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace desvar {

enum class ModelKind { manufacturing, call_center, crossdock, single_queue };

std::string_view to_string(ModelKind kind);

// Parsed model config. Durations are converted to minutes and cost rates to
// per-minute at load time.
struct ModelConfig {
    ModelKind kind = ModelKind::single_queue;
    bool strict_paper = false;
    NetworkModel network;
    double horizon = 0;
    StopRule stop_rule = StopRule::at_horizon;
};

// Config files are JSON. See configs/*.cfg for the schema by example.
ModelConfig parse_model_config(std::string_view text);
ModelConfig load_model_config(const std::filesystem::path& path);

struct Model {
    ModelKind kind = ModelKind::single_queue;
    NetworkModel network;
    double horizon = 0;
    StopRule stop_rule = StopRule::at_horizon;
};

// Four cells (1, 2 and 4 single-machine, 3 with a new and an old machine),
// three part types on fixed routes, renewal arrivals starting at t=0.
Model build_manufacturing(const ModelConfig& config);
// Trunk-line admission with balking, scheduled arrivals that stop before the
// horizon, three call classes, horizon-then-drain termination.
Model build_call_center(const ModelConfig& config);
// Order picking with automated dispensers and manual picker groups.
Model build_crossdock(const ModelConfig& config);
// Generic single-station model, used for kernel validation.
Model build_single_queue(const ModelConfig& config);

// Dispatches on config.kind.
Model build_model(const ModelConfig& config);

std::vector<std::string> randomness_sources(const Model& model);

double parse_duration_minutes(double value, std::string_view unit);

}  // namespace desvar
