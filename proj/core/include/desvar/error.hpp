#pragma once

#include <stdexcept>
#include <string>

namespace desvar {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad parameters, malformed config or experiment files, invariant violations
// detected before any simulation runs.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Statistics cannot be computed: undefined measures, zero-variance groups,
// too few observations.
class DegenerateStatistics : public Error {
public:
    using Error::Error;
};

// Failures raised while a replication executes (causality violations,
// unsynchronized sources, runaway models).
class SimulationError : public Error {
public:
    using Error::Error;
};

}  // namespace desvar
