#pragma once

#include <stdexcept>

namespace ulch {

// Error taxonomy. Every library error derives from std::runtime_error so
// callers can catch coarsely; the concrete type tells them what went wrong.

// Input outside the mathematical domain of an operation (e.g. |u| >= 1 for a
// singular nonlinearity, non-finite field data).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A structural assumption or parameter constraint failed validation.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A time-dependent epsilon schedule violated one of its defining inequalities.
struct ScheduleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A time step produced non-finite values.
struct StepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Step rejection drove dt below dt_min (singular-potential safeguard).
struct SafeguardError : StepError {
    using StepError::StepError;
};

// A space-time norm was asked for a window longer than the series.
struct WindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An envelope fit could not be performed (non-finite data, missing runs).
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Hypotheses required by an experiment (e.g. uniqueness assumptions) failed.
struct AssumptionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A reference (oracle) computation was asked for a problem above its guard.
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Explicit reference integrator asked to run outside its stability region.
struct StabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File I/O failure (snapshots, CSV, reports).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ulch
