#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvldp {

/// Bad input: violated precondition, malformed config, shape mismatch.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures discovered while a numerical run is in progress.
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A trajectory left the finite range (non-finite or ‖x‖_H above the threshold).
class BlowUpError : public RuntimeFailure {
public:
    BlowUpError(std::size_t step, std::size_t replica, const std::string& what)
        : RuntimeFailure(what), step_(step), replica_(replica) {}

    std::size_t step() const noexcept { return step_; }
    std::size_t replica() const noexcept { return replica_; }

private:
    std::size_t step_;
    std::size_t replica_;
};

/// Picard iteration hit its outer-iteration cap before reaching the tolerance.
class NonConvergenceError : public RuntimeFailure {
public:
    NonConvergenceError(const std::string& what, std::vector<std::vector<double>> history)
        : RuntimeFailure(what), history_(std::move(history)) {}

    const std::vector<std::vector<double>>& residual_history() const noexcept { return history_; }

private:
    std::vector<std::vector<double>> history_;
};

}  // namespace mvldp
