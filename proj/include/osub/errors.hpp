#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osub {

// Base of every error raised by the library. Validation errors are caller
// mistakes (bad input or configuration); everything else is a runtime failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Logistic stage-1 probabilities need both response classes present.
class DegenerateResponse : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
public:
    ConfigError(std::string key, const std::string& what)
        : ValidationError("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class NumericOverflow : public Error {
public:
    NumericOverflow(std::ptrdiff_t index, const std::string& what)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
    std::ptrdiff_t index() const noexcept { return index_; }

private:
    std::ptrdiff_t index_;
};

class SingularInformation : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    NonConvergence(Eigen::VectorXd last_iterate, int iterations)
        : Error("Newton-Raphson did not converge after " + std::to_string(iterations) +
                " iterations"),
          last_iterate_(std::move(last_iterate)),
          iterations_(iterations) {}
    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
    int iterations() const noexcept { return iterations_; }

private:
    Eigen::VectorXd last_iterate_;
    int iterations_;
};

// Stage-1 pilot fits kept failing after the allowed number of fresh draws.
class PilotFailure : public Error {
public:
    PilotFailure(int attempts, const std::string& last_reason)
        : Error("pilot fit failed after " + std::to_string(attempts) +
                " attempts: " + last_reason),
          attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

}  // namespace osub
