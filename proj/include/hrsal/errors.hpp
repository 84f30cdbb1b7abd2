#pragma once

#include <stdexcept>
#include <string>

namespace hrsal {

/// File could not be read, decoded, or written. The message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coarse predictor or refiner failed (sidecar crash, bad frame, wrong dims).
class PredictorError : public std::runtime_error {
public:
    PredictorError(const std::string& endpoint, const std::string& what)
        : std::runtime_error(endpoint + ": " + what), endpoint_(endpoint) {}

    const std::string& endpoint() const { return endpoint_; }

private:
    std::string endpoint_;
};

/// A metric has no defined value for its inputs (e.g. an empty boundary set).
class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace hrsal
