#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace m3g {

// Process exit codes used by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitTransportError = 4;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration (CLI flags, experiment config files).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Malformed or inconsistent input data (datasets, manifests, transcripts).
class DataError : public Error {
  public:
    using Error::Error;
};

// Chat transport failure. `retryable` distinguishes transient faults
// (network, 5xx) from deterministic ones (replay miss, bad response shape).
class TransportError : public Error {
  public:
    explicit TransportError(const std::string& msg, bool retryable = true)
        : Error(msg), retryable_(retryable) {}

    TransportError(const std::string& msg, int attempts, std::vector<int> backoff_ms)
        : Error(msg), retryable_(false), attempts_(attempts), backoff_ms_(std::move(backoff_ms)) {}

    bool retryable() const { return retryable_; }
    int attempts() const { return attempts_; }
    const std::vector<int>& backoff_schedule_ms() const { return backoff_ms_; }

  private:
    bool retryable_ = true;
    int attempts_ = 0;
    std::vector<int> backoff_ms_;
};

} // namespace m3g
