#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace flgnn {

// Base for every error raised by the library. Callers that only care about
// "something in flgnn failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A softmax row (attention neighbourhood) with no admissible entry.
class DegenerateNeighborhoodError : public Error {
 public:
  using Error::Error;
};

class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

class DeterminismError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ReferentialIntegrityError : public Error {
 public:
  using Error::Error;
};

class FeatureConflictError : public Error {
 public:
  FeatureConflictError(const std::string& what, std::vector<std::string> offenders)
      : Error(what), offenders_(std::move(offenders)) {}
  const std::vector<std::string>& offenders() const noexcept { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class MissingNodeError : public Error {
 public:
  using Error::Error;
};

// Non-finite training loss. `client` is empty outside a federation.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, std::string client = {})
      : Error(client.empty()
                  ? "training diverged (non-finite loss) at epoch " + std::to_string(epoch)
                  : "training diverged (non-finite loss) at epoch " + std::to_string(epoch) +
                        " on client " + client),
        epoch_(epoch),
        client_(std::move(client)) {}
  std::size_t epoch() const noexcept { return epoch_; }
  const std::string& client() const noexcept { return client_; }

 private:
  std::size_t epoch_;
  std::string client_;
};

class AggregationError : public Error {
 public:
  using Error::Error;
};

class IllPosedAttackError : public Error {
 public:
  using Error::Error;
};

// Every problem found while validating an experiment configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "invalid configuration:";
    for (const auto& issue : issues) out += "\n  - " + issue;
    return out;
  }
  std::vector<std::string> issues_;
};

}  // namespace flgnn
