#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace danyra {

/// Base of every error raised by the library. Messages carry a
/// "<module>: " prefix so a CLI user can tell which stage failed.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInstance : public Error {
 public:
  explicit InvalidInstance(const std::string& what)
      : Error("problem_model: invalid instance: " + what) {}
};

class TopologyError : public Error {
 public:
  explicit TopologyError(const std::string& what)
      : Error("problem_model: topology: " + what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error("dimension mismatch: " + what) {}
};

class InvalidHyperParams : public Error {
 public:
  explicit InvalidHyperParams(const std::string& what)
      : Error("problem_model: hyperparameters: " + what) {}
};

class ModeError : public Error {
 public:
  explicit ModeError(const std::string& what) : Error("engine: mode: " + what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error("engine: numeric: " + what) {}
};

/// A non-finite value appeared in an iterate. `iteration` and `agent` are
/// npos when the failing step was called outside of `iterate`.
class DivergenceError : public Error {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  DivergenceError(std::string field, std::size_t iteration = npos,
                  std::size_t agent = npos)
      : Error(format(field, iteration, agent)),
        field_(std::move(field)),
        iteration_(iteration),
        agent_(agent) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t iteration() const noexcept { return iteration_; }
  std::size_t agent() const noexcept { return agent_; }

 private:
  static std::string format(const std::string& field, std::size_t iteration,
                            std::size_t agent) {
    std::string msg = "engine: divergence: non-finite " + field;
    if (agent != npos) msg += " at agent " + std::to_string(agent);
    if (iteration != npos) msg += " in iteration " + std::to_string(iteration);
    return msg;
  }

  std::string field_;
  std::size_t iteration_;
  std::size_t agent_;
};

class OracleFailure : public Error {
 public:
  explicit OracleFailure(const std::string& what) : Error("oracle: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

}  // namespace danyra
