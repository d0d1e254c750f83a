#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gms {

// Base class for every error the simulator raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: workload, run config, experiment or plan file.
// The message starts with the offending field path when one is known.
class ConfigError : public Error {
 public:
  using Error::Error;
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what) {}
};

// Internal invariant violated during simulation (engine bug or impossible
// state). Always carries the cycle it was detected in.
class SimFault : public Error {
 public:
  SimFault(std::uint64_t cycle, const std::string& what)
      : Error("cycle " + std::to_string(cycle) + ": " + what), cycle_(cycle) {}
  std::uint64_t cycle() const { return cycle_; }

 private:
  std::uint64_t cycle_;
};

// No physical frame satisfies the allocator's constraints.
class AllocationFault : public Error {
 public:
  using Error::Error;
};

}  // namespace gms
