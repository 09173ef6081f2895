#pragma once

#include <stdexcept>
#include <string>

namespace regretlab {

/// Malformed inputs: invalid levels, bad config values, unparsable files.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A resource bound was exceeded (state-space caps, policy-enumeration caps,
/// placement retry budgets, solver iteration limits).
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// An API was used out of contract (e.g. stepping a terminal state).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace regretlab
