#pragma once

#include <stdexcept>
#include <string>

namespace typostrike {

// Base of every error the library throws. The CLI maps the subclasses onto
// exit codes: UsageError -> 1, DataError -> 2, ProviderError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed input data or a violated precondition on caller-supplied values.
class DataError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, int attempts = 1, bool outage = false)
      : Error(what), attempts_(attempts), outage_(outage) {}

  int attempts() const { return attempts_; }
  // True when the endpoint stayed unreachable through the whole retry budget.
  bool outage() const { return outage_; }

 private:
  int attempts_;
  bool outage_;
};

}  // namespace typostrike
