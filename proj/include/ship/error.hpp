#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace ship {

// Base of every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad arguments or configuration (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during training (exit code 3).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

inline bool& quiet_warnings() {
  static bool quiet = false;
  return quiet;
}

inline void warn(const std::string& msg) {
  if (!quiet_warnings()) std::cerr << "warning: " << msg << '\n';
}

}  // namespace ship
