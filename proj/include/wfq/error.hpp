#pragma once

#include <stdexcept>
#include <string>

namespace wfq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or wrong-version file content.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Instance failed validate_instance; message carries the violations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// No progress possible within the slot guard (resources never sufficient).
class StarvationError : public Error {
 public:
  using Error::Error;
};

}  // namespace wfq
