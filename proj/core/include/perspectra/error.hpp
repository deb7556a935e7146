#pragma once

#include <stdexcept>
#include <string>

namespace perspectra {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (corpus, label, table, lexicon, checkpoint files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values or command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace perspectra
