#pragma once

#include <stdexcept>
#include <string>

namespace taskprog {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: inconsistent shapes, out-of-range indices, bad configs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Invalid command options; the command line reports these with exit code 2.
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DigestMismatch : public Error {
 public:
  using Error::Error;
};

/// An agent or scene action whose source is empty (no object to remove, empty storage).
class ActionError : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace taskprog
