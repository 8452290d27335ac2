#pragma once

#include <stdexcept>
#include <string>

namespace stackml {

// Base of every error the library raises on bad input. The CLI maps each
// subclass onto a stable exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed CSV, schema mismatch, invalid configuration. Exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

// Data that parses but cannot support the requested operation (a class too
// small to stratify, a single-class fold). Exit code 3.
class DataShapeError : public Error {
 public:
  using Error::Error;
};

// Unreadable, truncated or version-mismatched model file. Exit code 4.
class ModelFileError : public Error {
 public:
  using Error::Error;
};

}  // namespace stackml
