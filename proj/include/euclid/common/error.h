#pragma once

#include <stdexcept>
#include <string>

namespace euclid {

// Base class for all errors raised by the library. Each subclass names one
// error class so callers (and the CLI exit-code mapping) can tell them apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOpError : public Error {
 public:
  using Error::Error;
};

class GradientKeyError : public Error {
 public:
  using Error::Error;
};

class EpisodeStateError : public Error {
 public:
  using Error::Error;
};

class NotEnoughDataError : public Error {
 public:
  using Error::Error;
};

class InvalidTransitionError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace euclid
