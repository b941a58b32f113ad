#pragma once

#include <stdexcept>
#include <string>

namespace cbsql {

// Every error raised by the library derives from Error so callers can catch
// the whole family at once.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// A symbol outside a factor's alphabet, or an observation with the wrong
// number of factors.
class InvalidObservation : public Error {
 public:
  using Error::Error;
};

// The density model did not assign a higher probability to s after being
// trained on s, so no pseudo-count exists.
class NonLearningModel : public Error {
 public:
  using Error::Error;
};

class EpisodeFinished : public Error {
 public:
  using Error::Error;
};

class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

class NotReady : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised while loading an experiment config; carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace cbsql
