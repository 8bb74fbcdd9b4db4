#pragma once

#include <stdexcept>
#include <string>

namespace pageseg {

// Base for every error the library raises. The CLI maps the category onto
// its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Similarity ratio requested on a patch whose statistic is zero.
class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  SamplingError(std::string strategy, const std::string& what)
      : Error(what), strategy_(std::move(strategy)) {}
  const std::string& strategy() const noexcept { return strategy_; }

 private:
  std::string strategy_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& what) : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace pageseg
