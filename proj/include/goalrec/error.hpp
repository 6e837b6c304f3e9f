#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace goalrec {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// gridmap

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class InfeasibleScenario : public Error {
 public:
  using Error::Error;
};

// geoplanner

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class PlanningTimeout : public Error {
 public:
  using Error::Error;
};

// quintic

class DegenerateSegment : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// recognizer

class EmptyObservation : public Error {
 public:
  using Error::Error;
};

class OrderingError : public Error {
 public:
  using Error::Error;
};

// strips

class UnsupportedFeature : public Error {
 public:
  UnsupportedFeature(const std::string& construct, std::size_t line)
      : Error("unsupported construct '" + construct + "' at line " +
              std::to_string(line)),
        construct_(construct),
        line_(line) {}
  const std::string& construct() const { return construct_; }
  std::size_t line() const { return line_; }

 private:
  std::string construct_;
  std::size_t line_;
};

class TypeError : public Error {
 public:
  using Error::Error;
};

class InapplicableAction : public Error {
 public:
  InapplicableAction(const std::string& action, std::size_t step)
      : Error("action " + action + " inapplicable at step " +
              std::to_string(step)),
        action_(action),
        step_(step) {}
  const std::string& action() const { return action_; }
  std::size_t step() const { return step_; }

 private:
  std::string action_;
  std::size_t step_;
};

class Unsolvable : public Error {
 public:
  using Error::Error;
};

// sim

class ControllerTimeout : public Error {
 public:
  using Error::Error;
};

// experiment / cli

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace goalrec
