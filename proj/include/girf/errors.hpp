#pragma once

#include <stdexcept>
#include <string>

namespace girf {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument to a numeric routine (bad transform domain, bad grid...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Failure raised inside a model callback (CLI exit code 2).
class ModelError : public Error {
 public:
  using Error::Error;
};

class CholeskyFailure : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Particle filter breakdown (CLI exit code 3).
class FilterError : public Error {
 public:
  using Error::Error;
};

/// Every weight at a grid step was zero.
class AllWeightsDegenerate : public FilterError {
 public:
  AllWeightsDegenerate(const std::string& what, std::size_t step = 0)
      : FilterError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class NonFiniteGuide : public FilterError {
 public:
  using FilterError::FilterError;
};

class NonPositiveGuide : public FilterError {
 public:
  using FilterError::FilterError;
};

class SingularInnovation : public FilterError {
 public:
  using FilterError::FilterError;
};

/// Regression or profile fitting failure.
class FitError : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public FitError {
 public:
  using FitError::FitError;
};

class NegativeCurvature : public FitError {
 public:
  using FitError::FitError;
};

}  // namespace girf
