#pragma once

#include <stdexcept>
#include <string>

namespace krmap {

// Point outside the support of a family or map.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed arguments: sizes, ranges, unknown names.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition on structured input does not hold.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDensityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Root finding failed; carries the final bracket.
class RootFindingError : public NumericalError {
 public:
  RootFindingError(const std::string& what, double lower, double upper)
      : NumericalError(what), lower_(lower), upper_(upper) {}
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class DegenerateEnsembleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StiffnessError : public NumericalError {
 public:
  StiffnessError(const std::string& what, double time) : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class UnsupportedDimensionError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

// Malformed serialized map or density.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layered construction hit its layer cap before reaching the final bridge.
class LayerBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace krmap
