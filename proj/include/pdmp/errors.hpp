#pragma once

#include <stdexcept>
#include <string>

namespace pdmp {

/// A caller broke an operation's precondition (negative duration, bad index, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation is defined only for a model family this model is not part of.
class UnsupportedModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model description, scenario or trajectory file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The model failed validation in a way that prevents the requested run.
class ModelValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Something that cannot happen if the engine is correct.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pdmp
