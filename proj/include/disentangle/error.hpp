#pragma once

#include <stdexcept>
#include <string>

namespace disentangle {

// Shape or structural precondition broken by the caller (e.g. matmul of 2x3 by 2x3).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A scalar argument is outside its documented domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input is well-shaped but numerically degenerate (zero-norm rows, constant maps).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An object was used outside its lifecycle (e.g. a tape fed to backward twice).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t epoch, double entanglement, double capture)
      : std::runtime_error(what), epoch_(epoch), entanglement_(entanglement), capture_(capture) {}

  std::size_t epoch() const noexcept { return epoch_; }
  double entanglement() const noexcept { return entanglement_; }
  double capture() const noexcept { return capture_; }

 private:
  std::size_t epoch_;
  double entanglement_;
  double capture_;
};

}  // namespace disentangle
