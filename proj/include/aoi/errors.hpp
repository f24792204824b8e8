#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aoi {

// Solver-side failures. Invalid inputs use std::invalid_argument.

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, std::size_t iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

class BracketNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDenominator : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StateSpaceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingIndexTable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooFewReplications : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aoi
