#ifndef HYBRIDVR_ERRORS_HPP
#define HYBRIDVR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hybridvr {

// Malformed deck text or structure.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deck parsed but violates a model invariant; the message names the field.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solver or VR-construction failure (bad dimensions, no response path, ...).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hybridvr

#endif  // HYBRIDVR_ERRORS_HPP
