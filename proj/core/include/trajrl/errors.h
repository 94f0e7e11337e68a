#ifndef TRAJRL_ERRORS_H_
#define TRAJRL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace trajrl {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class OffCorridor : public Error {
 public:
  using Error::Error;
};

class DegenerateTrajectory : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class EpisodeFinished : public Error {
 public:
  EpisodeFinished() : Error("step() called on a finished episode; call reset()") {}
};

// Raised by the safety constraint when no collision-free lattice trajectory
// exists. Callers are expected to hand control to an emergency stop.
class NoPathException : public Error {
 public:
  NoPathException() : Error("no feasible trajectory in the free set") {}
};

class EmptyFeasibleSet : public Error {
 public:
  EmptyFeasibleSet() : Error("projection onto an empty feasible set") {}
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace trajrl

#endif  // TRAJRL_ERRORS_H_
