#pragma once

#include <stdexcept>
#include <string>

namespace nonholib {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Integration.
class NonFiniteState : public Error {
 public:
  NonFiniteState(double t, const std::string& what) : Error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};
class StepUnderflow : public Error {
 public:
  using Error::Error;
};
class OutOfRange : public Error {
 public:
  using Error::Error;
};
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Geometry.
class SingularFrame : public Error {
 public:
  using Error::Error;
};
class SingularMetric : public Error {
 public:
  using Error::Error;
};
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Dynamics and systems.
class NonPositiveEpsilon : public Error {
 public:
  using Error::Error;
};
class SingularEtaBlock : public Error {
 public:
  using Error::Error;
};
class FrameNotAdapted : public Error {
 public:
  using Error::Error;
};
class OriginSingularity : public Error {
 public:
  using Error::Error;
};

// Analysis preconditions.
class WindowMismatch : public Error {
 public:
  using Error::Error;
};
class LadderTooShort : public Error {
 public:
  using Error::Error;
};
class TransientTooShort : public Error {
 public:
  using Error::Error;
};

}  // namespace nonholib
