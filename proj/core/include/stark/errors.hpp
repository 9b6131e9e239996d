#pragma once

#include <stdexcept>
#include <string>

namespace stark {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A function argument violates its documented domain.
class InvalidArguments : public Error {
public:
  using Error::Error;
};

// A bitmask does not belong to the requested excitation sector.
class NotInSector : public Error {
public:
  using Error::Error;
};

// Vector or matrix dimensions do not match the sector dimension.
class DimensionMismatch : public Error {
public:
  using Error::Error;
};

// A dense representation was requested above the supported size cap.
class TooLarge : public Error {
public:
  using Error::Error;
};

// The iterative eigensolver did not reach the requested residual.
class NoConvergence : public Error {
public:
  NoConvergence(const std::string& what, double residual, long iterations)
      : Error(what), residual(residual), iterations(iterations) {}
  double residual;
  long iterations;
};

// The ground state is degenerate within tolerance, so the fidelity
// susceptibility of "the" ground state is not defined.
class DegenerateGroundState : public Error {
public:
  using Error::Error;
};

// Adaptive step refinement hit the minimum step without stabilizing.
class StepUnderflow : public Error {
public:
  using Error::Error;
};

// The QFI maximum sits on the edge of the search window.
class PeakAtBoundary : public Error {
public:
  using Error::Error;
};

// Too few usable points remain inside a fit window.
class InsufficientWindow : public Error {
public:
  using Error::Error;
};

// Too few system sizes were supplied for a finite-size fit.
class InsufficientSizes : public Error {
public:
  using Error::Error;
};

// Scaling collapse has no usable overlap between sizes.
class DegenerateCollapse : public Error {
public:
  using Error::Error;
};

// An experiment configuration file or override is malformed or inconsistent.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace stark
