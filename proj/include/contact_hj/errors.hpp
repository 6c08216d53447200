#pragma once

#include <stdexcept>
#include <string>

namespace contact_hj {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define CONTACT_HJ_ERROR(Name)                                                 \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

/// The requested velocity is not reachable as dH/dp inside the momentum box.
CONTACT_HJ_ERROR(VelocityOutOfRange);
/// Two grid functions live on different grids.
CONTACT_HJ_ERROR(GridMismatch);
/// Time step violates the monotonicity condition of the explicit scheme.
CONTACT_HJ_ERROR(CflViolation);
/// Iterative solver hit its time or iteration budget.
CONTACT_HJ_ERROR(NotConverged);
/// Solver needs a Hamiltonian of the form lambda*u + h(x,p).
CONTACT_HJ_ERROR(NotDiscountedForm);
/// Bisection bracket does not straddle zero.
CONTACT_HJ_ERROR(BracketInvalid);
/// ODE state left the finite range.
CONTACT_HJ_ERROR(NonFinite);
CONTACT_HJ_ERROR(EmptyCloud);
CONTACT_HJ_ERROR(InsufficientData);
CONTACT_HJ_ERROR(NonPositiveValues);
CONTACT_HJ_ERROR(EmptySlab);
/// Malformed or inconsistent experiment configuration.
CONTACT_HJ_ERROR(ConfigError);

#undef CONTACT_HJ_ERROR

} // namespace contact_hj
