#ifndef BAYES_ERROR_HPP
#define BAYES_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bayes {

/// Base of every library failure. `name()` is the stable identifier the CLI
/// prints on error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* name() const noexcept { return "Error"; }
};

#define BAYES_DEFINE_ERROR(Type, Base)                             \
  class Type : public Base {                                       \
   public:                                                         \
    using Base::Base;                                              \
    const char* name() const noexcept override { return #Type; }   \
  };

/// Precondition violations (bad sizes, nonpositive variances, ...).
BAYES_DEFINE_ERROR(InvalidArgument, Error)
BAYES_DEFINE_ERROR(DimensionMismatch, InvalidArgument)
BAYES_DEFINE_ERROR(NotSquare, InvalidArgument)
BAYES_DEFINE_ERROR(NotSymmetric, InvalidArgument)

/// Failures of the numerics on otherwise valid input.
BAYES_DEFINE_ERROR(NumericalError, Error)
BAYES_DEFINE_ERROR(NotPositiveDefinite, NumericalError)
BAYES_DEFINE_ERROR(SingularInnovation, NumericalError)
BAYES_DEFINE_ERROR(GridUnderflow, NumericalError)
BAYES_DEFINE_ERROR(ZeroTotalWeight, NumericalError)
BAYES_DEFINE_ERROR(AllRestartsFailed, NumericalError)

BAYES_DEFINE_ERROR(IoError, Error)
BAYES_DEFINE_ERROR(ConfigError, Error)

#undef BAYES_DEFINE_ERROR

}  // namespace bayes

#endif  // BAYES_ERROR_HPP
