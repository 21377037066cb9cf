#ifndef CVLAB_ERROR_HPP
#define CVLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cvlab {

/// Base of every error raised by the library.
///
/// Subclasses fall in two families: input problems (configuration, bounds,
/// parsing) and numerical degeneracies (singular systems, leverage at one).
/// The CLI maps the first family to exit code 2 and the second to 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;

    virtual bool numerical() const noexcept { return false; }

    /// Rethrow as the same dynamic type with `context` prefixed to the message.
    [[noreturn]] virtual void rethrow_with_context(const std::string& context) const = 0;
};

template <class Derived, bool Numerical>
class ErrorKind : public Error {
public:
    using Error::Error;

    bool numerical() const noexcept override { return Numerical; }

    [[noreturn]] void rethrow_with_context(const std::string& context) const override {
        throw Derived(context + ": " + what());
    }
};

#define CVLAB_DEFINE_ERROR(Name, Numerical)                                   \
    class Name : public ErrorKind<Name, Numerical> {                          \
    public:                                                                   \
        using ErrorKind<Name, Numerical>::ErrorKind;                          \
    }

CVLAB_DEFINE_ERROR(ConfigError, false);
CVLAB_DEFINE_ERROR(BoundsError, false);
CVLAB_DEFINE_ERROR(BudgetError, false);
CVLAB_DEFINE_ERROR(ParseError, false);
CVLAB_DEFINE_ERROR(ShapeError, false);
CVLAB_DEFINE_ERROR(SchemeError, false);
CVLAB_DEFINE_ERROR(GridError, false);
CVLAB_DEFINE_ERROR(UnsupportedTaskError, false);
CVLAB_DEFINE_ERROR(SingularityError, true);
CVLAB_DEFINE_ERROR(DegenerateLeverageError, true);
CVLAB_DEFINE_ERROR(DegenerateSmootherError, true);
CVLAB_DEFINE_ERROR(ConditioningError, true);

#undef CVLAB_DEFINE_ERROR

}  // namespace cvlab

#endif  // CVLAB_ERROR_HPP
