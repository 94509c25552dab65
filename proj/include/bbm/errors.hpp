#ifndef BBM_ERRORS_HPP
#define BBM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bbm
{

/// Base class for every error raised by the library. `category()` is the
/// short machine-readable tag printed by the CLI.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
    virtual const char* category() const noexcept { return "error"; }
};

#define BBM_DEFINE_ERROR(Name, tag)                                        \
    class Name : public Error                                             \
    {                                                                     \
    public:                                                               \
        using Error::Error;                                               \
        const char* category() const noexcept override { return tag; }    \
    }

BBM_DEFINE_ERROR(DomainError, "domain error");
BBM_DEFINE_ERROR(ArgumentError, "argument error");
BBM_DEFINE_ERROR(ContractViolation, "contract violation");
BBM_DEFINE_ERROR(NumericalDriftError, "numerical drift error");
BBM_DEFINE_ERROR(FiniteHorizonError, "finite-horizon violation");
BBM_DEFINE_ERROR(GrazingStepError, "grazing-step error");
BBM_DEFINE_ERROR(ParseError, "parse error");
BBM_DEFINE_ERROR(ValidationError, "validation error");
BBM_DEFINE_ERROR(ConfigurationError, "configuration error");

#undef BBM_DEFINE_ERROR

} // namespace bbm

#endif // BBM_ERRORS_HPP
