#ifndef AJRIS_ERROR_HPP
#define AJRIS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ajris {

enum class ErrorCode {
    SingularSystem,
    NoBracket,
    Infeasible,
    MaxIterExceeded,
    BadDistance,
    BadParams,
    DegenerateTau,
    NumericalFailure,
    EnergyInfeasible,
    ParseError,
    ValidationError,
    UnknownAxis,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::BadDistance: return "BadDistance";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::DegenerateTau: return "DegenerateTau";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::EnergyInfeasible: return "EnergyInfeasible";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownAxis: return "UnknownAxis";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ajris

#endif // AJRIS_ERROR_HPP
