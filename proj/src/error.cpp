#include "gwtails/error.hpp"

namespace gwtails {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
        case ErrorCode::BadParam: return "BadParam";
        case ErrorCode::SubcriticalMean: return "SubcriticalMean";
        case ErrorCode::BadPmf: return "BadPmf";
        case ErrorCode::TailZero: return "TailZero";
        case ErrorCode::PopulationOverflow: return "PopulationOverflow";
        case ErrorCode::ConditionalTailEmpty: return "ConditionalTailEmpty";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::NonIntegrableTail: return "NonIntegrableTail";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::UnknownField: return "UnknownField";
    }
    return "Unknown";
}

bool is_parameter_error(ErrorCode code)
{
    switch (code) {
        case ErrorCode::BadParam:
        case ErrorCode::SubcriticalMean:
        case ErrorCode::BadPmf:
        case ErrorCode::TooLarge:
        case ErrorCode::ParseError:
        case ErrorCode::UnknownField:
            return true;
        default:
            return false;
    }
}

}  // namespace gwtails
