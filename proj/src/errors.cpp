#include "qlw/errors.hpp"

namespace qlw {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidSample: return "InvalidSample";
        case ErrorKind::DegenerateResponse: return "DegenerateResponse";
        case ErrorKind::InvalidLevel: return "InvalidLevel";
        case ErrorKind::SingularDesign: return "SingularDesign";
        case ErrorKind::NonpositiveSlope: return "NonpositiveSlope";
        case ErrorKind::EmptyConfidenceSet: return "EmptyConfidenceSet";
        case ErrorKind::InvalidGrid: return "InvalidGrid";
        case ErrorKind::InvalidTheta: return "InvalidTheta";
        case ErrorKind::NegativePriceChange: return "NegativePriceChange";
        case ErrorKind::InfeasibleConstraint: return "InfeasibleConstraint";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::TooFewObservations: return "TooFewObservations";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigError:
        case ErrorKind::InvalidLevel:
        case ErrorKind::InvalidGrid:
            return 2;
        case ErrorKind::InvalidSample:
        case ErrorKind::SchemaError:
        case ErrorKind::ParseError:
        case ErrorKind::TooFewObservations:
        case ErrorKind::NegativePriceChange:
            return 3;
        default:
            return 4;
    }
}

}  // namespace qlw
