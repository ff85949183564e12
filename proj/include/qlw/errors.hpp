#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qlw {

enum class ErrorKind {
    InvalidSample,
    DegenerateResponse,
    InvalidLevel,
    SingularDesign,
    NonpositiveSlope,
    EmptyConfidenceSet,
    InvalidGrid,
    InvalidTheta,
    NegativePriceChange,
    InfeasibleConstraint,
    SchemaError,
    ParseError,
    TooFewObservations,
    ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Process exit status the CLI uses for an error of this kind
/// (2 config, 3 data, 4 numerical).
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace qlw
