#include "magconv/error.hpp"

namespace magconv {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::SingularSystem: return "singular-system";
    case ErrorCode::StokesInstability: return "stokes-instability";
    case ErrorCode::OutOfBand: return "out-of-band";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::DegenerateData: return "degenerate-data";
    case ErrorCode::ConfigSyntax: return "config-syntax";
    case ErrorCode::UnitMissing: return "unit-missing";
    case ErrorCode::UnknownKey: return "unknown-key";
    case ErrorCode::RangeViolation: return "range-violation";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

int exit_code(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::ConfigSyntax: return 3;
    case ErrorCode::UnitMissing: return 4;
    case ErrorCode::UnknownKey: return 5;
    case ErrorCode::RangeViolation: return 6;
    case ErrorCode::InvalidArgument: return 7;
    case ErrorCode::SingularSystem: return 8;
    case ErrorCode::StokesInstability: return 9;
    case ErrorCode::OutOfBand: return 10;
    case ErrorCode::NonConvergence: return 11;
    case ErrorCode::DegenerateData: return 12;
    case ErrorCode::Io: return 13;
    }
    return 70;
}

} // namespace magconv
