#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace magconv {

// Error classes. Each maps to a distinct CLI exit status (see exit_code()).
enum class ErrorCode {
    InvalidArgument,
    SingularSystem,
    StokesInstability,
    OutOfBand,
    NonConvergence,
    DegenerateData,
    ConfigSyntax,
    UnitMissing,
    UnknownKey,
    RangeViolation,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

std::string_view to_string(ErrorCode code) noexcept;

// Process exit status for an error class. 0 is success, 2 is reserved for
// command-line usage errors, 70 for anything unexpected.
int exit_code(ErrorCode code) noexcept;

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        throw Error(ErrorCode::InvalidArgument, what);
}

} // namespace magconv
