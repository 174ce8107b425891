#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwtails {

enum class ErrorCode {
    BadParam,
    SubcriticalMean,
    BadPmf,
    TailZero,
    PopulationOverflow,
    ConditionalTailEmpty,
    NoConvergence,
    QuadratureFailure,
    NonIntegrableTail,
    Overflow,
    TooLarge,
    ParseError,
    UnknownField,
};

std::string_view to_string(ErrorCode code);

// Parameter-class errors map to CLI exit code 2, numeric failures to 3.
bool is_parameter_error(ErrorCode code);

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

// Carries the 1-based line/column of the offending token.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, int line, int column, std::string token)
        : Error(ErrorCode::ParseError,
                what + " at line " + std::to_string(line) + ", column " + std::to_string(column) +
                    " near '" + token + "'"),
          line_(line), column_(column), token_(std::move(token))
    {
    }

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& token() const noexcept { return token_; }

  private:
    int line_;
    int column_;
    std::string token_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what)
{
    if (!cond) fail(ErrorCode::BadParam, what);
}

}  // namespace gwtails
