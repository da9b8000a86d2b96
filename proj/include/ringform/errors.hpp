#pragma once

#include <stdexcept>
#include <string>

namespace ringform {

// Exit statuses surfaced by the command-line tool.
enum class ExitCode : int {
    ok = 0,
    validation = 2,
    infeasible = 3,
    divergence = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& kind, const std::string& what)
        : std::runtime_error(what), code_(code), kind_(kind) {}

    ExitCode code() const noexcept { return code_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    ExitCode code_;
    std::string kind_;
};

// Bad arguments, malformed configuration, shape mismatches.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what)
        : Error(ExitCode::validation, "validation", what) {}
};

// A gain or plan request that the stability certificate rules out.
class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& what)
        : Error(ExitCode::infeasible, "infeasible", what) {}
};

// Integration aborted: non-finite or runaway state, or attitude outside the
// range where the Euler-rate map is defined.
class DivergenceError : public Error {
public:
    DivergenceError(double time, const std::string& what)
        : Error(ExitCode::divergence, "divergence", what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace ringform
