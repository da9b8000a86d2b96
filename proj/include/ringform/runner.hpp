#pragma once

#include "ringform/errors.hpp"
#include "ringform/scenario.hpp"

#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ringform {

enum class Subcommand { analyze, simulate_di, simulate_quad, plan_velocity };

/// Parses "analyze", "simulate-di", "simulate-quad" or "plan-velocity".
std::optional<Subcommand> parse_subcommand(std::string_view name);
std::string_view subcommand_name(Subcommand command);

/// printf-style formatting with -0 folded to 0 so output is byte-stable.
std::string format_real(const char* format, double value);

/// Files a run may write. Unset paths are skipped.
struct RunOutputs {
    std::optional<std::string> csv;     // eigenvalues or trajectory
    std::optional<std::string> metrics; // simulate-quad only
};

struct ExpectationResult {
    Expectation expectation;
    std::vector<double> observed; // empty when the run did not produce it
    bool passed = false;
};

/// Named scalar or vector quantities a run produced, plus the verdicts on
/// the config's expect.* lines.
struct RunReport {
    std::map<std::string, std::vector<double>> observed;
    std::vector<ExpectationResult> expectations;
    std::exception_ptr error; // module error that ended the run, if any

    bool expectations_passed() const;
};

/// `analyze` for a bare (m, k): key-value lines to `out`, optional
/// `ell,re,im` CSV.
RunReport run_analyze(int m, double k, std::ostream& out, const std::optional<std::string>& csv_path);

/// Root locus of block `ell` over `steps` evenly spaced k in [k_min, k_max],
/// written as `k,re1,im1,re2,im2`.
void run_root_locus(int m, int ell, double k_min, double k_max, int steps, const std::string& path);

/// Runs one subcommand on a parsed scenario and checks its expectations.
/// A ringform::Error raised by the run is stored in RunReport::error (its
/// exit code is observable as `exit_code`); other exceptions propagate.
RunReport run_scenario(const ScenarioConfig& config, Subcommand command, const RunOutputs& outputs,
                       std::uint64_t seed, std::ostream& out);

/// Seed from RINGFORM_SEED (default 0). Throws ValidationError when the
/// variable is set but not an unsigned integer.
std::uint64_t seed_from_environment();

/// Single diagnostic line: `error=<kind> [time=<t>] message=<text>`.
std::string error_line(const std::exception& error);

/// Exit status for an exception (2 for anything that is not a ringform::Error).
int exit_status(const std::exception& error);

} // namespace ringform
