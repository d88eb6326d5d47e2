#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "etd/analysis.hpp"
#include "etd/experiments.hpp"

namespace etd::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,  // bad arguments, malformed or invalid problem
  kExitNumerical = 3,   // singular / ill-conditioned system
  kExitIo = 4,          // unreadable input or unwritable output
};

/// "1..50,7,9..10" -> {1, ..., 50, 7, 9, 10}. Throws std::invalid_argument.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// JSON rendering of an analysis report.
std::string analysis_json(const Scenario& scenario, const AnalysisReport& report);

/// CSV rendering of a moment curve; analytic columns are empty when no closed form applies.
std::string moments_csv(const Scenario& scenario, InterestMode mode, std::int64_t t_max);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace etd::cli
