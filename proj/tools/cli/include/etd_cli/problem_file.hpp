#pragma once

#include <string>

#include "etd/experiments.hpp"

namespace etd::cli {

inline constexpr int kSchemaVersion = 1;

/// Malformed problem document (bad JSON, missing field, wrong shape).
class ProblemFormatError : public Error {
 public:
  using Error::Error;
};

/// The input file could not be read.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Parses a problem document. Shape errors throw ProblemFormatError; the
/// semantic invariants are left to validate_task.
Scenario parse_problem(const std::string& text, const std::string& fallback_name = "problem");

/// Reads and parses a file; throws InputError if it cannot be read.
Scenario load_problem_file(const std::string& path);

/// Built-in scenario if `input` names one, otherwise a problem file path.
Scenario resolve_input(const std::string& input);

/// Inverse of parse_problem.
std::string serialize_problem(const Scenario& scenario);

}  // namespace etd::cli
