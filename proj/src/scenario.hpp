#pragma once

#include <string>

#include "policy.hpp"
#include "problem.hpp"
#include "steering.hpp"

namespace covsteer {

struct OutputOptions {
  std::string dir = "out";
  // Ellipses in ellipses.csv are drawn at this many standard deviations.
  double ellipse_sigma = 3.0;
};

struct Scenario {
  std::string name;
  ProblemSpec spec;
  // Empty selects the backend named by COVSTEER_BACKEND.
  std::string backend;
  SolveOptions solver;
  SimOptions simulation;
  OutputOptions output;
  // FNV-1a 64 of the source text, hex.
  std::string hash;
};

// Strict YAML schema; unknown keys are rejected. Throws Error with
// kParseError (malformed YAML, with line and column), kSchemaError (wrong
// keys or types, with line) or kValidationError (spec rejected by validate).
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::string& path);

// Same as parse_scenario but skips validate(), so a broken spec can still be
// inspected.
Scenario parse_scenario_unchecked(const std::string& text,
                                  const std::string& origin = "<string>");

std::string fnv1a_hex(const std::string& text);

}  // namespace covsteer
