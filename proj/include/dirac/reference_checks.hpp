#pragma once

#include <string>
#include <vector>

namespace dirac {

/// One reproduced reference value: |value - expected| <= tolerance.
struct CheckResult {
    std::string name;
    double value = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

/// Recomputes the published reference values: the five unit-sphere circuits (line integral
/// and Wilson loop), both monopole charges, string endpoints of the three built-in models,
/// the through-degeneracy path limits and cap independence of the flux prediction.
std::vector<CheckResult> reproduce_reference_values();

} // namespace dirac
