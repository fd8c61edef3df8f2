#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qmetro::verify {

struct CriterionResult {
    int id;
    std::string name;
    bool passed;
    std::string detail;  // measured values vs tolerances
    double seconds;
};

struct Report {
    std::vector<CriterionResult> criteria;
    bool all_passed = false;
};

/// Runs the full acceptance suite, one pass/fail line per criterion on `os`.
Report run_all(std::ostream& os);

}  // namespace qmetro::verify
