#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fockspec {

struct AcceptanceItem {
    int number = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::string detail;
};

// Runs the full criteria suite in order, streaming one PASS/FAIL line per
// item to os as it completes. Exceptions inside an item fail that item and
// carry the message into the detail column; the suite always runs to the
// end. All tolerances and wall budgets live in the implementations.
std::vector<AcceptanceItem> run_acceptance(std::ostream& os);

bool all_passed(const std::vector<AcceptanceItem>& items);

}  // namespace fockspec
