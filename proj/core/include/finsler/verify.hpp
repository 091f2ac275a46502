#pragma once

#include <string>
#include <vector>

namespace finsler {

struct CheckResult {
    std::string name;
    bool pass{false};
    double measured{0.0};
    double threshold{0.0};
    // "below": measured must stay under threshold * tolerance_scale;
    // "above": measured must exceed threshold (witness checks, unscaled).
    std::string kind{"below"};
    // Accuracy limited by quadrature/discretization/finite differences, not
    // by the invariant itself: exempt from aggressive tolerance tightening.
    bool discretization_bound{false};
    std::string detail;
};

// Runs the cross-module invariant suite. tolerance_scale < 1 tightens every
// "below" threshold of the non-discretization-bound checks.
std::vector<CheckResult> run_verification_suite(double tolerance_scale = 1.0,
                                                unsigned workers = 0);

void write_verify_json(const std::string& path,
                       const std::vector<CheckResult>& results,
                       double tolerance_scale);

}  // namespace finsler
