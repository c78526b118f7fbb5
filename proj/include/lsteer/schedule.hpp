#pragma once

#include <cstdint>
#include <vector>

namespace lsteer {

// Forward-process variance schedule: beta[t] per step and the cumulative
// signal level a_bar[t] = prod_{s<=t} (1 - beta[s]).
struct NoiseSchedule {
    int steps = 0;
    double beta_start = 0.0;
    double beta_end = 0.0;
    std::vector<double> beta;
    std::vector<double> a_bar;

    // Linear beta ramp. Validates: beta in (0,1) nondecreasing, a_bar strictly
    // decreasing with a_bar[0] >= 0.999 and a_bar[T-1] < 0.05.
    static NoiseSchedule linear(int steps, double beta_start, double beta_end);
};

}  // namespace lsteer
