#include "lsteer/schedule.hpp"

#include <stdexcept>
#include <string>

namespace lsteer {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
    if (steps < 2) throw std::invalid_argument("NoiseSchedule: need at least 2 steps");
    NoiseSchedule s;
    s.steps = steps;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.beta.resize(steps);
    s.a_bar.resize(steps);
    double prod = 1.0;
    for (int t = 0; t < steps; ++t) {
        double b = beta_start + (beta_end - beta_start) * t / (steps - 1);
        if (!(b > 0.0 && b < 1.0))
            throw std::invalid_argument("NoiseSchedule: beta out of (0,1) at t=" + std::to_string(t));
        if (t > 0 && b < s.beta[t - 1])
            throw std::invalid_argument("NoiseSchedule: beta must be nondecreasing");
        s.beta[t] = b;
        prod *= 1.0 - b;
        s.a_bar[t] = prod;
        if (t > 0 && !(s.a_bar[t] < s.a_bar[t - 1]))
            throw std::invalid_argument("NoiseSchedule: a_bar must be strictly decreasing");
    }
    if (s.a_bar[0] < 0.999)
        throw std::invalid_argument("NoiseSchedule: a_bar[0] too far from 1");
    if (!(s.a_bar[steps - 1] < 0.05))
        throw std::invalid_argument("NoiseSchedule: a_bar[T-1] must be < 0.05");
    return s;
}

}  // namespace lsteer
