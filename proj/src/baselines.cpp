#include "levybg/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace levybg {

void ThresholdSpec::validate() const {
    if (!(c > 0.0)) throw std::invalid_argument("ThresholdSpec: c must be > 0");
    if (!(omega > 0.0) || !(omega < 0.5))
        throw std::invalid_argument("ThresholdSpec: omega must lie in (0, 1/2)");
}

double ThresholdSpec::threshold(double h) const { return c * std::pow(h, omega); }

std::size_t aj_count(const IncrementBatch& batch, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("aj_count: tau must be > 0");
    std::size_t count = 0;
    for (double x : batch.values)
        if (std::abs(x) > tau) ++count;
    return count;
}

double aj_alpha(const IncrementBatch& batch, const ThresholdSpec& spec1,
                const ThresholdSpec& spec2) {
    spec1.validate();
    spec2.validate();
    const double t1 = spec1.threshold(batch.h);
    const double t2 = spec2.threshold(batch.h);
    if (t1 == t2) throw std::invalid_argument("aj_alpha: thresholds must be distinct");
    const auto u1 = aj_count(batch, t1);
    const auto u2 = aj_count(batch, t2);
    if (u1 == 0 || u2 == 0)
        throw std::runtime_error("aj_alpha: insufficient exceedances at a threshold");
    return std::log(static_cast<double>(u1) / static_cast<double>(u2)) / std::log(t2 / t1);
}

double truncated_rv(const IncrementBatch& batch, const ThresholdSpec& spec) {
    spec.validate();
    const double tau = spec.threshold(batch.h);
    double s = 0.0;
    for (double x : batch.values)
        if (std::abs(x) <= tau) s += x * x;
    return s / batch.horizon();
}

}  // namespace levybg
