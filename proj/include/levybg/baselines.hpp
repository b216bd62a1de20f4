#pragma once

#include "levybg/stable.hpp"

namespace levybg {

// Threshold tau_n = c h^omega; omega < 1/2 keeps the diffusion below it.
struct ThresholdSpec {
    double c = 1.0;
    double omega = 0.49;

    void validate() const;
    double threshold(double h) const;
};

// Number of increments with |x| > tau.
std::size_t aj_count(const IncrementBatch& batch, double tau);

// Two-threshold inversion of the scaling relation U(tau) ~ tau^{-alpha}:
// log(U1/U2) / log(tau2/tau1). Throws when either count is zero.
double aj_alpha(const IncrementBatch& batch, const ThresholdSpec& spec1,
                const ThresholdSpec& spec2);

// sum x^2 1(|x| <= c h^omega) / T.
double truncated_rv(const IncrementBatch& batch, const ThresholdSpec& spec);

}  // namespace levybg
