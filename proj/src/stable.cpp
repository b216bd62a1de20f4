#include "levybg/stable.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "levybg/rng.hpp"
#include "levybg/special.hpp"

namespace levybg {

void StableSpec::validate(bool allow_alpha_two) const {
    if (alpha == 1.0)
        throw std::invalid_argument(
            "StableSpec: alpha = 1 is not supported (tan(pi alpha/2) pole in the "
            "standardization; use alpha != 1)");
    const double hi = allow_alpha_two ? 2.0 + 1e-15 : 2.0;
    if (!(alpha > 0.0) || !(alpha < hi) || !std::isfinite(alpha))
        throw std::invalid_argument("StableSpec: alpha must lie in (0,2), got " +
                                    std::to_string(alpha));
    if (!(std::abs(beta) <= 1.0))
        throw std::invalid_argument("StableSpec: |beta| must be <= 1, got " +
                                    std::to_string(beta));
    if (!(scale >= 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("StableSpec: scale must be >= 0");
}

void SimModelSpec::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("SimModelSpec: sigma must be >= 0");
    if (!std::isfinite(mu)) throw std::invalid_argument("SimModelSpec: mu must be finite");
    double prev = 2.0;
    for (const auto& c : components) {
        c.validate();
        if (!(c.alpha < prev))
            throw std::invalid_argument(
                "SimModelSpec: component alphas must be strictly decreasing");
        prev = c.alpha;
    }
    if (nuisance) nuisance->validate();
}

bool SimModelSpec::nuisance_within_theory() const {
    if (!nuisance || nuisance->scale == 0.0 || components.empty()) return true;
    return nuisance->alpha < 0.5 * components.front().alpha;
}

std::vector<double> sample_standard_stable(double alpha, double beta, std::size_t n,
                                           std::uint64_t seed) {
    StableSpec{alpha, beta, 1.0}.validate(/*allow_alpha_two=*/true);

    const double tb = beta * std::tan(0.5 * M_PI * alpha);
    const double b0 = std::atan(tb) / alpha;
    const double s0 = std::pow(1.0 + tb * tb, 0.5 / alpha);
    const double ex = (1.0 - alpha) / alpha;

    Rng rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = M_PI * (rng.u01() - 0.5);
        const double w = rng.exponential();
        const double cv = std::cos(v);
        const double num = std::sin(alpha * (v + b0));
        const double c2 = std::max(std::cos(v - alpha * (v + b0)), 1e-300);
        out[i] = s0 * num / std::pow(cv, 1.0 / alpha) * std::pow(c2 / w, ex);
    }
    return out;
}

double stable_compensation_drift(const StableSpec& s) {
    if (s.scale == 0.0 || s.beta == 0.0) return 0.0;
    const double rsum = std::pow(s.scale, s.alpha) / gamma_cos_factor(s.alpha);
    return s.alpha * s.beta * rsum / (s.alpha - 1.0);
}

IncrementBatch simulate_increments(const SimModelSpec& model, std::size_t n, double h,
                                   std::uint64_t seed) {
    model.validate();
    if (n < 1) throw std::invalid_argument("simulate_increments: n must be >= 1");
    if (!(h > 0.0)) throw std::invalid_argument("simulate_increments: h must be > 0");

    IncrementBatch batch;
    batch.h = h;
    batch.seed = seed;

    double drift = model.mu * h;
    std::vector<const StableSpec*> sources;
    for (const auto& c : model.components) sources.push_back(&c);
    if (model.nuisance && model.nuisance->scale > 0.0) sources.push_back(&*model.nuisance);
    for (const auto* s : sources) drift += stable_compensation_drift(*s) * h;

    batch.values.assign(n, drift);

    if (model.sigma > 0.0) {
        Rng g(derive_seed(seed, 0));
        const double sd = model.sigma * std::sqrt(h);
        for (std::size_t i = 0; i < n; ++i) batch.values[i] += sd * g.normal();
    }
    for (std::size_t j = 0; j < sources.size(); ++j) {
        const StableSpec& s = *sources[j];
        if (s.scale == 0.0) continue;
        const double fac = s.scale * std::pow(h, 1.0 / s.alpha);
        const auto draws = sample_standard_stable(s.alpha, s.beta, n, derive_seed(seed, j + 1));
        for (std::size_t i = 0; i < n; ++i) batch.values[i] += fac * draws[i];
    }
    return batch;
}

}  // namespace levybg
