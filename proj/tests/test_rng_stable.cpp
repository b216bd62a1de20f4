#include <doctest.h>

#include <cmath>
#include <complex>

#include "levybg/rng.hpp"
#include "levybg/stable.hpp"
#include "oracles.hpp"

using namespace levybg;

TEST_SUITE_BEGIN("stable");

TEST_CASE("seed determinism of the stable sampler") {
    const auto a = sample_standard_stable(0.5, 0.0, 4096, 20240117ull);
    const auto b = sample_standard_stable(0.5, 0.0, 4096, 20240117ull);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    const auto c = sample_standard_stable(0.5, 0.0, 4096, 20240118ull);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] != c[i]);
    CHECK(diff > 4000);
}

TEST_CASE("alpha = 2 boundary reduces to N(0,2)") {
    const std::size_t n = 1'000'000;
    const auto x = sample_standard_stable(2.0, 0.7, n, 7ull);  // beta irrelevant at 2
    double m = 0.0, v = 0.0;
    for (double xi : x) m += xi;
    m /= static_cast<double>(n);
    for (double xi : x) v += (xi - m) * (xi - m);
    v /= static_cast<double>(n - 1);
    CHECK(std::abs(v - 2.0) < 0.02);  // sd of sample variance ~ sqrt(8/n) ~ 0.003
    CHECK(std::abs(m) < 0.01);
}

TEST_CASE("empirical characteristic function matches the stable exponent") {
    const std::size_t n = 1'000'000;
    for (const auto& [alpha, beta] : {std::pair{1.3, 0.0}, {1.3, -1.0 / 3.0}, {0.7, 0.5}}) {
        const auto x = sample_standard_stable(alpha, beta, n, 99ull);
        for (double lam : {0.5, 1.0, 2.0}) {
            double cr = 0.0, ci = 0.0;
            for (double xi : x) {
                cr += std::cos(lam * xi);
                ci += std::sin(lam * xi);
            }
            cr /= static_cast<double>(n);
            ci /= static_cast<double>(n);
            const std::complex<double> target = std::exp(
                -std::pow(lam, alpha) *
                std::complex<double>(1.0, -beta * std::tan(0.5 * M_PI * alpha)));
            // per-component MC standard errors
            double vr = 0.0, vi = 0.0;
            for (double xi : x) {
                vr += std::pow(std::cos(lam * xi) - cr, 2);
                vi += std::pow(std::sin(lam * xi) - ci, 2);
            }
            const double se_r = std::sqrt(vr) / static_cast<double>(n);
            const double se_i = std::sqrt(vi) / static_cast<double>(n);
            CHECK(std::abs(cr - target.real()) < 4.0 * se_r);
            CHECK(std::abs(ci - target.imag()) < 4.0 * se_i);
        }
    }
}

TEST_CASE("alpha validation") {
    CHECK_THROWS_WITH_AS(sample_standard_stable(1.0, 0.0, 10, 1ull),
                         doctest::Contains("alpha = 1"), std::invalid_argument);
    CHECK_THROWS_AS(sample_standard_stable(0.0, 0.0, 10, 1ull), std::invalid_argument);
    CHECK_THROWS_AS(sample_standard_stable(2.2, 0.0, 10, 1ull), std::invalid_argument);
    CHECK_THROWS_AS(sample_standard_stable(1.5, 1.5, 10, 1ull), std::invalid_argument);
    // alpha = 2 is allowed for the sampler but not inside a model
    StableSpec s{2.0, 0.0, 1.0};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    CHECK_NOTHROW(s.validate(true));
}

TEST_CASE("pure Brownian increments have variance sigma^2 h") {
    SimModelSpec model;
    model.sigma = 1.0;
    const std::size_t n = 1'000'000;
    const double h = 1e-4;
    const auto batch = simulate_increments(model, n, h, 5ull);
    double m = 0.0, v = 0.0;
    for (double x : batch.values) m += x;
    m /= static_cast<double>(n);
    for (double x : batch.values) v += (x - m) * (x - m);
    v /= static_cast<double>(n - 1);
    CHECK(std::abs(v - h) < 0.01 * h);
    CHECK(batch.horizon() == doctest::Approx(100.0));
}

TEST_CASE("degenerate model gives exactly zero increments") {
    SimModelSpec model;
    model.mu = 0.0;
    model.sigma = 0.0;
    model.components = {{1.3, 0.0, 0.0}};
    const auto batch = simulate_increments(model, 1000, 0.01, 9ull);
    for (double x : batch.values) CHECK(x == 0.0);
}

TEST_CASE("batch determinism is bit exact") {
    SimModelSpec model;
    model.sigma = 1.0;
    model.components = {{1.3, -1.0 / 3.0, 1.0}};
    model.nuisance = StableSpec{0.5, 0.0, 0.1};
    const auto a = simulate_increments(model, 10000, 1.0 / 23400.0, 12345ull);
    const auto b = simulate_increments(model, 10000, 1.0 / 23400.0, 12345ull);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("self-similarity: h^{1/alpha} S_1 vs direct small-step simulation") {
    const double alpha = 1.3, h = 1e-3;
    const std::size_t n = 100'000;
    auto scaled = sample_standard_stable(alpha, 0.0, n, 31ull);
    const double fac = std::pow(h, 1.0 / alpha);
    for (auto& x : scaled) x *= fac;

    SimModelSpec model;
    model.sigma = 0.0;
    model.components = {{alpha, 0.0, 1.0}};
    const auto direct = simulate_increments(model, n, h, 77ull);

    const double ks = oracles::ks_two_sample(scaled, direct.values);
    const double crit = 1.628 * std::sqrt(2.0 / static_cast<double>(n));  // 1% level
    CHECK(ks < crit);
}

TEST_CASE("nuisance theory flag") {
    SimModelSpec model;
    model.components = {{1.3, -1.0 / 3.0, 1.0}};
    model.nuisance = StableSpec{0.5, 0.0, 0.1};
    CHECK(model.nuisance_within_theory());  // 0.5 < 0.65
    model.nuisance = StableSpec{0.7, 0.0, 0.1};
    CHECK_FALSE(model.nuisance_within_theory());
    CHECK_NOTHROW(model.validate());  // flagged, not rejected
}

TEST_CASE("skewed components carry the compensation drift") {
    // triplet-(0,0,nu) component: scale S_t + b t with b = a (r+ - r-)/(a - 1)
    const StableSpec s{1.3, -1.0 / 3.0, 1.0};
    const double b = stable_compensation_drift(s);
    CHECK(b < 0.0);  // beta < 0 and alpha > 1
    SimModelSpec model;
    model.sigma = 0.0;
    model.components = {s};
    const std::size_t n = 200'000;
    const double h = 1e-4;
    const auto batch = simulate_increments(model, n, h, 3ull);
    auto raw = sample_standard_stable(s.alpha, s.beta, n, derive_seed(3ull, 1));
    const double fac = std::pow(h, 1.0 / s.alpha);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(batch.values[i] == doctest::Approx(fac * raw[i] + b * h).epsilon(1e-12));
}

TEST_SUITE_END();
