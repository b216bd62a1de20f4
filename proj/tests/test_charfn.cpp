#include <doctest.h>

#include <cmath>
#include <complex>

#include "levybg/charfn.hpp"
#include "levybg/rng.hpp"
#include "levybg/special.hpp"
#include "oracles.hpp"

using namespace levybg;

namespace {

ThetaParams ref_theta() {  // the simulation-study law: sigma=1, alpha=1.3, beta=-1/3
    SimModelSpec model;
    model.sigma = 1.0;
    model.components = {{1.3, -1.0 / 3.0, 1.0}};
    return theta_from_model(model);
}

}  // namespace

TEST_SUITE_BEGIN("charfn");

TEST_CASE("Gaussian-only symbol is sigma^2 lambda^2 / 2") {
    ThetaParams t;
    t.sigma_sq = 1.0;
    const auto psi = levy_symbol(t, 2.0);
    CHECK(psi.real() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(psi.imag() == 0.0);
}

TEST_CASE("unit-scale standardization: psi(1) = 1 for the symmetric component") {
    ThetaParams t;
    t.sigma_sq = 0.0;
    const double rsum = 1.0 / gamma_cos_factor(1.3);
    t.components = {{1.3, 0.5 * rsum, 0.5 * rsum}};
    const auto psi = levy_symbol(t, 1.0);
    CHECK(psi.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(psi.imag()) < 1e-14);
}

TEST_CASE("Hermitian symmetry of the symbol") {
    ThetaParams t;
    t.sigma_sq = 0.5;
    t.components = {{1.3, 0.4, 0.1}};
    for (double lam : {0.3, 1.0, 7.7, 31.0}) {
        const auto a = levy_symbol(t, lam);
        const auto b = levy_symbol(t, -lam);
        CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-14));
        CHECK(a.imag() == doctest::Approx(-b.imag()).epsilon(1e-14));
    }
}

TEST_CASE("closed-form symbol against direct Levy-Khintchine quadrature") {
    Rng rng(4242ull);
    for (int trial = 0; trial < 10; ++trial) {
        ThetaParams t;
        t.sigma_sq = rng.uniform(0.0, 2.0);
        const double alpha = trial % 2 ? rng.uniform(1.05, 1.9) : rng.uniform(0.2, 0.95);
        t.components = {{alpha, rng.uniform(0.05, 2.0), rng.uniform(0.05, 2.0)}};
        const double lam = rng.uniform(-50.0, 50.0);
        const auto closed = levy_symbol(t, lam);
        const auto quad = std::complex<double>(0.5 * t.sigma_sq * lam * lam, 0.0) -
                          oracles::levy_khintchine_component(lam, alpha,
                                                             t.components[0].r_plus,
                                                             t.components[0].r_minus);
        CHECK(std::abs(closed - quad) <= 1e-8 * std::max(1.0, std::abs(closed)));
    }
}

TEST_CASE("characteristic function basics") {
    const ThetaParams t = ref_theta();
    CHECK(char_fn(t, 0.01, 5.0, 0.0) == std::complex<double>(1.0, 0.0));

    ThetaParams g;
    g.sigma_sq = 1.0;
    const auto v = char_fn(g, 0.01, 10.0, 1.0);
    CHECK(v.real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(v.imag() == 0.0);

    // independent components factorize
    ThetaParams full = ref_theta();
    ThetaParams jumps_only = full;
    jumps_only.sigma_sq = 0.0;
    ThetaParams gauss_only;
    gauss_only.sigma_sq = full.sigma_sq;
    const double h = 1.0 / 23400.0, u = 48.0, lam = 3.0;
    const auto prod = char_fn(gauss_only, h, u, lam) * char_fn(jumps_only, h, u, lam);
    const auto whole = char_fn(full, h, u, lam);
    CHECK(std::abs(whole - prod) < 1e-14);

    // semigroup in h
    const auto h1 = char_fn(full, 0.25, 2.0, 1.7), h2 = char_fn(full, 0.75, 2.0, 1.7);
    const auto sum = char_fn(full, 1.0, 2.0, 1.7);
    CHECK(std::abs(sum - h1 * h2) < 1e-15);

    for (double lam2 : {0.4, 1.9, 11.0}) {
        const auto a = char_fn(full, h, u, lam2), b = char_fn(full, h, u, -lam2);
        CHECK(std::abs(a - std::conj(b)) < 1e-15);
        CHECK(std::abs(a) <= 1.0 + 1e-15);
    }
}

TEST_CASE("density grid reproduces the Gaussian closed form") {
    ThetaParams g;
    g.sigma_sq = 1.0;
    const auto grid = density_grid(g, 1.0, 1.0, {});  // N(0,1)
    double worst = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double x = grid.x(j);
        const double target = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        worst = std::max(worst, std::abs(grid.values[j] - target));
    }
    CHECK(worst < 1e-8);
    CHECK(grid.mass() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("density grid invariants at the reference law") {
    const ThetaParams t = ref_theta();
    const double h = 1.0 / 23400.0;
    const double u = 1.0 / std::sqrt(h * std::abs(std::log(h)));
    const auto grid = density_grid(t, h, u, {});
    CHECK(grid.mass() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(grid.max_neg_ringing >= -1e-8);
    double mean_abs = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
        mean_abs += std::abs(grid.x(j)) * grid.values[j] * grid.dx;
    CHECK(std::isfinite(mean_abs));
}

TEST_CASE("grid CDF matches the empirical CDF of simulated draws") {
    SimModelSpec model;
    model.sigma = 1.0;
    model.components = {{1.3, -1.0 / 3.0, 1.0}};
    const ThetaParams t = theta_from_model(model);
    const double h = 1.0 / 23400.0;
    const double u = 1.0 / std::sqrt(h * std::abs(std::log(h)));
    const std::size_t n = 1'000'000;
    auto batch = simulate_increments(model, n, h, 555ull);
    for (auto& x : batch.values) x *= u;
    std::sort(batch.values.begin(), batch.values.end());

    // fine spacing keeps the cumulative midpoint error ~ dx^2 p' / 24 ~ 1e-5
    const auto grid = density_grid(t, h, u, GridSpec{std::size_t{1} << 15, 256.0});
    std::vector<double> cum(grid.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        acc += grid.values[j] * grid.dx;
        cum[j] = acc;
    }
    double worst = 0.0;
    for (int k = 0; k <= 200; ++k) {
        const double x = -8.0 + 16.0 * k / 200.0;
        const auto j = static_cast<std::size_t>(std::floor((x - grid.x0) / grid.dx));
        const double cdf = cum[j];
        const double xm = grid.x(j) + 0.5 * grid.dx;
        const auto it = std::upper_bound(batch.values.begin(), batch.values.end(), xm);
        const double ecdf =
            static_cast<double>(it - batch.values.begin()) / static_cast<double>(n);
        const double se =
            std::sqrt(std::max(ecdf * (1.0 - ecdf), 1e-12) / static_cast<double>(n));
        worst = std::max(worst, std::abs(cdf - ecdf) - 4.0 * se);
    }
    CHECK(worst <= 0.0);
}

TEST_CASE("empirical characteristic function of increments matches exp(-h psi)") {
    SimModelSpec model;
    model.sigma = 1.0;
    model.components = {{1.3, -1.0 / 3.0, 1.0}};
    const ThetaParams t = theta_from_model(model);
    const double h = 1.0 / 23400.0;
    const std::size_t n = 1'000'000;
    const auto batch = simulate_increments(model, n, h, 2024ull);
    for (int k = 1; k <= 20; ++k) {
        const double lam = 8.0 * k;  // raw-increment frequencies
        double cr = 0.0, ci = 0.0;
        for (double x : batch.values) {
            cr += std::cos(lam * x);
            ci += std::sin(lam * x);
        }
        cr /= static_cast<double>(n);
        ci /= static_cast<double>(n);
        const auto target = std::exp(-h * levy_symbol(t, lam));
        double vr = 0.0, vi = 0.0;
        for (double x : batch.values) {
            vr += std::pow(std::cos(lam * x) - cr, 2);
            vi += std::pow(std::sin(lam * x) - ci, 2);
        }
        const double se_r = std::sqrt(vr) / static_cast<double>(n);
        const double se_i = std::sqrt(vi) / static_cast<double>(n);
        CHECK(std::abs(cr - target.real()) < 4.0 * se_r);
        CHECK(std::abs(ci - target.imag()) < 4.0 * se_i);
    }
}

TEST_CASE("inversion cutoff failure is reported") {
    ThetaParams t;
    t.sigma_sq = 0.0;
    t.components = {{0.3, 1e-6, 1e-6}};
    CHECK_THROWS_WITH_AS(density_grid(t, 1e-8, 1.0, {}),
                         doctest::Contains("inversion cutoff not found"),
                         std::runtime_error);
}

TEST_CASE("grid spec validation") {
    ThetaParams g;
    g.sigma_sq = 1.0;
    CHECK_THROWS_AS(density_grid(g, 1.0, 1.0, GridSpec{100, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(density_grid(g, 1.0, 1.0, GridSpec{3000, 0.0}), std::invalid_argument);
}

TEST_CASE("stable density: symmetry, Gaussian limit, quadrature oracle") {
    const double xs[] = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
    const auto sym = stable_density(1.3, 0.0, xs);
    CHECK(sym[0] == doctest::Approx(sym[6]).epsilon(1e-10));
    CHECK(sym[1] == doctest::Approx(sym[5]).epsilon(1e-10));
    CHECK(sym[2] == doctest::Approx(sym[4]).epsilon(1e-10));

    const double zero[] = {0.0};
    const auto near_gauss = stable_density(1.9999, 0.3, zero);
    CHECK(std::abs(near_gauss[0] - 1.0 / (2.0 * std::sqrt(M_PI))) < 1e-3);

    // independent adaptive-Simpson oracle for alpha = 1/2
    const double pts[] = {0.5, 1.0, 2.0};
    const auto vals = stable_density(0.5, 0.0, pts);
    for (int i = 0; i < 3; ++i) {
        const double x = pts[i];
        const auto integrand = [&](double lam) {
            return std::exp(-std::sqrt(lam)) * std::cos(lam * x);
        };
        const double lam_max = std::pow(45.0, 2.0);
        const double oracle = oracles::integrate(integrand, 0.0, lam_max, 1e-14, 48) / M_PI;
        CHECK(vals[i] == doctest::Approx(oracle).epsilon(1e-6));
    }

    CHECK_THROWS_AS(stable_density(1.0, 0.0, xs), std::invalid_argument);

    // integrates to one: grid mass plus the exact power-tail remainder
    // P(|S| > X) -> (r+ + r-) X^{-alpha} = X^{-alpha} / G(alpha)
    const double big_x = 60.0, dx = 0.02, alpha = 1.7;
    std::vector<double> wide;
    for (double x = -big_x; x <= big_x + 1e-12; x += dx) wide.push_back(x);
    const auto dens = stable_density(alpha, 0.2, wide);
    double massv = 0.0, worst_neg = 0.0;
    for (std::size_t i = 0; i < dens.size(); ++i) {
        const double w = (i == 0 || i + 1 == dens.size()) ? 0.5 : 1.0;
        massv += w * dens[i] * dx;
        worst_neg = std::min(worst_neg, dens[i]);
    }
    const double tail = std::pow(big_x, -alpha) / gamma_cos_factor(alpha);
    CHECK(std::abs(massv + tail - 1.0) < 1e-5);
    CHECK(worst_neg > -1e-8);
}

TEST_SUITE_END();
