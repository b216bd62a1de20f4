#include <doctest.h>

#include <cmath>

#include "levybg/moments.hpp"
#include "levybg/rng.hpp"
#include "levybg/special.hpp"
#include "oracles.hpp"

using namespace levybg;

namespace {

ThetaParams ref_theta() {
    SimModelSpec model;
    model.sigma = 1.0;
    model.components = {{1.3, -1.0 / 3.0, 1.0}};
    return theta_from_model(model);
}

// Condition-U compliant factor for eta = 1/2 functions (tau < eta / (sigma sqrt 8))
double theory_u(std::size_t n, double tau = 0.12) {
    return tau * std::sqrt(static_cast<double>(n)) /
           std::sqrt(std::log(static_cast<double>(n)));
}

MomentFunction scaled_copy(const MomentFunction& f, double c) {
    MomentFunction g;
    auto e = f.eval, e1 = f.d1, e2 = f.d2, e3 = f.d3;
    g.eval = [e, c](double x) { return e(c * x); };
    g.d1 = [e1, c](double x) { return c * e1(c * x); };
    g.d2 = [e2, c](double x) { return c * c * e2(c * x); };
    g.d3 = [e3, c](double x) { return c * c * c * e3(c * x); };
    g.eta = f.eta / c;
    g.support_max = f.support_max > 0.0 ? f.support_max / c : 0.0;
    g.symmetric = f.symmetric;
    g.sup_norm = f.sup_norm;
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("moments");

TEST_CASE("reference moment set shape") {
    const auto set = default_moment_set();
    REQUIRE(set.functions.size() == 4);
    CHECK(set.eta == doctest::Approx(0.125));
    const auto& f1 = set.functions[0];
    const auto& f2 = set.functions[1];
    const auto& f3 = set.functions[2];
    const auto& f4 = set.functions[3];

    CHECK(f1.d2(0.0) == doctest::Approx(20.0));  // Taylor of 1 - e^{-10x^2}
    const double dd = 1e-4;
    const double fd2 = (f1.eval(dd) - 2.0 * f1.eval(0.0) + f1.eval(-dd)) / (dd * dd);
    CHECK(fd2 == doctest::Approx(20.0).epsilon(1e-6));
    CHECK(f1.eval(0.0) == 0.0);
    CHECK(f1.d1(0.0) == 0.0);

    CHECK(f2.eval(0.1) == 0.0);
    CHECK(f2.eval(-0.1) == 0.0);
    CHECK(f2.eval(0.49) == 0.0);
    CHECK(f2.eval(2.0) > 0.0);  // the inner edge underflows until ~1.5
    CHECK(f3.eval(0.124) == 0.0);
    CHECK(f3.eval(0.5) > 0.0);
    for (double x = -9.9; x < 10.0; x += 0.37) {
        if (x >= 0.0) CHECK(f4.eval(x) == f3.eval(x));
        else CHECK(f4.eval(x) == f2.eval(x));
    }
    CHECK(f2.sup_norm > 0.0);
    CHECK(f2.sup_norm < 1e-40);  // the bumps are tiny by construction
    for (double x = 0.51; x < 10.0; x += 0.1)
        CHECK(f2.eval(x) <= f2.sup_norm * (1 + 1e-12));
    CHECK_NOTHROW(validate_moment_set(set));
}

TEST_CASE("moment-function derivatives are consistent") {
    for (const auto& set : {default_moment_set(), remark_moment_set()}) {
        for (const auto& f : set.functions) {
            for (double x = -7.3; x < 7.5; x += 0.61) {
                const double d = 1e-6 * std::max(1.0, std::abs(x));
                const double fd1 = (f.eval(x + d) - f.eval(x - d)) / (2.0 * d);
                const double fd2 = (f.d1(x + d) - f.d1(x - d)) / (2.0 * d);
                const double fd3 = (f.d2(x + d) - f.d2(x - d)) / (2.0 * d);
                const double s1 = std::max(std::abs(f.d1(x)), 1e-8 * f.sup_norm);
                const double s2 = std::max(std::abs(f.d2(x)), 1e-7 * f.sup_norm);
                const double s3 = std::max(std::abs(f.d3(x)), 1e-6 * f.sup_norm);
                CHECK(std::abs(f.d1(x) - fd1) < 2e-4 * s1);
                CHECK(std::abs(f.d2(x) - fd2) < 2e-4 * s2);
                CHECK(std::abs(f.d3(x) - fd3) < 2e-3 * s3);
            }
        }
    }
}

TEST_CASE("jump functional against a Riemann-sum oracle") {
    const auto set = default_moment_set();
    const auto& f2 = set.functions[1];
    const double alpha = 1.3;
    const auto jf = jump_functional(alpha, +1, f2);
    CHECK(jf.converged);

    const std::size_t nodes = 1'000'000;
    const double lo = 0.5, hi = 10.0;
    const double dz = (hi - lo) / static_cast<double>(nodes);
    double riemann = 0.0;
    for (std::size_t i = 0; i <= nodes; ++i) {
        const double z = lo + dz * static_cast<double>(i);
        const double w = (i == 0 || i == nodes) ? 0.5 : 1.0;
        riemann += w * f2.eval(z) * std::pow(z, -1.0 - alpha);
    }
    riemann *= alpha * dz;
    CHECK(jf.value == doctest::Approx(riemann).epsilon(1e-6));

    for (double a : {0.4, 0.9, 1.2, 1.7}) {
        CHECK(jump_functional(a, +1, f2).value > 0.0);
        CHECK(jump_functional(a, -1, f2).value > 0.0);
    }
}

TEST_CASE("jump functional scaling law c^alpha") {
    const auto dflt = default_moment_set();
    const auto rmk = remark_moment_set();
    const auto& f2 = dflt.functions[1];
    const auto& g = rmk.functions[1];
    const auto& g2 = rmk.functions[2];
    for (double alpha : {0.7, 1.3, 1.9}) {
        const double base = jump_functional(alpha, +1, f2).value;
        // the reference set has f3(x) = f2(4x)
        CHECK(jump_functional(alpha, +1, dflt.functions[2]).value ==
              doctest::Approx(std::pow(4.0, alpha) * base).epsilon(1e-8));
        // remark set: f3 = g(2x)
        CHECK(jump_functional(alpha, -1, g2).value ==
              doctest::Approx(std::pow(2.0, alpha) * jump_functional(alpha, -1, g).value)
                  .epsilon(1e-8));
        // generic factor c = 3
        const auto s3 = scaled_copy(f2, 3.0);
        CHECK(jump_functional(alpha, +1, s3).value ==
              doctest::Approx(std::pow(3.0, alpha) * base).epsilon(1e-8));
    }
}

TEST_CASE("alpha derivative of the jump functional") {
    const auto rmk = remark_moment_set();
    const auto& g = rmk.functions[1];
    const auto& g2 = rmk.functions[2];

    for (double alpha : {0.7, 1.3}) {
        const double d = jump_functional_dalpha(alpha, +1, g).value;
        const double step = 1e-5;
        const double fd = (jump_functional(alpha + step, +1, g).value -
                           jump_functional(alpha - step, +1, g).value) /
                          (2.0 * step);
        CHECK(d == doctest::Approx(fd).epsilon(1e-4));

        // d/dalpha J g(2.)(0) = 2^alpha (dJ g + log 2 * J g)
        const double a = jump_functional(alpha, +1, g).value;
        const double lhs = jump_functional_dalpha(alpha, +1, g2).value;
        CHECK(lhs ==
              doctest::Approx(std::pow(2.0, alpha) * (d + std::log(2.0) * a)).epsilon(1e-8));

        // linearity: scaling f scales the output exactly
        MomentFunction cg = g;
        auto e = g.eval;
        cg.eval = [e](double x) { return 2.5 * e(x); };
        CHECK(jump_functional_dalpha(alpha, +1, cg).value ==
              doctest::Approx(2.5 * d).epsilon(1e-12));
    }
}

TEST_CASE("jump functional for a non-vanishing function (compensated head)") {
    const auto set = default_moment_set();
    const auto& f1 = set.functions[0];
    for (double alpha : {0.6, 1.5}) {
        const auto j = jump_functional(alpha, +1, f1);
        // log-spaced Riemann oracle of the compensated integrand
        const double eps = 1e-5;
        double acc = 0.0;
        const std::size_t nodes = 2'000'000;
        const double hi = 2000.0;
        const double ratio = std::pow(hi / eps, 1.0 / static_cast<double>(nodes));
        double z = eps;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double zn = z * ratio;
            const double mid = 0.5 * (z + zn);
            acc += f1.eval(mid) * std::pow(mid, -1.0 - alpha) * (zn - z);
            z = zn;
        }
        const double head = 0.5 * f1.d2(0.0) * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);
        const double far_tail = std::pow(hi, -alpha) / alpha;  // f1 ~ 1 beyond hi
        const double oracle = alpha * (acc + head + far_tail);
        CHECK(j.value == doctest::Approx(oracle).epsilon(1e-5));
    }
}

TEST_CASE("expected moment of the zero function is exactly zero") {
    MomentFunction zero;
    zero.eval = [](double) { return 0.0; };
    zero.d1 = zero.d2 = zero.d3 = zero.eval;
    zero.eta = 0.5;
    zero.support_max = 1.0;
    zero.sup_norm = 1.0;
    const auto v = expected_moment(ref_theta(), 1e-4, 10.0, zero);
    CHECK(v.value == 0.0);
}

TEST_CASE("Gaussian closed form for the first moment function") {
    ThetaParams g;
    g.sigma_sq = 1.0;
    const auto set = default_moment_set();
    SUBCASE("single pinned value") {
        const auto v = expected_moment(g, 1e-4, 10.0, set.functions[0]);
        const double target = 1.0 - 1.0 / std::sqrt(1.2);  // 0.0871290708...
        CHECK(std::abs(v.value - target) < 1e-6);
    }
    SUBCASE("sweep over (h,u) pairs") {
        Rng rng(8ull);
        for (int k = 0; k < 5; ++k) {
            const double h = std::pow(10.0, -rng.uniform(2.0, 6.0));
            const double u = rng.uniform(1.0, 0.3 / std::sqrt(h));
            const double v = expected_moment(g, h, u, set.functions[0]).value;
            const double target = 1.0 - 1.0 / std::sqrt(1.0 + 20.0 * u * u * h);
            CHECK(std::abs(v - target) < 1e-6);
        }
    }
}

TEST_CASE("expected moments match Monte Carlo at the reference law") {
    SimModelSpec model;
    model.sigma = 1.0;
    model.components = {{1.3, -1.0 / 3.0, 1.0}};
    const ThetaParams t = theta_from_model(model);
    const double h = 1.0 / 23400.0;
    const double u = 1.0 / std::sqrt(h * std::abs(std::log(h)));
    const std::size_t n = 1'000'000;
    const auto batch = simulate_increments(model, n, h, 31337ull);
    const auto set = default_moment_set();
    const auto mv = expected_moment_vector(t, h, u, set);
    REQUIRE(mv.converged);
    for (std::size_t j = 0; j < 4; ++j) {
        const auto& f = set.functions[j];
        double mean = 0.0;
        for (double x : batch.values) mean += f.eval(u * x);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double x : batch.values) var += std::pow(f.eval(u * x) - mean, 2);
        const double se = std::sqrt(var) / static_cast<double>(n);
        CHECK(std::abs(mean - mv.values[static_cast<Eigen::Index>(j)]) < 4.0 * se);
    }
}

TEST_CASE("linearity and symmetry of expected moments") {
    const ThetaParams t = ref_theta();
    const double h = 1.0 / 23400.0, u = 48.0;
    const auto set = default_moment_set();
    const auto base = expected_moment_vector(t, h, u, set);
    const GridSpec fixed{base.n_points, base.cutoff};

    MomentFunction combo;
    auto e2 = set.functions[1].eval, e3 = set.functions[2].eval;
    combo.eval = [e2, e3](double x) { return 2.0 * e2(x) - 0.5 * e3(x); };
    combo.d1 = combo.d2 = combo.d3 = nullptr;
    combo.eta = 0.125;
    combo.support_max = 10.0;
    combo.sup_norm = 2.5 * set.functions[1].sup_norm;
    const double lhs = expected_moment(t, h, u, combo, fixed).value;
    const double rhs = 2.0 * expected_moment(t, h, u, set.functions[1], fixed).value -
                       0.5 * expected_moment(t, h, u, set.functions[2], fixed).value;
    CHECK(std::abs(lhs - rhs) <= 1e-10 * set.functions[1].sup_norm);

    // symmetric theta + mirrored f leaves the moment unchanged
    ThetaParams sym = t;
    const double rs = 0.5 * (t.components[0].r_plus + t.components[0].r_minus);
    sym.components[0].r_plus = sym.components[0].r_minus = rs;
    const auto& f4 = set.functions[3];
    MomentFunction mirrored;
    auto e4 = f4.eval;
    mirrored.eval = [e4](double x) { return e4(-x); };
    mirrored.d1 = mirrored.d2 = mirrored.d3 = nullptr;
    mirrored.eta = f4.eta;
    mirrored.support_max = f4.support_max;
    mirrored.sup_norm = f4.sup_norm;
    const double a = expected_moment(sym, h, u, f4, fixed).value;
    const double b = expected_moment(sym, h, u, mirrored, fixed).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("grid refinement changes converged moments by less than 1e-8") {
    const ThetaParams t = ref_theta();
    const double h = 1.0 / 23400.0, u = 48.0;
    const auto set = default_moment_set();
    const auto mv = expected_moment_vector(t, h, u, set);
    const auto mv2 =
        expected_moment_vector(t, h, u, set, GridSpec{2 * mv.n_points, mv.cutoff});
    for (Eigen::Index j = 0; j < 4; ++j) {
        const double scale = set.functions[static_cast<std::size_t>(j)].sup_norm;
        CHECK(std::abs(mv.values[j] - mv2.values[j]) / scale < 1e-8);
    }
}

TEST_CASE("small-time law (i): jump-vanishing functions") {
    const ThetaParams t = ref_theta();
    const auto set = default_moment_set();
    const auto& f2 = set.functions[1];
    const double alpha = 1.3;
    const double target = t.components[0].r_plus * jump_functional(alpha, +1, f2).value +
                          t.components[0].r_minus * jump_functional(alpha, -1, f2).value;
    for (double h : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const auto n = static_cast<std::size_t>(1.0 / h);
        const double u = theory_u(n);
        const double m = expected_moment(t, h, u, f2).value;
        const double gap = std::abs(m / (h * std::pow(u, alpha)) - target) / target;
        if (h == 1e-6) CHECK(gap < 0.05);
        const double st = smalltime_expansion(t, h, u, f2, SmallTimeCase::JumpLeading);
        CHECK(st == doctest::Approx(h * std::pow(u, alpha) * target).epsilon(1e-9));
    }
}

TEST_CASE("small-time laws (ii) and (iii): Gaussian terms") {
    ThetaParams g;
    g.sigma_sq = 1.0;
    const auto set = default_moment_set();
    const double h = 1e-6, u = 31.6227766;  // h u^2 = 1e-3

    const double mii = expected_moment(g, h, u, set.functions[0]).value;
    const double pii =
        smalltime_expansion(g, h, u, set.functions[0], SmallTimeCase::GaussianLeading);
    CHECK(pii == doctest::Approx(h * u * u * 10.0).epsilon(1e-12));
    CHECK(mii == doctest::Approx(pii).epsilon(0.02));

    // f1^2 has f(0) = f''(0) = 0 and f''''(0) = 6 f1''(0)^2 = 2400
    MomentFunction f1sq = product_function(set.functions[0], set.functions[0]);
    f1sq.d2 = [](double x) {
        const double e = std::exp(-10.0 * x * x);
        const double d1 = 20.0 * x * e;
        const double d2 = (20.0 - 400.0 * x * x) * e;
        return 2.0 * (d1 * d1 + (1.0 - e) * d2);
    };
    f1sq.d4_at_zero = 2400.0;
    const double miii = expected_moment(g, h, u, f1sq).value;
    const double piii = smalltime_expansion(g, h, u, f1sq, SmallTimeCase::QuarticLeading);
    CHECK(piii == doctest::Approx(h * h * std::pow(u, 4.0) * 300.0).epsilon(1e-12));
    CHECK(miii == doctest::Approx(piii).epsilon(0.1));

    CHECK_THROWS_AS(
        smalltime_expansion(g, h, u, set.functions[0], SmallTimeCase::QuarticLeading),
        std::invalid_argument);
    CHECK_THROWS_AS(
        smalltime_expansion(g, h, u, set.functions[1], SmallTimeCase::GaussianLeading),
        std::invalid_argument);
    ThetaParams nojumps;
    nojumps.sigma_sq = 1.0;
    CHECK_THROWS_AS(
        smalltime_expansion(nojumps, h, u, set.functions[1], SmallTimeCase::JumpLeading),
        std::invalid_argument);
}

TEST_CASE("moment jacobian: leading orders and method agreement") {
    const ThetaParams t = ref_theta();
    const auto set = default_moment_set();

    SUBCASE("sigma^2 and r+ leading terms") {
        const double h = 1e-6;
        const std::size_t n = 1'000'000;
        const double u = theory_u(n);
        const auto jac = moment_jacobian(t, h, u, set, JacobianMethod::Analytic);
        const double lead_s = h * u * u / 2.0 * set.functions[0].d2(0.0);
        CHECK(jac(0, 0) / lead_s == doctest::Approx(1.0).epsilon(0.02));
        const double alpha = t.components[0].alpha;
        const double lead_r =
            h * std::pow(u, alpha) * jump_functional(alpha, +1, set.functions[1]).value;
        CHECK(jac(1, 2) / lead_r == doctest::Approx(1.0).epsilon(0.05));
    }

    SUBCASE("analytic vs finite differences") {
        const double h = 1.0 / 23400.0;
        const double u = 1.0 / std::sqrt(h * std::abs(std::log(h)));
        const auto ja = moment_jacobian(t, h, u, set, JacobianMethod::Analytic);
        const auto jf = moment_jacobian(t, h, u, set, JacobianMethod::FiniteDifference);
        for (Eigen::Index r = 0; r < ja.rows(); ++r)
            for (Eigen::Index c = 0; c < ja.cols(); ++c) {
                const double scale =
                    std::max(std::abs(ja(r, c)), 1e-6 * ja.row(r).cwiseAbs().maxCoeff());
                CHECK(std::abs(ja(r, c) - jf(r, c)) / scale < 1e-3);
            }
    }
}

TEST_CASE("bias decay diagnostic") {
    SimModelSpec model;
    model.sigma = 1.0;
    model.components = {{1.3, -1.0 / 3.0, 1.0}};
    const ThetaParams t = theta_from_model(model);
    const auto set = default_moment_set();
    const double schedule[] = {1e-3, 1e-4};

    SUBCASE("no nuisance: bias within noise") {
        const auto table =
            bias_decay_diagnostic(model, t, set.functions[1], schedule, 200'000, 17ull);
        for (const auto& row : table.rows) CHECK(row.bias < 4.0 * row.mc_se);
    }
    SUBCASE("replication scaling of the noise band") {
        const auto t1 =
            bias_decay_diagnostic(model, t, set.functions[1], schedule, 100'000, 18ull);
        const auto t4 =
            bias_decay_diagnostic(model, t, set.functions[1], schedule, 400'000, 18ull);
        for (std::size_t i = 0; i < t1.rows.size(); ++i)
            CHECK(t4.rows[i].mc_se == doctest::Approx(0.5 * t1.rows[i].mc_se).epsilon(0.2));
    }
    SUBCASE("nuisance produces a reported bound slope") {
        model.nuisance = StableSpec{0.5, 0.0, 0.1};
        const double sched[] = {1e-3, 3e-4, 1e-4, 3e-5};
        const auto table =
            bias_decay_diagnostic(model, t, set.functions[1], sched, 1'000'000, 19ull);
        CHECK(std::isfinite(table.bound_slope));
        CHECK(table.bound_slope > 0.0);
    }
}

TEST_SUITE_END();
