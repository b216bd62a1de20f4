#include "levybg/gmm.hpp"

#include <cmath>
#include <stdexcept>

#include "levybg/baselines.hpp"
#include "levybg/rng.hpp"

namespace levybg {

double practical_u(double h) {
    if (!(h > 0.0) || h >= 1.0)
        throw std::invalid_argument("practical_u: h must lie in (0,1)");
    return 1.0 / std::sqrt(h * std::abs(std::log(h)));
}

ScalingResult scaling_factor(std::size_t n, UMode mode, double tau, double sigma_upper,
                             double eta) {
    if (n < 2) throw std::invalid_argument("scaling_factor: n must be >= 2");
    const double nd = static_cast<double>(n);
    if (mode == UMode::Practical) return {std::sqrt(nd / std::log(nd)), false};
    if (!(tau > 0.0)) throw std::invalid_argument("scaling_factor: theory mode needs tau > 0");
    ScalingResult res;
    res.u = tau * std::sqrt(nd) / std::sqrt(std::log(nd));
    res.tau_warning = sigma_upper > 0.0 && tau >= eta / (sigma_upper * std::sqrt(8.0));
    return res;
}

Eigen::VectorXd sample_moments(const IncrementBatch& batch, double u,
                               const MomentFunctionSet& fset) {
    if (batch.n() == 0) throw std::invalid_argument("sample_moments: empty batch");
    const auto nf = static_cast<Eigen::Index>(fset.functions.size());
    Eigen::VectorXd m = Eigen::VectorXd::Zero(nf);
    for (double x : batch.values) {
        const double ux = u * x;
        for (Eigen::Index j = 0; j < nf; ++j)
            m[j] += fset.functions[static_cast<std::size_t>(j)].eval(ux);
    }
    return m / static_cast<double>(batch.n());
}

Eigen::VectorXd estimating_function(const ThetaParams& theta,
                                    const Eigen::VectorXd& batch_moments, double h, double u,
                                    const MomentFunctionSet& fset, GridSpec spec) {
    return batch_moments - expected_moment_vector(theta, h, u, fset, spec).values;
}

// ---------------------------------------------------------------------------
// rate and asymptotic matrices
// ---------------------------------------------------------------------------

RateMatrices rate_matrices(const ThetaParams& theta, std::size_t n, double u) {
    theta.validate();
    if (!(u > 1.0)) throw std::invalid_argument("rate_matrices: u must be > 1");
    const double h = 1.0 / static_cast<double>(n);
    const auto dim = static_cast<Eigen::Index>(theta.dim());
    const double lu = std::log(u);

    RateMatrices rm;
    rm.gamma_n = Eigen::MatrixXd::Identity(dim, dim);
    rm.lambda_n = Eigen::MatrixXd::Zero(dim, dim);
    rm.lambda_tilde_n = Eigen::MatrixXd::Zero(dim, dim);

    rm.lambda_n(0, 0) = h * u * u;
    rm.lambda_tilde_n(0, 0) = h * u * u;
    const double alpha1 = theta.components.empty() ? 0.0 : theta.components.front().alpha;
    const double jump_sd = std::sqrt(h * std::pow(u, alpha1));
    for (std::size_t m = 0; m < theta.components.size(); ++m) {
        const auto& c = theta.components[m];
        const auto base = static_cast<Eigen::Index>(1 + 3 * m);
        rm.gamma_n(base + 1, base) = -c.r_plus * lu;
        rm.gamma_n(base + 2, base) = -c.r_minus * lu;
        const double lam = h * std::pow(u, c.alpha);
        for (Eigen::Index k = 0; k < 3; ++k) {
            rm.lambda_n(base + k, base + k) = lam;
            rm.lambda_tilde_n(base + k, base + k) = jump_sd;
        }
    }
    rm.lambda_bar_n = rm.lambda_tilde_n.inverse() * rm.lambda_n;
    return rm;
}

Eigen::MatrixXd a_matrix(const ThetaParams& theta, const MomentFunctionSet& fset) {
    theta.validate();
    const auto dim = static_cast<Eigen::Index>(theta.dim());
    if (static_cast<Eigen::Index>(fset.functions.size()) != dim)
        throw std::invalid_argument("a_matrix: set size must equal dim(theta)");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    a(0, 0) = 0.5 * fset.functions[0].d2(0.0);
    for (Eigen::Index j = 1; j < dim; ++j) {
        const auto& f = fset.functions[static_cast<std::size_t>(j)];
        for (std::size_t m = 0; m < theta.components.size(); ++m) {
            const auto& c = theta.components[m];
            const auto base = static_cast<Eigen::Index>(1 + 3 * m);
            const double jp = jump_functional(c.alpha, +1, f).value;
            const double jm = jump_functional(c.alpha, -1, f).value;
            const double djp = jump_functional_dalpha(c.alpha, +1, f).value;
            const double djm = jump_functional_dalpha(c.alpha, -1, f).value;
            a(j, base) = c.r_plus * djp + c.r_minus * djm;
            a(j, base + 1) = jp;
            a(j, base + 2) = jm;
        }
    }
    return a;
}

Eigen::MatrixXd sigma_matrix(const ThetaParams& theta, const MomentFunctionSet& fset) {
    theta.validate();
    const auto dim = static_cast<Eigen::Index>(theta.dim());
    if (static_cast<Eigen::Index>(fset.functions.size()) != dim)
        throw std::invalid_argument("sigma_matrix: set size must equal dim(theta)");
    if (theta.components.empty())
        throw std::invalid_argument("sigma_matrix: at least one jump component required");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
    const double f1pp = fset.functions[0].d2(0.0);
    s(0, 0) = 0.5 * theta.sigma_sq * theta.sigma_sq * f1pp * f1pp;
    const auto& c1 = theta.components.front();
    for (Eigen::Index j = 1; j < dim; ++j) {
        for (Eigen::Index k = j; k < dim; ++k) {
            const auto prod = product_function(fset.functions[static_cast<std::size_t>(j)],
                                               fset.functions[static_cast<std::size_t>(k)]);
            const double jp = jump_functional(c1.alpha, +1, prod).value;
            const double jm = jump_functional(c1.alpha, -1, prod).value;
            s(j, k) = s(k, j) = c1.r_plus * jp + c1.r_minus * jm;
        }
    }
    return s;
}

namespace {

Eigen::VectorXd set_norms(const MomentFunctionSet& fset) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(fset.functions.size()));
    for (Eigen::Index j = 0; j < d.size(); ++j)
        d[j] = fset.functions[static_cast<std::size_t>(j)].sup_norm;
    return d;
}

double equilibrated_condition(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double lo = sv[sv.size() - 1];
    return lo > 0.0 ? sv[0] / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

Eigen::MatrixXd asymptotic_covariance(const ThetaParams& theta, const MomentFunctionSet& fset,
                                      std::size_t n, double u) {
    const Eigen::MatrixXd a = a_matrix(theta, fset);
    const Eigen::MatrixXd sig = sigma_matrix(theta, fset);
    const Eigen::VectorXd norms = set_norms(fset);
    const Eigen::VectorXd dinv = norms.cwiseInverse();

    const Eigen::MatrixXd a_eq = dinv.asDiagonal() * a;
    const Eigen::MatrixXd sig_eq = dinv.asDiagonal() * sig * dinv.asDiagonal();
    const double cond = equilibrated_condition(a_eq);
    if (!(cond < 1e12))
        throw std::runtime_error(
            "asymptotic_covariance: A(theta) is numerically singular (identifiability "
            "condition violated), equilibrated condition " +
            std::to_string(cond));

    const Eigen::MatrixXd ainv = a_eq.partialPivLu().solve(
        Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    const Eigen::MatrixXd mid = ainv * sig_eq * ainv.transpose();

    const RateMatrices rm = rate_matrices(theta, n, u);
    const Eigen::VectorXd lbar_inv = rm.lambda_bar_n.diagonal().cwiseInverse();
    const Eigen::MatrixXd cov = rm.gamma_n * lbar_inv.asDiagonal() * mid *
                                lbar_inv.asDiagonal() * rm.gamma_n.transpose() /
                                static_cast<double>(n);
    return 0.5 * (cov + cov.transpose());
}

// ---------------------------------------------------------------------------
// solver
// ---------------------------------------------------------------------------

namespace {

std::vector<double> project_box(std::vector<double> v, const ThetaBox& box, double margin) {
    const auto clamp = [](double x, double lo, double hi) {
        return std::min(std::max(x, lo), hi);
    };
    v[0] = clamp(v[0], box.sigma_sq_min + margin * box.sigma_sq_min, box.sigma_sq_max);
    const std::size_t mcount = (v.size() - 1) / 3;
    for (std::size_t m = 0; m < mcount; ++m) {
        double& alpha = v[1 + 3 * m];
        alpha = clamp(alpha, box.alpha_min, box.alpha_max);
        if (std::abs(alpha - 1.0) < 1e-3) alpha = alpha < 1.0 ? 1.0 - 1e-3 : 1.0 + 1e-3;
        if (m > 0) {
            // keep the declared ordering a_1 > ... > a_M > a_1/2
            alpha = std::min(alpha, v[1 + 3 * (m - 1)] - 1e-4);
            alpha = std::max(alpha, 0.5 * v[1] + 1e-6);
        }
        v[2 + 3 * m] = clamp(v[2 + 3 * m], box.r_min + margin, box.r_max);
        v[3 + 3 * m] = clamp(v[3 + 3 * m], box.r_min + margin, box.r_max);
    }
    return v;
}

struct Objective {
    const Eigen::VectorXd& batch_moments;
    const MomentFunctionSet& fset;
    double h, u;
    GridSpec grid;
    Eigen::VectorXd scales;  // equilibration of the residual components

    Eigen::VectorXd residual(const ThetaParams& theta) const {
        return batch_moments - expected_moment_vector(theta, h, u, fset, grid).values;
    }
    double norm(const Eigen::VectorXd& f) const {
        return (f.cwiseQuotient(scales)).cwiseAbs().maxCoeff();
    }
};

EstimationResult newton_solve(const ThetaParams& theta0, const Objective& obj,
                              const GmmOptions& opts, std::size_t n) {
    EstimationResult res;
    res.n = n;
    res.h = obj.h;
    res.u_used = obj.u;

    std::vector<double> cur = project_box(theta0.flatten(), opts.box, opts.interior_margin);
    ThetaParams theta = ThetaParams::unflatten(cur);
    Eigen::VectorXd f = obj.residual(theta);
    double fnorm = obj.norm(f);
    res.theta_hat = theta;
    res.diag.residual = fnorm;

    int boundary_run = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        // boundary monitoring on the r coordinates
        bool pinned = false;
        for (std::size_t m = 0; m < theta.components.size(); ++m) {
            if (cur[2 + 3 * m] <= opts.box.r_min + 2.0 * opts.interior_margin ||
                cur[3 + 3 * m] <= opts.box.r_min + 2.0 * opts.interior_margin)
                pinned = true;
        }
        boundary_run = pinned ? boundary_run + 1 : 0;
        if (boundary_run >= 3) res.diag.boundary_flag = true;

        if (fnorm < opts.tolerance) {
            res.diag.converged = true;
            break;
        }
        res.diag.iterations = it + 1;

        const Eigen::MatrixXd jac =
            moment_jacobian(theta, obj.h, obj.u, obj.fset, opts.jacobian, obj.grid);
        const Eigen::MatrixXd jac_eq = obj.scales.cwiseInverse().asDiagonal() * jac;
        res.diag.jacobian_condition = equilibrated_condition(jac_eq);
        if (!(res.diag.jacobian_condition < 1e12)) {
            res.diag.singular_flag = true;
            break;
        }
        const Eigen::VectorXd f_eq = f.cwiseQuotient(obj.scales);
        const Eigen::VectorXd step = jac_eq.partialPivLu().solve(f_eq);

        double lam = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= opts.max_halvings; ++halving) {
            std::vector<double> trial = cur;
            for (std::size_t k = 0; k < trial.size(); ++k)
                trial[k] += lam * step[static_cast<Eigen::Index>(k)];
            trial = project_box(std::move(trial), opts.box, opts.interior_margin);
            ThetaParams theta_try = ThetaParams::unflatten(trial);
            try {
                theta_try.validate();
            } catch (const std::invalid_argument&) {
                lam *= 0.5;
                continue;
            }
            const Eigen::VectorXd f_try = obj.residual(theta_try);
            const double norm_try = obj.norm(f_try);
            if (norm_try < fnorm) {
                cur = std::move(trial);
                theta = std::move(theta_try);
                f = f_try;
                fnorm = norm_try;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        res.theta_hat = theta;
        res.diag.residual = fnorm;
        if (!accepted) break;  // stalled; keep the best iterate
        if (fnorm < opts.tolerance) {
            res.diag.converged = true;
            break;
        }
    }
    res.theta_hat = theta;
    res.diag.residual = fnorm;
    return res;
}

void attach_covariance(EstimationResult& res, const MomentFunctionSet& fset) {
    try {
        res.asym_cov = asymptotic_covariance(res.theta_hat, fset, res.n, res.u_used);
        const auto dim = res.asym_cov.rows();
        res.ci_lo.resize(dim);
        res.ci_hi.resize(dim);
        const std::vector<double> flat = res.theta_hat.flatten();
        constexpr double z95 = 1.959963984540054;
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double sd = std::sqrt(std::max(res.asym_cov(k, k), 0.0));
            res.ci_lo[k] = flat[static_cast<std::size_t>(k)] - z95 * sd;
            res.ci_hi[k] = flat[static_cast<std::size_t>(k)] + z95 * sd;
        }
    } catch (const std::exception&) {
        res.diag.singular_flag = true;
        res.asym_cov.resize(0, 0);
        res.ci_lo.resize(0);
        res.ci_hi.resize(0);
    }
}

}  // namespace

ThetaParams initial_theta(const IncrementBatch& batch, double u, const MomentFunctionSet& fset,
                          const GmmOptions& opts) {
    const double t_total = batch.horizon();
    double rv = 0.0;
    for (double x : batch.values) rv += x * x;
    rv /= t_total;
    const double sigma_prelim = std::sqrt(std::max(rv, 1e-12));

    ThresholdSpec trunc{3.0 * sigma_prelim, 0.49};
    double sigma_sq0 = truncated_rv(batch, trunc);
    sigma_sq0 = std::min(std::max(sigma_sq0, opts.box.sigma_sq_min * 10.0), opts.box.sigma_sq_max);
    const double sigma_trunc = std::sqrt(sigma_sq0);

    double alpha0 = 1.2;
    try {
        alpha0 = aj_alpha(batch, ThresholdSpec{4.0 * sigma_trunc, 0.49},
                          ThresholdSpec{8.0 * sigma_trunc, 0.49});
    } catch (const std::exception&) {
        // keep the fallback; counts too small to invert the scaling relation
    }
    alpha0 = std::min(std::max(alpha0, 0.3), 1.9);
    if (std::abs(alpha0 - 1.0) < 0.02) alpha0 = alpha0 < 1.0 ? 0.98 : 1.02;

    const std::size_t mcount = (fset.functions.size() - 1) / 3;
    if (mcount != 1)
        throw std::invalid_argument(
            "initial_theta: built-in initialization supports M = 1; supply GmmOptions.init");

    // leading-order moment match: m_j ~ h u^a [J+ f_j r+ + J- f_j r-]
    const Eigen::VectorXd m = sample_moments(batch, u, fset);
    const double scale = batch.h * std::pow(u, alpha0);
    const auto& f_sym = fset.functions[1];
    const auto& f_asym = fset.functions[3];
    Eigen::Matrix2d lhs;
    lhs(0, 0) = jump_functional(alpha0, +1, f_sym).value;
    lhs(0, 1) = jump_functional(alpha0, -1, f_sym).value;
    lhs(1, 0) = jump_functional(alpha0, +1, f_asym).value;
    lhs(1, 1) = jump_functional(alpha0, -1, f_asym).value;
    Eigen::Vector2d rhs(m[1] / scale, m[3] / scale);
    Eigen::Vector2d r = lhs.fullPivLu().solve(rhs);

    const double r_floor = 1e-4;
    ThetaParams theta;
    theta.sigma_sq = sigma_sq0;
    theta.components.push_back({alpha0,
                                std::min(std::max(r[0], r_floor), opts.box.r_max),
                                std::min(std::max(r[1], r_floor), opts.box.r_max)});
    return theta;
}

EstimationResult solve_gmm_from_moments(const Eigen::VectorXd& batch_moments, std::size_t n,
                                        double h, const MomentFunctionSet& fset, double u,
                                        const GmmOptions& opts) {
    validate_moment_set(fset);
    if (!opts.init) throw std::invalid_argument("solve_gmm_from_moments: init required");

    Objective obj{batch_moments, fset, h, u, opts.grid, Eigen::VectorXd()};
    // settle the inversion grid once at the initial point
    const auto settled = expected_moment_vector(*opts.init, h, u, fset, opts.grid);
    obj.grid = GridSpec{settled.n_points, settled.cutoff};
    obj.scales.resize(batch_moments.size());
    for (Eigen::Index j = 0; j < batch_moments.size(); ++j)
        obj.scales[j] = std::max(std::abs(batch_moments[j]),
                                 1e-12 * fset.functions[static_cast<std::size_t>(j)].sup_norm) +
                        1e-300;

    EstimationResult res = newton_solve(*opts.init, obj, opts, n);
    attach_covariance(res, fset);
    return res;
}

EstimationResult solve_gmm(const IncrementBatch& batch, const MomentFunctionSet& fset,
                           double u, const GmmOptions& opts) {
    validate_moment_set(fset);
    const Eigen::VectorXd m = sample_moments(batch, u, fset);
    GmmOptions local = opts;
    if (!local.init) local.init = initial_theta(batch, u, fset, opts);

    EstimationResult best = solve_gmm_from_moments(m, batch.n(), batch.h, fset, u, local);
    if (opts.restarts > 1) {
        Rng rng(opts.restart_seed);
        double spread = 0.0;
        for (int k = 1; k < opts.restarts; ++k) {
            GmmOptions pert = local;
            ThetaParams init = *local.init;
            init.sigma_sq *= std::exp(0.1 * rng.normal());
            for (auto& c : init.components) {
                c.alpha = std::min(std::max(c.alpha + 0.05 * rng.normal(), 0.2), 1.9);
                c.r_plus *= std::exp(0.1 * rng.normal());
                c.r_minus *= std::exp(0.1 * rng.normal());
            }
            pert.init = init;
            EstimationResult alt = solve_gmm_from_moments(m, batch.n(), batch.h, fset, u, pert);
            const auto a = best.theta_hat.flatten();
            const auto b = alt.theta_hat.flatten();
            for (std::size_t i = 0; i < a.size(); ++i)
                spread = std::max(spread,
                                  std::abs(a[i] - b[i]) / std::max(1e-8, std::abs(a[i])));
            if (alt.diag.converged && alt.diag.residual < best.diag.residual) {
                const double keep = std::max(spread, best.diag.multistart_spread);
                best = alt;
                best.diag.multistart_spread = keep;
            }
        }
        best.diag.multistart_spread = std::max(best.diag.multistart_spread, spread);
    }
    return best;
}

// ---------------------------------------------------------------------------
// single-parameter estimating equation
// ---------------------------------------------------------------------------

SingleParamResult single_param_estimator(const IncrementBatch& batch, const MomentFunction& f,
                                         double u, const ThetaParams& theta_known,
                                         SingleTarget target, std::size_t component) {
    theta_known.validate();
    if (component >= theta_known.components.size())
        throw std::invalid_argument("single_param_estimator: bad component index");
    if (!(f.eta > 0.0))
        throw std::invalid_argument("single_param_estimator: f must vanish near zero");
    for (double x = -10.0; x <= 10.0; x += 0.05)
        if (f.eval(x) < -1e-15)
            throw std::invalid_argument("single_param_estimator: f must be nonnegative");

    const double alpha_m = theta_known.components[component].alpha;
    if (target == SingleTarget::RPlus && !(jump_functional(alpha_m, +1, f).value > 0.0))
        throw std::runtime_error("single_param_estimator: target not identified (J+ f = 0)");
    if (target == SingleTarget::RMinus && !(jump_functional(alpha_m, -1, f).value > 0.0))
        throw std::runtime_error("single_param_estimator: target not identified (J- f = 0)");

    double mhat = 0.0;
    for (double x : batch.values) mhat += f.eval(u * x);
    mhat /= static_cast<double>(batch.n());
    const double h = batch.h;

    const auto with_value = [&](double v) {
        ThetaParams t = theta_known;
        auto& c = t.components[component];
        if (target == SingleTarget::Alpha) c.alpha = v;
        else if (target == SingleTarget::RPlus) c.r_plus = v;
        else c.r_minus = v;
        return t;
    };
    const auto g = [&](double v) {
        return mhat - expected_moment(with_value(v), h, u, f).value;
    };

    // bracket a sign change
    double lo = 0.0, hi = 0.0, glo = 0.0, ghi = 0.0;
    bool found = false;
    int evals = 0;
    if (target == SingleTarget::Alpha) {
        const double grid[] = {0.2, 0.4, 0.6, 0.8, 0.95, 1.05, 1.2, 1.35, 1.5, 1.65, 1.8, 1.92};
        double pv = 0.0, pg = 0.0;
        bool have_prev = false;
        for (double v : grid) {
            const double gv = g(v);
            ++evals;
            if (have_prev && pg * gv <= 0.0 && (pg != 0.0 || gv != 0.0)) {
                lo = pv; hi = v; glo = pg; ghi = gv; found = true;
                break;
            }
            pv = v; pg = gv; have_prev = true;
        }
    } else {
        const double known = target == SingleTarget::RPlus
                                 ? theta_known.components[component].r_plus
                                 : theta_known.components[component].r_minus;
        double a = 1e-6, b = std::max(1.0, 2.0 * known);
        double ga = g(a), gb = g(b);
        evals += 2;
        for (int k = 0; k < 40 && ga * gb > 0.0; ++k) {
            b *= 2.0;
            gb = g(b);
            ++evals;
            if (b > 1e6) break;
        }
        if (ga * gb <= 0.0) {
            lo = a; hi = b; glo = ga; ghi = gb; found = true;
        }
    }
    if (!found)
        throw std::runtime_error(
            "single_param_estimator: target not identified (no sign change of the scalar "
            "estimating function)");

    // bisection with a secant refinement
    for (int it = 0; it < 80 && (hi - lo) > 1e-10 * (1.0 + std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (std::abs(ghi - glo) > 0.0) {
            const double sec = hi - ghi * (hi - lo) / (ghi - glo);
            if (sec > lo + 0.1 * (hi - lo) && sec < hi - 0.1 * (hi - lo)) mid = sec;
        }
        const double gm = g(mid);
        ++evals;
        if (glo * gm <= 0.0) {
            hi = mid; ghi = gm;
        } else {
            lo = mid; glo = gm;
        }
    }
    const double est = 0.5 * (lo + hi);

    // delta-method variance: Var(F) / (dF/dtheta)^2 with the leading-order
    // derivative scale of the scalar equation
    const ThetaParams at = with_value(est);
    const auto& c1 = at.components.front();
    const auto& cm = at.components[component];
    const auto f2 = product_function(f, f);
    const double var_f = h * std::pow(u, c1.alpha) *
                         (c1.r_plus * jump_functional(c1.alpha, +1, f2).value +
                          c1.r_minus * jump_functional(c1.alpha, -1, f2).value) /
                         static_cast<double>(batch.n());
    double deriv = 0.0;
    const double jp = jump_functional(cm.alpha, +1, f).value;
    const double jm = jump_functional(cm.alpha, -1, f).value;
    if (target == SingleTarget::Alpha)
        deriv = h * std::pow(u, cm.alpha) * std::log(u) * (cm.r_plus * jp + cm.r_minus * jm);
    else if (target == SingleTarget::RPlus)
        deriv = h * std::pow(u, cm.alpha) * jp;
    else
        deriv = h * std::pow(u, cm.alpha) * jm;

    SingleParamResult out;
    out.estimate = est;
    out.asym_variance = var_f / (deriv * deriv);
    const double sd = std::sqrt(std::max(out.asym_variance, 0.0));
    constexpr double z95 = 1.959963984540054;
    out.ci_lo = est - z95 * sd;
    out.ci_hi = est + z95 * sd;
    out.iterations = evals;
    return out;
}

}  // namespace levybg
