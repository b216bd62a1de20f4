#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>

#include "levybg/moments.hpp"

namespace levybg {

enum class UMode { Practical, Theory };

// u = 1 / sqrt(h |log h|).
double practical_u(double h);

struct ScalingResult {
    double u = 0.0;
    bool tau_warning = false;  // tau >= eta / (sigma sqrt 8): theory bound violated
};

// Practical mode maps n to h = 1/n, giving sqrt(n / log n); theory mode is
// tau sqrt(n) / sqrt(log n). The tau bound violation is a warning, not an error.
ScalingResult scaling_factor(std::size_t n, UMode mode, double tau = 0.0,
                             double sigma_upper = 1.0, double eta = 0.125);

Eigen::VectorXd sample_moments(const IncrementBatch& batch, double u,
                               const MomentFunctionSet& fset);

// F_n(theta) = batch_moments - E_theta f(u Z_h).
Eigen::VectorXd estimating_function(const ThetaParams& theta,
                                    const Eigen::VectorXd& batch_moments, double h, double u,
                                    const MomentFunctionSet& fset, GridSpec spec = {});

struct ThetaBox {
    double sigma_sq_min = 1e-10, sigma_sq_max = 1e4;
    double alpha_min = 0.05, alpha_max = 1.95;
    double r_min = 0.0, r_max = 1e4;
};

struct GmmOptions {
    int max_iterations = 60;
    double tolerance = 1e-6;  // max-norm of the sample-moment-equilibrated residual
    int max_halvings = 20;
    double interior_margin = 1e-6;
    ThetaBox box;
    int restarts = 1;
    std::uint64_t restart_seed = 0x5eedULL;
    JacobianMethod jacobian = JacobianMethod::FiniteDifference;
    GridSpec grid;
    std::optional<ThetaParams> init;  // overrides the built-in initialization
};

struct SolveDiagnostics {
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    double jacobian_condition = 0.0;  // of the equilibrated Jacobian
    bool converged = false;
    bool boundary_flag = false;  // r pinned at the box margin for 3 iterations
    bool singular_flag = false;  // equilibrated condition above 1e12
    double multistart_spread = 0.0;
};

struct EstimationResult {
    ThetaParams theta_hat;
    SolveDiagnostics diag;
    Eigen::MatrixXd asym_cov;           // empty when the covariance is unavailable
    Eigen::VectorXd ci_lo, ci_hi;       // 95% per-coordinate intervals
    double u_used = 0.0;
    std::size_t n = 0;
    double h = 0.0;
};

// Damped Newton on F_n with box projection; residuals and the reported
// condition number are equilibrated by the sample-moment scales (the raw
// moment components differ by ~50 orders of magnitude for the default set).
EstimationResult solve_gmm(const IncrementBatch& batch, const MomentFunctionSet& fset,
                           double u, const GmmOptions& opts = {});

// Same solver on externally supplied sample moments (tests, fixed points).
EstimationResult solve_gmm_from_moments(const Eigen::VectorXd& batch_moments, std::size_t n,
                                        double h, const MomentFunctionSet& fset, double u,
                                        const GmmOptions& opts = {});

struct RateMatrices {
    Eigen::MatrixXd gamma_n, lambda_n, lambda_tilde_n, lambda_bar_n;
};

// Gamma_n, Lambda_n = diag(h u^2, h u^{a_m} x3), Lambda~_n = diag(h u^2,
// sqrt(h u^{a_1}) x3M), and Lambda-bar_n = Lambda~_n^{-1} Lambda_n, at h = 1/n.
RateMatrices rate_matrices(const ThetaParams& theta, std::size_t n, double u);

// A(theta): (1,1) = f1''(0)/2; jump rows from J and d/dalpha J functionals.
Eigen::MatrixXd a_matrix(const ThetaParams& theta, const MomentFunctionSet& fset);

// Sigma(theta): (1,1) = sigma^4 f1''(0)^2 / 2; jump block
// (r1+ J+ + r1- J-)(f_j f_k)(0).
Eigen::MatrixXd sigma_matrix(const ThetaParams& theta, const MomentFunctionSet& fset);

// (1/n) Gamma Lbar^{-1} A^{-1} Sigma A^{-T} Lbar^{-1} Gamma^T. Throws when the
// equilibrated A has condition number above 1e12 (identifiability failure).
Eigen::MatrixXd asymptotic_covariance(const ThetaParams& theta, const MomentFunctionSet& fset,
                                      std::size_t n, double u);

enum class SingleTarget { Alpha, RPlus, RMinus };

struct SingleParamResult {
    double estimate = 0.0;
    double asym_variance = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    int iterations = 0;
};

// Scalar estimating equation for one coordinate of component m, all other
// parameters known. f must be nonnegative and vanish near zero.
SingleParamResult single_param_estimator(const IncrementBatch& batch, const MomentFunction& f,
                                         double u, const ThetaParams& theta_known,
                                         SingleTarget target, std::size_t component = 0);

// Truncated-RV volatility, threshold-count activity index, leading-order
// linear solve for r+/r-.
ThetaParams initial_theta(const IncrementBatch& batch, double u, const MomentFunctionSet& fset,
                          const GmmOptions& opts = {});

}  // namespace levybg
