#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "levybg/charfn.hpp"

namespace levybg {

// Smooth moment function with analytically coded derivatives. eta > 0 means
// f vanishes identically on [-eta, eta]; support_max > 0 means f vanishes for
// |x| >= support_max.
struct MomentFunction {
    std::function<double(double)> eval, d1, d2, d3;
    double eta = 0.0;
    bool symmetric = false;
    bool integrable_d1 = true;
    double support_max = 0.0;
    double sup_norm = 1.0;
    double d4_at_zero = std::numeric_limits<double>::quiet_NaN();
};

struct MomentFunctionSet {
    std::vector<MomentFunction> functions;  // 3M+1 entries, f1 first
    double eta = 0.0;                       // common vanishing radius of functions 2..
};

// The four handcrafted functions of the reference simulation study
// (f1 = 1 - exp(-10 x^2); f2/f3 scaled double-exponential bumps; f4 the
// asymmetric splice f3 on x>=0, f2 on x<0). eta = 1/8.
MomentFunctionSet default_moment_set();

// Identifiability demo set: f2 = g (symmetric bump vanishing on [-1,1]),
// f3 = g(2x), f4 = g(x) on x>0 and g(2x) on x<0.
MomentFunctionSet remark_moment_set();

// f * g with metadata merged; only `eval` (and bounds) are usable downstream.
MomentFunction product_function(const MomentFunction& f, const MomentFunction& g);

void validate_moment_set(const MomentFunctionSet& fset);

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    bool converged = true;
};

// J_alpha^{+-} f(0) = alpha Int (f(z) - f(0) - f'(0) tau(z)) / |z|^{1+alpha} 1_{+-z>0} dz
// with tau(z) = z 1_{|z|<=1}; adaptive quadrature, relative target 1e-9.
QuadResult jump_functional(double alpha, int sign, const MomentFunction& f);

// d/dalpha of the above (the alpha-differentiated integrand, same splitting).
QuadResult jump_functional_dalpha(double alpha, int sign, const MomentFunction& f);

struct MomentVector {
    Eigen::VectorXd values;
    Eigen::VectorXd error_bounds;
    bool converged = true;
    std::size_t n_points = 0;
    double cutoff = 0.0;
};

// E_theta f_j(u Z_h) for all functions of the set: density-grid quadrature
// with analytic heavy-tail / wrap-around corrections, refined by doubling
// n_points until the sup-norm-equilibrated vector moves by < 1e-9 (cap 2^18).
MomentVector expected_moment_vector(const ThetaParams& theta, double h, double u,
                                    const MomentFunctionSet& fset, GridSpec spec = {});

struct MomentValue {
    double value = 0.0;
    double error_bound = 0.0;
};

MomentValue expected_moment(const ThetaParams& theta, double h, double u,
                            const MomentFunction& f, GridSpec spec = {});

enum class JacobianMethod { Analytic, FiniteDifference };

// D_theta E_theta f(u Z_h), (3M+1) x (3M+1); rows follow fset order, columns
// the flattened theta. Analytic path differentiates the symbol inside the
// Fourier inversion; finite differences perturb theta componentwise
// (relative step 1e-4, one-sided at the boundary of Theta).
Eigen::MatrixXd moment_jacobian(const ThetaParams& theta, double h, double u,
                                const MomentFunctionSet& fset, JacobianMethod method,
                                GridSpec spec = {});

enum class SmallTimeCase { JumpLeading, GaussianLeading, QuarticLeading };

// Leading-order prediction of E_theta f(u Z_h) (test oracle):
//   JumpLeading:     h u^a1 [r1+ J+ f(0) + r1- J- f(0)]   (f vanishing near 0)
//   GaussianLeading: h u^2 (sigma^2/2) f''(0)
//   QuarticLeading:  h^2 u^4 (sigma^4/8) f''''(0)
double smalltime_expansion(const ThetaParams& theta, double h, double u,
                           const MomentFunction& f, SmallTimeCase c);

struct BiasDecayRow {
    double h = 0.0, u = 0.0;
    double mc_mean = 0.0, model_mean = 0.0;
    double bias = 0.0, mc_se = 0.0;
    bool censored = false;  // MC noise floor dominates
};

struct BiasDecayTable {
    std::vector<BiasDecayRow> rows;
    double slope = std::numeric_limits<double>::quiet_NaN();        // log-log fit in h
    double bound_slope = std::numeric_limits<double>::quiet_NaN();  // theoretical bound
};

// |MC mean f(u X_h) - E_theta f(u Z_h)| against h; diagnostic only.
BiasDecayTable bias_decay_diagnostic(const SimModelSpec& model, const ThetaParams& theta,
                                     const MomentFunction& f, std::span<const double> h_schedule,
                                     std::size_t n_draws, std::uint64_t seed);

}  // namespace levybg
