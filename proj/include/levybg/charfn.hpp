#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "levybg/stable.hpp"

namespace levybg {

struct JumpComponent {
    double alpha = 1.5;
    double r_plus = 0.0;
    double r_minus = 0.0;
};

// theta = (sigma^2, alpha_1, r_1^+, r_1^-, ..., alpha_M, r_M^+, r_M^-).
struct ThetaParams {
    double sigma_sq = 1.0;
    std::vector<JumpComponent> components;

    std::size_t dim() const { return 1 + 3 * components.size(); }
    void validate() const;  // throws std::invalid_argument

    std::vector<double> flatten() const;
    static ThetaParams unflatten(std::span<const double> v);
};

// Parameters of the approximating process implied by the modeled part of a
// simulation model: r^+ + r^- = scale^alpha / (Gamma(1-alpha) cos(pi alpha/2)),
// (r^+ - r^-)/(r^+ + r^-) = beta.
ThetaParams theta_from_model(const SimModelSpec& model);

// Levy symbol psi(l) of the triplet-(0, sigma, nu~) process under the
// truncation z 1_{|z|<=1}:  E exp(i l Z_t) = exp(-t psi(l)). Closed form:
// Gaussian part + per-component stable exponent + compensation drift.
std::complex<double> levy_symbol(const ThetaParams& theta, double lambda);

// d psi / d theta_k at fixed lambda, k indexing the flattened theta.
std::complex<double> levy_symbol_dtheta(const ThetaParams& theta, double lambda,
                                        std::size_t coord);

// Characteristic function of u Z_h: exp(-h psi(u lambda)).
std::complex<double> char_fn(const ThetaParams& theta, double h, double u, double lambda);

struct GridSpec {
    std::size_t n_points = std::size_t{1} << 14;  // power of two, >= 256
    double cutoff = 0.0;                          // frequency bound; 0 = automatic
};

// Density of u Z_h on an equispaced grid by inverse FFT of char_fn.
// values are clipped at 0; ringing below -1e-8 is an error.
struct DensityGrid {
    double x0 = 0.0;
    double dx = 0.0;
    std::vector<double> values;
    double cutoff = 0.0;
    double max_neg_ringing = 0.0;  // most negative raw value before clipping

    std::size_t size() const { return values.size(); }
    double x(std::size_t j) const { return x0 + dx * static_cast<double>(j); }
    double mass() const;
};

// Smallest power-of-two frequency bound with |char_fn| < 1e-12, found by
// doubling. Throws if not found below 2^30 (possible only when sigma^2 = 0).
double inversion_cutoff(const ThetaParams& theta, double h, double u);

DensityGrid density_grid(const ThetaParams& theta, double h, double u,
                         const GridSpec& spec = {});

// Density of S_1^{alpha,beta} (unit-scale standardization) at the given
// points, by direct Fourier inversion quadrature. alpha in (0,2)\{1}.
std::vector<double> stable_density(double alpha, double beta, std::span<const double> x_grid);

}  // namespace levybg
