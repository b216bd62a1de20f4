#pragma once

#include <Eigen/Dense>
#include <vector>

namespace levybg {

// Scalars and function grids entering the 2x2 (r, alpha) Fisher block of the
// Gaussian-plus-symmetric-stable model at step h:
//   w_h = (r h)^{1/alpha} / sqrt(sigma^2 h),
//   S_h = density of (G + w_h Y), R_h^0 / R_h^1 the scaled score kernels,
//   J^{lm} = Int R^l R^m / S dx.
struct FisherQuantities {
    double w_h = 0.0, v_h = 0.0, psi_h = 0.0;
    std::vector<double> x_grid, S_h, R0_h, R1_h;
    double J00 = 0.0, J10 = 0.0, J11 = 0.0;
    double s_mass = 0.0;       // integral of S_h (should be 1)
    double tail_share = 0.0;   // |closed-form tail completion| / |J| (largest)
    double refine_delta = 0.0; // max relative J change under quadrature refinement
};

struct FisherGridSpec {
    double x_core = 16.0;     // fine panels cover [0, x_core]
    double x_switch = 150.0;  // numeric quadrature out to here, analytic tail beyond
    double lambda_max = 12.0;
    int export_points = 321;  // symmetric export grid resolution
    int refine_level = 0;     // halves panel widths per level
};

FisherQuantities fisher_quantities(double sigma_sq, double r, double alpha, double h,
                                   const FisherGridSpec& spec = {});

// (h log(1/h))^{alpha/2} / h * diag(1, 1/log(1/h)) I_h diag(1, 1/log(1/h)).
Eigen::Matrix2d rescaled_fisher_block(double sigma_sq, double r, double alpha, double h,
                                      const FisherGridSpec& spec = {});

// Its h->0 limit: (2r / (sigma^alpha (2-alpha)^{alpha/2})) [[1/r^2, 1/(2r)], [1/(2r), 1/4]].
Eigen::Matrix2d fisher_limit_block(double sigma_sq, double r, double alpha);

}  // namespace levybg
