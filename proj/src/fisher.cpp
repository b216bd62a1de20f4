#include "levybg/fisher.hpp"

#include <cmath>
#include <stdexcept>

#include "levybg/special.hpp"

namespace levybg {

namespace {

constexpr double kGlNode[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                               0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                               0.9445750230732326, 0.9894009349916499};
constexpr double kGlWeight[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                 0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};

struct FisherPoint {
    double S = 0.0, R0 = 0.0, R1 = 0.0;
};

// Cosine-transform evaluator for S, R0, R1 at fixed (alpha, w):
//   S(x)  = (1/pi) Int_0^inf   e^{-l^2/2 - c w^a l^a}              cos(l x) dl
//   R0(x) = (1/pi) Int_0^inf   c a l^a   * (same damping)          cos(l x) dl
//   R1(x) = (1/pi) Int_0^inf   l^a (c - (c' + c ln l)/L) (damping) cos(l x) dl
// with c = 2 Gamma(1-a) cos(pi a/2), L = log(1/w).
class FisherEvaluator {
public:
    FisherEvaluator(double alpha, double w, double lambda_max, int refine_level)
        : alpha_(alpha), w_(w) {
        c_ = 2.0 * gamma_cos_factor(alpha);
        dc_ = 2.0 * gamma_cos_factor_dalpha(alpha);
        ell_ = std::log(1.0 / w);
        const double shrink = std::pow(0.5, refine_level);

        // geometric panels toward 0 (fractional power kink), then uniform
        std::vector<std::pair<double, double>> panels;
        const double delta = 0.5;
        double lo = delta;
        for (int k = 0; k < 46; ++k) {
            panels.emplace_back(lo * 0.5, lo);
            lo *= 0.5;
        }
        const double width = 0.0104 * shrink;
        for (double a = delta; a < lambda_max; a += width)
            panels.emplace_back(a, std::min(a + width, lambda_max));

        for (const auto& [a, b] : panels) {
            const double c0 = 0.5 * (a + b), hw = 0.5 * (b - a);
            for (int i = 0; i < 8; ++i) {
                for (double s : {-1.0, 1.0}) {
                    const double lam = c0 + s * hw * kGlNode[i];
                    const double q = kGlWeight[i] * hw / M_PI;
                    const double la = std::pow(lam, alpha_);
                    const double damp = std::exp(-0.5 * lam * lam - c_ * std::pow(w_, alpha_) * la);
                    nodes_.push_back(lam);
                    qs_.push_back(q * damp);
                    q0_.push_back(q * damp * c_ * alpha_ * la);
                    q1_.push_back(q * damp * la * (c_ - (dc_ + c_ * std::log(lam)) / ell_));
                }
            }
        }
    }

    FisherPoint eval(double x) const {
        FisherPoint p;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const double cx = std::cos(nodes_[i] * x);
            p.S += qs_[i] * cx;
            p.R0 += q0_[i] * cx;
            p.R1 += q1_[i] * cx;
        }
        return p;
    }

    double ell() const { return ell_; }

private:
    double alpha_, w_, c_, dc_, ell_;
    std::vector<double> nodes_, qs_, q0_, q1_;
};

struct JIntegrals {
    double J00 = 0.0, J10 = 0.0, J11 = 0.0, mass = 0.0, tail_share = 0.0;
};

JIntegrals j_integrals(const FisherEvaluator& ev, double alpha, double w,
                       const FisherGridSpec& spec, int refine_level) {
    const double floor_s = 1e-30;
    JIntegrals out;

    // x panels: uniform over the core, geometric out to x_switch
    std::vector<std::pair<double, double>> panels;
    const double cw = 0.5 * std::pow(0.5, refine_level);
    for (double a = 0.0; a < spec.x_core; a += cw)
        panels.emplace_back(a, std::min(a + cw, spec.x_core));
    double a = spec.x_core;
    const double ratio = refine_level > 0 ? 1.075 : 1.15;
    while (a < spec.x_switch) {
        const double b = std::min(a * ratio, spec.x_switch);
        panels.emplace_back(a, b);
        a = b;
    }

    for (const auto& [lo, hi] : panels) {
        const double c0 = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        for (int i = 0; i < 8; ++i) {
            for (double s : {-1.0, 1.0}) {
                const double x = c0 + s * hw * kGlNode[i];
                const double q = kGlWeight[i] * hw;
                const FisherPoint p = ev.eval(x);
                const double sd = std::max(p.S, floor_s);
                out.J00 += q * p.R0 * p.R0 / sd;
                out.J10 += q * p.R1 * p.R0 / sd;
                out.J11 += q * p.R1 * p.R1 / sd;
                out.mass += q * p.S;
            }
        }
    }
    out.J00 *= 2.0;  // even integrands
    out.J10 *= 2.0;
    out.J11 *= 2.0;
    out.mass *= 2.0;

    // closed-form completion from the power-tail asymptotics beyond x_switch:
    // S ~ a w^a x^{-1-a}, R0 ~ -a^2 x^{-1-a}, R1 ~ x^{-1-a}(-a + (1 - a ln x)/L)
    const double X = spec.x_switch;
    const double L = ev.ell();
    const double wa = std::pow(w, alpha);
    const double xa = std::pow(X, -alpha);
    const double lx = std::log(X);
    const double i0 = xa / alpha;
    const double i1 = xa * (lx / alpha + 1.0 / (alpha * alpha));
    const double i2 = xa * (lx * lx / alpha + 2.0 * lx / (alpha * alpha) +
                            2.0 / (alpha * alpha * alpha));
    const double t00 = 2.0 * alpha * alpha * xa / wa;
    const double t10 = (2.0 * alpha / wa) * (alpha * i0 - (i0 - alpha * i1) / L);
    const double t11 = (2.0 / (alpha * wa)) *
                       (alpha * alpha * i0 - (2.0 * alpha / L) * (i0 - alpha * i1) +
                        (i0 - 2.0 * alpha * i1 + alpha * alpha * i2) / (L * L));
    out.J00 += t00;
    out.J10 += t10;
    out.J11 += t11;
    out.mass += 2.0 * wa * xa;  // P(|.| > X) of the stable tail
    out.tail_share = std::max({std::abs(t00) / std::max(std::abs(out.J00), 1e-300),
                               std::abs(t10) / std::max(std::abs(out.J10), 1e-300),
                               std::abs(t11) / std::max(std::abs(out.J11), 1e-300)});
    return out;
}

}  // namespace

FisherQuantities fisher_quantities(double sigma_sq, double r, double alpha, double h,
                                   const FisherGridSpec& spec) {
    if (!(sigma_sq > 0.0) || !(r > 0.0) || !(h > 0.0))
        throw std::invalid_argument("fisher_quantities: sigma^2, r, h must be > 0");
    if (!(alpha > 0.0) || !(alpha < 2.0) || alpha == 1.0)
        throw std::invalid_argument("fisher_quantities: alpha must lie in (0,2) \\ {1}");

    FisherQuantities q;
    q.w_h = std::pow(r * h, 1.0 / alpha) / std::sqrt(sigma_sq * h);
    if (!(q.w_h < 1.0))
        throw std::invalid_argument("fisher_quantities: requires w_h < 1 (h too large)");
    const double ell = std::log(1.0 / q.w_h);
    q.v_h = (2.0 + std::log(r / sigma_sq) / ell) / (alpha * (2.0 - alpha));
    q.psi_h = 2.0 * std::pow(std::sqrt(sigma_sq), alpha) /
              (r * alpha * alpha * std::pow(2.0 - alpha, 0.5 * alpha)) /
              (std::pow(h, 1.0 - 0.5 * alpha) * std::pow(std::log(1.0 / h), 0.5 * alpha));

    const FisherEvaluator ev(alpha, q.w_h, spec.lambda_max, spec.refine_level);
    const JIntegrals base = j_integrals(ev, alpha, q.w_h, spec, spec.refine_level);

    const FisherEvaluator ev_f(alpha, q.w_h, spec.lambda_max, spec.refine_level + 1);
    const JIntegrals fine = j_integrals(ev_f, alpha, q.w_h, spec, spec.refine_level + 1);

    q.J00 = fine.J00;
    q.J10 = fine.J10;
    q.J11 = fine.J11;
    q.s_mass = fine.mass;
    q.tail_share = fine.tail_share;
    q.refine_delta = std::max({std::abs(fine.J00 - base.J00) / std::abs(fine.J00),
                               std::abs(fine.J10 - base.J10) / std::abs(fine.J10),
                               std::abs(fine.J11 - base.J11) / std::abs(fine.J11)});

    const int np = spec.export_points;
    q.x_grid.resize(np);
    q.S_h.resize(np);
    q.R0_h.resize(np);
    q.R1_h.resize(np);
    for (int i = 0; i < np; ++i) {
        const double x = -8.0 + 16.0 * static_cast<double>(i) / (np - 1);
        const FisherPoint p = ev_f.eval(std::abs(x));
        q.x_grid[i] = x;
        q.S_h[i] = p.S;
        q.R0_h[i] = p.R0;
        q.R1_h[i] = p.R1;
    }
    return q;
}

Eigen::Matrix2d rescaled_fisher_block(double sigma_sq, double r, double alpha, double h,
                                      const FisherGridSpec& spec) {
    const FisherQuantities q = fisher_quantities(sigma_sq, r, alpha, h, spec);
    const double ell = std::log(1.0 / q.w_h);
    const double wa = std::pow(q.w_h, alpha);

    const double irr = wa * wa / (r * r * alpha * alpha) * q.J00;
    const double iar = wa * wa * ell / (r * alpha) * (q.v_h * q.J00 - q.J10);
    const double iaa =
        wa * wa * ell * ell * (q.J11 - 2.0 * q.v_h * q.J10 + q.v_h * q.v_h * q.J00);

    const double lh = std::log(1.0 / h);
    const double pre = std::pow(h * lh, 0.5 * alpha) / h;
    Eigen::Matrix2d m;
    m(0, 0) = pre * irr;
    m(0, 1) = m(1, 0) = pre * iar / lh;
    m(1, 1) = pre * iaa / (lh * lh);
    return m;
}

Eigen::Matrix2d fisher_limit_block(double sigma_sq, double r, double alpha) {
    const double fac = 2.0 * r /
                       (std::pow(std::sqrt(sigma_sq), alpha) * std::pow(2.0 - alpha, 0.5 * alpha));
    Eigen::Matrix2d m;
    m(0, 0) = fac / (r * r);
    m(0, 1) = m(1, 0) = fac / (2.0 * r);
    m(1, 1) = fac / 4.0;
    return m;
}

}  // namespace levybg
