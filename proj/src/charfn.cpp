#include "levybg/charfn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "levybg/fft.hpp"
#include "levybg/special.hpp"

namespace levybg {

void ThetaParams::validate() const {
    if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq))
        throw std::invalid_argument("ThetaParams: sigma_sq must be >= 0");
    double prev = 2.0;
    const double alpha1 = components.empty() ? 0.0 : components.front().alpha;
    for (const auto& c : components) {
        if (c.alpha == 1.0)
            throw std::invalid_argument("ThetaParams: alpha = 1 is excluded");
        if (!(c.alpha > 0.0) || !(c.alpha < 2.0))
            throw std::invalid_argument("ThetaParams: alpha must lie in (0,2)");
        if (!(c.alpha < prev))
            throw std::invalid_argument("ThetaParams: alphas must be strictly decreasing");
        if (components.size() > 1 && !(c.alpha > 0.5 * alpha1))
            throw std::invalid_argument("ThetaParams: requires alpha_m > alpha_1 / 2");
        if (!(c.r_plus >= 0.0) || !(c.r_minus >= 0.0))
            throw std::invalid_argument("ThetaParams: r+/- must be >= 0");
        if (!(c.r_plus + c.r_minus > 0.0))
            throw std::invalid_argument("ThetaParams: r+ + r- must be > 0");
        prev = c.alpha;
    }
}

std::vector<double> ThetaParams::flatten() const {
    std::vector<double> v;
    v.reserve(dim());
    v.push_back(sigma_sq);
    for (const auto& c : components) {
        v.push_back(c.alpha);
        v.push_back(c.r_plus);
        v.push_back(c.r_minus);
    }
    return v;
}

ThetaParams ThetaParams::unflatten(std::span<const double> v) {
    if (v.empty() || (v.size() - 1) % 3 != 0)
        throw std::invalid_argument("ThetaParams::unflatten: size must be 3M+1");
    ThetaParams t;
    t.sigma_sq = v[0];
    for (std::size_t m = 0; 1 + 3 * m < v.size(); ++m)
        t.components.push_back({v[1 + 3 * m], v[2 + 3 * m], v[3 + 3 * m]});
    return t;
}

ThetaParams theta_from_model(const SimModelSpec& model) {
    ThetaParams t;
    t.sigma_sq = model.sigma * model.sigma;
    for (const auto& c : model.components) {
        const double rsum = std::pow(c.scale, c.alpha) / gamma_cos_factor(c.alpha);
        t.components.push_back(
            {c.alpha, 0.5 * rsum * (1.0 + c.beta), 0.5 * rsum * (1.0 - c.beta)});
    }
    return t;
}

std::complex<double> levy_symbol(const ThetaParams& theta, double lambda) {
    const double sgn = (lambda > 0.0) - (lambda < 0.0);
    const double al = std::abs(lambda);
    std::complex<double> psi(0.5 * theta.sigma_sq * lambda * lambda, 0.0);
    for (const auto& c : theta.components) {
        const double g = gamma_cos_factor(c.alpha);
        const double pw = std::pow(al, c.alpha);
        const double sum = c.r_plus + c.r_minus;
        const double dif = c.r_plus - c.r_minus;
        psi += std::complex<double>(g * pw * sum, 0.0);
        if (dif != 0.0) {
            const double t = std::tan(0.5 * M_PI * c.alpha);
            // skewness + compensation drift of the z 1_{|z|<=1} truncation
            psi += std::complex<double>(
                0.0, -g * pw * dif * t * sgn - lambda * c.alpha * dif / (c.alpha - 1.0));
        }
    }
    return psi;
}

std::complex<double> levy_symbol_dtheta(const ThetaParams& theta, double lambda,
                                        std::size_t coord) {
    if (coord >= theta.dim()) throw std::invalid_argument("levy_symbol_dtheta: bad coord");
    if (coord == 0) return {0.5 * lambda * lambda, 0.0};
    const std::size_t m = (coord - 1) / 3;
    const std::size_t which = (coord - 1) % 3;  // 0: alpha, 1: r+, 2: r-
    const auto& c = theta.components[m];
    const double sgn = (lambda > 0.0) - (lambda < 0.0);
    const double al = std::abs(lambda);
    const double g = gamma_cos_factor(c.alpha);
    const double pw = std::pow(al, c.alpha);
    const double t = std::tan(0.5 * M_PI * c.alpha);
    const double drift = c.alpha / (c.alpha - 1.0);

    if (which == 1)  // r+
        return {g * pw, -g * pw * t * sgn - lambda * drift};
    if (which == 2)  // r-
        return {g * pw, +g * pw * t * sgn + lambda * drift};

    // alpha_m
    const double sum = c.r_plus + c.r_minus;
    const double dif = c.r_plus - c.r_minus;
    const double dg = gamma_cos_factor_dalpha(c.alpha);
    const double lg = (al > 0.0) ? std::log(al) : 0.0;
    const double dpw = (al > 0.0) ? pw * lg : 0.0;  // d|l|^a/da = |l|^a log|l|
    const double re = (dg * pw + g * dpw) * sum;
    double im = 0.0;
    if (dif != 0.0) {
        const double sec2 = 1.0 + t * t;
        im -= (dg * pw * t + g * dpw * t + g * pw * 0.5 * M_PI * sec2) * dif * sgn;
        im += lambda * dif / ((c.alpha - 1.0) * (c.alpha - 1.0));
    }
    return {re, im};
}

std::complex<double> char_fn(const ThetaParams& theta, double h, double u, double lambda) {
    if (!(h > 0.0) || !(u > 0.0))
        throw std::invalid_argument("char_fn: h and u must be > 0");
    return std::exp(-h * levy_symbol(theta, u * lambda));
}

double inversion_cutoff(const ThetaParams& theta, double h, double u) {
    theta.validate();
    double cut = 1.0;
    while (std::abs(char_fn(theta, h, u, cut)) >= 1e-12) {
        cut *= 2.0;
        if (cut > static_cast<double>(std::size_t{1} << 30))
            throw std::runtime_error(
                "inversion cutoff not found: characteristic function does not decay below "
                "1e-12 within the 2^30 frequency range (sigma^2 = 0 with too-light jump "
                "activity)");
    }
    return cut;
}

double DensityGrid::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * dx;
}

DensityGrid density_grid(const ThetaParams& theta, double h, double u, const GridSpec& spec) {
    theta.validate();
    const std::size_t n = spec.n_points;
    if (n < 256 || (n & (n - 1)) != 0)
        throw std::invalid_argument("GridSpec: n_points must be a power of two >= 256");
    const double cut = spec.cutoff > 0.0 ? spec.cutoff : inversion_cutoff(theta, h, u);

    const double dl = 2.0 * cut / static_cast<double>(n);
    std::vector<std::complex<double>> buf(n);
    // lambda_k = -cut + k dl; Hermitian fill from the lambda >= 0 half
    for (std::size_t k = n / 2; k < n; ++k) {
        const double lam = -cut + dl * static_cast<double>(k);
        const std::complex<double> v = char_fn(theta, h, u, lam);
        buf[k] = v;
        if (k > n / 2) buf[n - k] = std::conj(v);
    }
    buf[0] = char_fn(theta, h, u, -cut);
    for (std::size_t k = 1; k < n; k += 2) buf[k] = -buf[k];

    fft(buf);

    DensityGrid grid;
    grid.cutoff = cut;
    grid.dx = M_PI / cut;
    grid.x0 = -0.5 * static_cast<double>(n) * grid.dx;
    grid.values.resize(n);
    const double scale = dl / (2.0 * M_PI);
    double peak = 0.0, worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double v = scale * buf[j].real();
        if (j & 1) v = -v;
        peak = std::max(peak, v);
        worst = std::min(worst, v);
        grid.values[j] = v;
    }
    grid.max_neg_ringing = worst;
    if (worst < -1e-8 * std::max(1.0, peak))
        throw std::runtime_error("density_grid: negative ringing exceeds 1e-8; grid settings "
                                 "insufficient (cutoff " +
                                 std::to_string(cut) + ", n " + std::to_string(n) + ")");
    for (auto& v : grid.values)
        if (v < 0.0) v = 0.0;
    return grid;
}

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1,1].
constexpr double kGlNode[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                               0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                               0.9445750230732326, 0.9894009349916499};
constexpr double kGlWeight[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                 0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};

template <class F>
double gl16(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double d = hw * kGlNode[i];
        s += kGlWeight[i] * (f(c - d) + f(c + d));
    }
    return s * hw;
}

}  // namespace

std::vector<double> stable_density(double alpha, double beta, std::span<const double> x_grid) {
    StableSpec{alpha, beta, 1.0}.validate();
    const double t = std::tan(0.5 * M_PI * alpha);
    const double lam_max = std::pow(40.0, 1.0 / alpha);

    std::vector<double> out(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid[i];
        const auto integrand = [&](double lam) {
            return std::exp(-std::pow(lam, alpha)) *
                   std::cos(lam * x - beta * t * std::pow(lam, alpha));
        };
        double s = 0.0;
        // geometric panels toward 0 where |lambda|^alpha loses smoothness
        const double delta = std::min(0.5, lam_max);
        double lo = delta;
        for (int k = 0; k < 60 && lo > 1e-14; ++k) {
            s += gl16(integrand, lo * 0.5, lo);
            lo *= 0.5;
        }
        // oscillation-resolving panels up to the decay horizon
        const double width = std::min(0.5, M_PI / (2.0 * (std::abs(x) + 1.0)));
        for (double a = delta; a < lam_max; a += width)
            s += gl16(integrand, a, std::min(a + width, lam_max));
        out[i] = s / M_PI;
    }
    return out;
}

}  // namespace levybg
