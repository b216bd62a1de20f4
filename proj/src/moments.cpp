#include "levybg/moments.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

#include "levybg/fft.hpp"
#include "levybg/rng.hpp"
#include "levybg/special.hpp"

namespace levybg {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

// ---------------------------------------------------------------------------
// smooth bump exp(-p/(s-a)) exp(-q/(b-s)) on (a,b)
// ---------------------------------------------------------------------------

struct Bump {
    double a, b, p, q;

    double eval(double s) const {
        if (s <= a || s >= b) return 0.0;
        return std::exp(-p / (s - a) - q / (b - s));
    }
    double l1(double s) const {
        const double da = s - a, db = b - s;
        return p / (da * da) - q / (db * db);
    }
    double l2(double s) const {
        const double da = s - a, db = b - s;
        return -2.0 * p / (da * da * da) - 2.0 * q / (db * db * db);
    }
    double l3(double s) const {
        const double da = s - a, db = b - s;
        return 6.0 * p / (da * da * da * da) - 6.0 * q / (db * db * db * db);
    }
    double d1(double s) const { return eval(s) * l1(s); }
    double d2(double s) const {
        const double e = eval(s);
        if (e == 0.0) return 0.0;
        const double u = l1(s);
        return e * (u * u + l2(s));
    }
    double d3(double s) const {
        const double e = eval(s);
        if (e == 0.0) return 0.0;
        const double u = l1(s), v = l2(s);
        return e * (u * u * u + 3.0 * u * v + l3(s));
    }
    double max_value() const {  // golden-section on (a,b)
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = a + 1e-12 * (b - a), hi = b - 1e-12 * (b - a);
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        for (int it = 0; it < 200; ++it) {
            if (eval(x1) < eval(x2)) lo = x1, x1 = x2, x2 = lo + gr * (hi - lo);
            else hi = x2, x2 = x1, x1 = hi - gr * (hi - lo);
        }
        return eval(0.5 * (lo + hi));
    }
};

// f(x) = B(k |x|), with derivatives in x
MomentFunction bump_function(const Bump& bump, double k, bool symmetric) {
    MomentFunction f;
    f.eval = [bump, k](double x) { return bump.eval(k * std::abs(x)); };
    f.d1 = [bump, k](double x) {
        const double s = (x >= 0.0) ? 1.0 : -1.0;
        return s * k * bump.d1(k * std::abs(x));
    };
    f.d2 = [bump, k](double x) { return k * k * bump.d2(k * std::abs(x)); };
    f.d3 = [bump, k](double x) {
        const double s = (x >= 0.0) ? 1.0 : -1.0;
        return s * k * k * k * bump.d3(k * std::abs(x));
    };
    f.eta = bump.a / k;
    f.symmetric = symmetric;
    f.support_max = bump.b / k;
    f.sup_norm = bump.max_value();
    return f;
}

MomentFunction splice_function(const MomentFunction& pos, const MomentFunction& neg) {
    MomentFunction f;
    f.eval = [pos, neg](double x) { return x >= 0.0 ? pos.eval(x) : neg.eval(x); };
    f.d1 = [pos, neg](double x) { return x >= 0.0 ? pos.d1(x) : neg.d1(x); };
    f.d2 = [pos, neg](double x) { return x >= 0.0 ? pos.d2(x) : neg.d2(x); };
    f.d3 = [pos, neg](double x) { return x >= 0.0 ? pos.d3(x) : neg.d3(x); };
    f.eta = std::min(pos.eta, neg.eta);
    f.symmetric = false;
    f.support_max = std::max(pos.support_max, neg.support_max);
    f.sup_norm = std::max(pos.sup_norm, neg.sup_norm);
    return f;
}

MomentFunction gaussian_well() {  // f1(x) = 1 - exp(-10 x^2)
    MomentFunction f;
    f.eval = [](double x) { return 1.0 - std::exp(-10.0 * x * x); };
    f.d1 = [](double x) { return 20.0 * x * std::exp(-10.0 * x * x); };
    f.d2 = [](double x) { return (20.0 - 400.0 * x * x) * std::exp(-10.0 * x * x); };
    f.d3 = [](double x) {
        return (-1200.0 * x + 8000.0 * x * x * x) * std::exp(-10.0 * x * x);
    };
    f.eta = 0.0;
    f.symmetric = true;
    f.integrable_d1 = true;
    f.support_max = 0.0;
    f.sup_norm = 1.0;
    f.d4_at_zero = -1200.0;
    return f;
}

}  // namespace

MomentFunctionSet default_moment_set() {
    const Bump bump{0.2, 4.0, 300.0, 10.0};
    MomentFunctionSet set;
    set.functions.push_back(gaussian_well());
    auto f2 = bump_function(bump, 0.4, true);
    auto f3 = bump_function(bump, 1.6, true);
    set.functions.push_back(f2);
    set.functions.push_back(f3);
    set.functions.push_back(splice_function(f3, f2));
    set.eta = 0.125;
    return set;
}

MomentFunctionSet remark_moment_set() {
    const Bump bump{1.0, 3.0, 1.0, 1.0};
    MomentFunctionSet set;
    set.functions.push_back(gaussian_well());
    auto g = bump_function(bump, 1.0, true);
    auto g2 = bump_function(bump, 2.0, true);
    set.functions.push_back(g);
    set.functions.push_back(g2);
    set.functions.push_back(splice_function(g, g2));
    set.eta = 0.5;
    return set;
}

MomentFunction product_function(const MomentFunction& f, const MomentFunction& g) {
    MomentFunction p;
    auto fe = f.eval, ge = g.eval;
    p.eval = [fe, ge](double x) { return fe(x) * ge(x); };
    p.d1 = p.d2 = p.d3 = nullptr;
    p.eta = std::max(f.eta, g.eta);
    p.symmetric = f.symmetric && g.symmetric;
    if (f.support_max > 0.0 && g.support_max > 0.0)
        p.support_max = std::min(f.support_max, g.support_max);
    else
        p.support_max = std::max(f.support_max, g.support_max);
    p.sup_norm = f.sup_norm * g.sup_norm;
    return p;
}

void validate_moment_set(const MomentFunctionSet& fset) {
    if (fset.functions.empty() || (fset.functions.size() - 1) % 3 != 0)
        throw std::invalid_argument("moment set must have 3M+1 functions");
    const auto& f1 = fset.functions.front();
    if (std::abs(f1.eval(0.0)) > 1e-12 || std::abs(f1.d1(0.0)) > 1e-12 ||
        std::abs(f1.d2(0.0)) < 1e-12)
        throw std::invalid_argument("f1 must satisfy f(0)=f'(0)=0 != f''(0)");
    for (std::size_t j = 1; j < fset.functions.size(); ++j)
        if (!(fset.functions[j].eta > 0.0))
            throw std::invalid_argument("functions 2.. must vanish near 0");
}

// ---------------------------------------------------------------------------
// jump functionals
// ---------------------------------------------------------------------------

namespace {

// integrand numerator at z > 0 for the given side: f(s z) - f(0) - f'(0) tau(s z)
struct CompensatedF {
    const MomentFunction& f;
    double side;  // +1 / -1
    double f0, df0;

    double operator()(double z) const {
        const double tau = (z <= 1.0) ? side * z : 0.0;
        return f.eval(side * z) - f0 - df0 * tau;
    }
};

// adaptive integral of numerator(z) * z^{-1-alpha} * (plain ? 1 : (1 - alpha ln z))
template <class Num>
QuadResult power_weighted_integral(const Num& num, double alpha, bool dalpha_weight,
                                   double lo, double support_max, double sup_scale) {
    const auto w = [&](double z) {
        double v = num(z) * std::pow(z, -1.0 - alpha);
        if (dalpha_weight) v *= 1.0 - alpha * std::log(z);
        return v;
    };
    QuadResult out;
    double acc = 0.0, err = 0.0;
    if (support_max > 0.0) {
        double e;
        acc = GK::integrate(w, lo, support_max, 12, 1e-12, &e);
        err = e;
    } else {
        // doubling panels with a power-law tail bound
        double a = lo;
        for (int k = 0; k < 64; ++k) {
            const double b = 2.0 * a;
            double e;
            acc += GK::integrate(w, a, b, 12, 1e-12, &e);
            err += e;
            a = b;
            const double tail = 2.0 * sup_scale * std::pow(a, -alpha) / alpha *
                                (dalpha_weight ? (1.0 + alpha * std::abs(std::log(a))) : 1.0);
            if (tail < 1e-13 * std::max(std::abs(acc), sup_scale * 1e-6) + 1e-300) break;
            if (k == 63) err += tail;
        }
    }
    out.value = acc;
    out.abs_error = err;
    return out;
}

QuadResult jump_functional_impl(double alpha, int sign, const MomentFunction& f,
                                bool dalpha_weight) {
    if (!(alpha > 0.0) || !(alpha < 2.0))
        throw std::invalid_argument("jump functional: alpha must lie in (0,2)");
    if (sign != 1 && sign != -1)
        throw std::invalid_argument("jump functional: sign must be +1 or -1");
    const double side = static_cast<double>(sign);

    QuadResult res;
    if (f.eta > 0.0) {
        const auto num = [&](double z) { return f.eval(side * z); };
        res = power_weighted_integral(num, alpha, dalpha_weight, f.eta, f.support_max,
                                      f.sup_norm);
    } else {
        if (!f.d1 || !f.d2 || !f.d3)
            throw std::invalid_argument("jump functional: derivatives required unless f "
                                        "vanishes near 0");
        const CompensatedF num{f, side, f.eval(0.0), f.d1(0.0)};
        const double eps = 1e-3;
        // Taylor head on (0, eps]: numerator ~ f''(0) z^2/2 + side f'''(0) z^3/6
        const double c2 = 0.5 * f.d2(0.0);
        const double c3 = side * f.d3(0.0) / 6.0;
        double head, head_err;
        const double e2 = std::pow(eps, 2.0 - alpha), e3 = std::pow(eps, 3.0 - alpha);
        if (!dalpha_weight) {
            head = c2 * e2 / (2.0 - alpha) + c3 * e3 / (3.0 - alpha);
        } else {
            const double le = std::log(eps);
            head = c2 * (e2 / (2.0 - alpha) -
                         alpha * e2 * (le / (2.0 - alpha) - 1.0 / ((2.0 - alpha) * (2.0 - alpha)))) +
                   c3 * (e3 / (3.0 - alpha) -
                         alpha * e3 * (le / (3.0 - alpha) - 1.0 / ((3.0 - alpha) * (3.0 - alpha))));
        }
        // fourth-order Taylor remainder estimate
        const double f4 = std::abs(f.d3(eps) - f.d3(-eps)) / (2.0 * eps) + 1e-6 * f.sup_norm;
        head_err = f4 / 24.0 * std::pow(eps, 4.0 - alpha) / (4.0 - alpha) *
                   (dalpha_weight ? (1.0 + alpha * std::abs(std::log(eps))) : 1.0);
        res = power_weighted_integral(num, alpha, dalpha_weight, eps, f.support_max,
                                      f.sup_norm + std::abs(num.f0) + std::abs(num.df0));
        res.value += head;
        res.abs_error += head_err;
    }
    if (!dalpha_weight) {
        res.value *= alpha;
        res.abs_error *= alpha;
    }
    res.converged =
        res.abs_error <= 1e-9 * std::max(std::abs(res.value), 1e-3 * f.sup_norm) + 1e-300;
    return res;
}

}  // namespace

QuadResult jump_functional(double alpha, int sign, const MomentFunction& f) {
    return jump_functional_impl(alpha, sign, f, false);
}

QuadResult jump_functional_dalpha(double alpha, int sign, const MomentFunction& f) {
    return jump_functional_impl(alpha, sign, f, true);
}

// ---------------------------------------------------------------------------
// expected moments: FFT density + analytic tail / wrap-around corrections
// ---------------------------------------------------------------------------

namespace {

// one-sided power tail (c + d ln|y|) |y|^{-1-alpha} of a density-like grid
struct TailTerm {
    double alpha;
    double c_plus, c_minus;
    double d_plus = 0.0, d_minus = 0.0;

    double eval(double y) const {
        const double ay = std::abs(y);
        const double c = y > 0.0 ? c_plus : c_minus;
        const double d = y > 0.0 ? d_plus : d_minus;
        if (c == 0.0 && d == 0.0) return 0.0;
        return (c + d * std::log(ay)) * std::pow(ay, -1.0 - alpha);
    }
};

using TailModel = std::vector<TailTerm>;

double tail_eval(const TailModel& tm, double y) {
    double s = 0.0;
    for (const auto& t : tm) s += t.eval(y);
    return s;
}

// tails of the density of u Z_h: h u^a a r^{+-} |y|^{-1-a} per component
TailModel value_tail_model(const ThetaParams& theta, double h, double u) {
    TailModel tm;
    for (const auto& c : theta.components) {
        const double base = h * std::pow(u, c.alpha) * c.alpha;
        tm.push_back({c.alpha, base * c.r_plus, base * c.r_minus});
    }
    return tm;
}

// tails of d/dtheta_k of the density
TailModel coord_tail_model(const ThetaParams& theta, double h, double u, std::size_t coord) {
    TailModel tm;
    if (coord == 0) return tm;  // sigma^2: no power tail
    const std::size_t m = (coord - 1) / 3;
    const std::size_t which = (coord - 1) % 3;
    const auto& c = theta.components[m];
    const double ua = std::pow(u, c.alpha);
    if (which == 1) tm.push_back({c.alpha, h * ua * c.alpha, 0.0});
    else if (which == 2) tm.push_back({c.alpha, 0.0, h * ua * c.alpha});
    else {
        const double lu = std::log(u);
        const double cc = h * ua * (1.0 + c.alpha * lu);
        const double dd = -h * ua * c.alpha;
        tm.push_back({c.alpha, cc * c.r_plus, cc * c.r_minus, dd * c.r_plus, dd * c.r_minus});
    }
    return tm;
}

// integral of f against the tail model over |y| in [x_lo, infinity)
double tail_integral(const MomentFunction& f, const TailModel& tm, double x_lo) {
    if (tm.empty()) return 0.0;
    if (f.support_max > 0.0 && f.support_max <= x_lo) return 0.0;
    double alpha_min = 2.0;
    for (const auto& t : tm) alpha_min = std::min(alpha_min, t.alpha);
    const auto wp = [&](double y) { return f.eval(y) * tail_eval(tm, y); };
    const auto wm = [&](double y) { return f.eval(-y) * tail_eval(tm, -y); };
    double acc = 0.0;
    double a = x_lo;
    const double hi_cap = f.support_max > 0.0 ? f.support_max : std::numeric_limits<double>::max();
    for (int k = 0; k < 60; ++k) {
        const double b = std::min(2.0 * a, hi_cap);
        double e1, e2;
        acc += GK::integrate(wp, a, b, 10, 1e-12, &e1);
        acc += GK::integrate(wm, a, b, 10, 1e-12, &e2);
        if (b >= hi_cap) break;
        a = b;
        // crude remaining-mass bound
        double rem = 0.0;
        for (const auto& t : tm)
            rem += (std::abs(t.c_plus) + std::abs(t.c_minus) +
                    (std::abs(t.d_plus) + std::abs(t.d_minus)) * (std::abs(std::log(a)) + 1.0)) *
                   std::pow(a, -t.alpha) / t.alpha;
        if (f.sup_norm * rem < 1e-16 * (std::abs(acc) + f.sup_norm * 1e-9) + 1e-300) break;
    }
    return acc;
}

struct GridWorkspace {
    double cutoff = 0.0;
    std::size_t n = 0;
    double dx = 0.0, x0 = 0.0;
    std::vector<double> density;  // or a signed gradient grid
};

// inverse-FFT grid of weight(lambda) * exp(-h psi(u lambda)); weight = 1 gives
// the density itself. weight must be Hermitian-compatible (w(-l) = conj w(l)).
template <class Weight>
GridWorkspace inversion_grid(const ThetaParams& theta, double h, double u, double cutoff,
                             std::size_t n, const Weight& weight) {
    const double dl = 2.0 * cutoff / static_cast<double>(n);
    std::vector<std::complex<double>> buf(n);
    for (std::size_t k = n / 2; k < n; ++k) {
        const double lam = -cutoff + dl * static_cast<double>(k);
        const std::complex<double> v =
            weight(lam) * std::exp(-h * levy_symbol(theta, u * lam));
        buf[k] = v;
        if (k > n / 2) buf[n - k] = std::conj(v);
    }
    buf[0] = weight(-cutoff) * std::exp(-h * levy_symbol(theta, -u * cutoff));
    for (std::size_t k = 1; k < n; k += 2) buf[k] = -buf[k];
    fft(buf);

    GridWorkspace g;
    g.cutoff = cutoff;
    g.n = n;
    g.dx = M_PI / cutoff;
    g.x0 = -0.5 * static_cast<double>(n) * g.dx;
    g.density.resize(n);
    const double scale = dl / (2.0 * M_PI);
    for (std::size_t j = 0; j < n; ++j) {
        double v = scale * buf[j].real();
        if (j & 1) v = -v;
        g.density[j] = v;
    }
    return g;
}

// trapezoid of f against the grid, restricted to the support of f
double grid_dot(const MomentFunction& f, const GridWorkspace& g) {
    std::size_t j_lo = 0, j_hi = g.n;
    if (f.support_max > 0.0) {
        const double lo = -f.support_max, hi = f.support_max;
        j_lo = static_cast<std::size_t>(std::max(0.0, std::floor((lo - g.x0) / g.dx)));
        j_hi = static_cast<std::size_t>(
            std::min(static_cast<double>(g.n), std::ceil((hi - g.x0) / g.dx) + 1.0));
    }
    double s = 0.0;
    for (std::size_t j = j_lo; j < j_hi; ++j) {
        const double x = g.x0 + g.dx * static_cast<double>(j);
        if (f.eta > 0.0 && std::abs(x) < f.eta) continue;
        s += f.eval(x) * g.density[j];
    }
    return s * g.dx;
}

// wrap-around (aliased) mass of the tail model folded back into the grid;
// the first several images matter for slowly decaying tails
double alias_dot(const MomentFunction& f, const TailModel& tm, const GridWorkspace& g) {
    if (tm.empty()) return 0.0;
    const double period = g.dx * static_cast<double>(g.n);
    std::size_t j_lo = 0, j_hi = g.n;
    if (f.support_max > 0.0) {
        j_lo = static_cast<std::size_t>(
            std::max(0.0, std::floor((-f.support_max - g.x0) / g.dx)));
        j_hi = static_cast<std::size_t>(
            std::min(static_cast<double>(g.n), std::ceil((f.support_max - g.x0) / g.dx) + 1.0));
    }
    double s = 0.0;
    for (std::size_t j = j_lo; j < j_hi; ++j) {
        const double x = g.x0 + g.dx * static_cast<double>(j);
        if (f.eta > 0.0 && std::abs(x) < f.eta) continue;
        const double fx = f.eval(x);
        if (fx == 0.0) continue;
        double img = 0.0;
        for (int k = 1; k <= 12; ++k)
            img += tail_eval(tm, x - k * period) + tail_eval(tm, x + k * period);
        s += fx * img;
    }
    return s * g.dx;
}

// core scale of u Z_h, used to decide when the power-tail model is valid
double core_scale(const ThetaParams& theta, double h, double u) {
    double v = theta.sigma_sq * h * u * u;
    for (const auto& c : theta.components) {
        // (h u^a (r+ + r-))^{1/a}: size scale of the jump part
        const double s = std::pow(h * std::pow(u, c.alpha) * (c.r_plus + c.r_minus) + 1e-300,
                                  1.0 / c.alpha);
        v = std::max(v, s * s);
    }
    return std::sqrt(v);
}

struct MomentEvalResult {
    Eigen::VectorXd values;
    Eigen::VectorXd errors;
};

// all moments (or gradient entries) on one grid, corrections included
MomentEvalResult moments_on_grid(const ThetaParams& theta, double h, double u,
                                 const MomentFunctionSet& fset, const GridWorkspace& g,
                                 const TailModel& tm) {
    const double half_range = -g.x0;
    const bool correct = !tm.empty() && half_range >= 16.0 * (1.0 + core_scale(theta, h, u));
    MomentEvalResult out;
    const auto nf = static_cast<Eigen::Index>(fset.functions.size());
    out.values.resize(nf);
    out.errors.resize(nf);
    for (Eigen::Index j = 0; j < nf; ++j) {
        const auto& f = fset.functions[static_cast<std::size_t>(j)];
        double v = grid_dot(f, g);
        double err = 1e-14 * f.sup_norm;
        if (correct) {
            const double al = alias_dot(f, tm, g);
            const double tl = tail_integral(f, tm, half_range);
            v += tl - al;
            err += 0.25 * (std::abs(al) + std::abs(tl));
        }
        out.values[j] = v;
        out.errors[j] = err;
    }
    return out;
}

constexpr std::size_t kMaxPoints = std::size_t{1} << 18;

}  // namespace

MomentVector expected_moment_vector(const ThetaParams& theta, double h, double u,
                                    const MomentFunctionSet& fset, GridSpec spec) {
    theta.validate();
    if (fset.functions.empty()) throw std::invalid_argument("empty moment set");
    const double cutoff = spec.cutoff > 0.0 ? spec.cutoff : inversion_cutoff(theta, h, u);
    const TailModel tm = value_tail_model(theta, h, u);
    const auto unit = [](double) { return std::complex<double>(1.0, 0.0); };

    MomentVector mv;
    mv.cutoff = cutoff;
    Eigen::VectorXd prev;
    const std::size_t cap = std::max(kMaxPoints, spec.n_points);
    for (std::size_t n = spec.n_points;; n *= 2) {
        const auto g = inversion_grid(theta, h, u, cutoff, n, unit);
        const auto cur = moments_on_grid(theta, h, u, fset, g, tm);
        mv.values = cur.values;
        mv.error_bounds = cur.errors;
        mv.n_points = n;
        if (prev.size() > 0) {
            double worst = 0.0;
            for (Eigen::Index j = 0; j < cur.values.size(); ++j)
                worst = std::max(worst,
                                 std::abs(cur.values[j] - prev[j]) /
                                     fset.functions[static_cast<std::size_t>(j)].sup_norm);
            if (worst < 1e-9) {
                mv.converged = true;
                return mv;
            }
        }
        prev = cur.values;
        if (n >= cap) break;
    }
    mv.converged = false;
    return mv;
}

MomentValue expected_moment(const ThetaParams& theta, double h, double u,
                            const MomentFunction& f, GridSpec spec) {
    MomentFunctionSet one;
    one.functions.push_back(f);
    one.eta = f.eta;
    const auto mv = expected_moment_vector(theta, h, u, one, spec);
    return {mv.values[0], mv.error_bounds[0]};
}

Eigen::MatrixXd moment_jacobian(const ThetaParams& theta, double h, double u,
                                const MomentFunctionSet& fset, JacobianMethod method,
                                GridSpec spec) {
    theta.validate();
    const auto dim = static_cast<Eigen::Index>(theta.dim());
    const auto nf = static_cast<Eigen::Index>(fset.functions.size());
    if (nf != dim)
        throw std::invalid_argument("moment_jacobian: set size must equal dim(theta)");

    // settle the grid once; all evaluations share it so differences stay clean
    const auto base = expected_moment_vector(theta, h, u, fset, spec);
    const GridSpec fixed{base.n_points, base.cutoff};

    Eigen::MatrixXd jac(nf, dim);
    if (method == JacobianMethod::Analytic) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            const auto weight = [&](double lam) {
                return -h * levy_symbol_dtheta(theta, u * lam, static_cast<std::size_t>(k));
            };
            const auto g = inversion_grid(theta, h, u, fixed.cutoff, fixed.n_points, weight);
            const auto tm = coord_tail_model(theta, h, u, static_cast<std::size_t>(k));
            const auto col = moments_on_grid(theta, h, u, fset, g, tm);
            jac.col(k) = col.values;
        }
        return jac;
    }

    const std::vector<double> flat = theta.flatten();
    const auto eval_at = [&](const std::vector<double>& v) {
        const ThetaParams t = ThetaParams::unflatten(v);
        return expected_moment_vector(t, h, u, fset, fixed).values;
    };
    for (Eigen::Index k = 0; k < dim; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        double step = 1e-4 * std::max(std::abs(flat[ku]), 1e-4);
        std::vector<double> up = flat, dn = flat;
        up[ku] += step;
        dn[ku] -= step;
        bool central = true;
        try {
            ThetaParams::unflatten(dn).validate();
        } catch (const std::invalid_argument&) {
            central = false;
        }
        if (central) {
            jac.col(k) = (eval_at(up) - eval_at(dn)) / (2.0 * step);
        } else {
            jac.col(k) = (eval_at(up) - base.values) / step;
        }
    }
    return jac;
}

double smalltime_expansion(const ThetaParams& theta, double h, double u,
                           const MomentFunction& f, SmallTimeCase c) {
    theta.validate();
    switch (c) {
        case SmallTimeCase::JumpLeading: {
            if (!(f.eta > 0.0))
                throw std::invalid_argument("JumpLeading requires f vanishing near 0");
            if (theta.components.empty())
                throw std::invalid_argument("JumpLeading requires a jump component");
            const auto& c1 = theta.components.front();
            const double jp = jump_functional(c1.alpha, +1, f).value;
            const double jm = jump_functional(c1.alpha, -1, f).value;
            return h * std::pow(u, c1.alpha) * (c1.r_plus * jp + c1.r_minus * jm);
        }
        case SmallTimeCase::GaussianLeading: {
            if (std::abs(f.eval(0.0)) > 1e-12 || std::abs(f.d2(0.0)) < 1e-14)
                throw std::invalid_argument("GaussianLeading requires f(0)=0, f''(0) != 0");
            return h * u * u * 0.5 * theta.sigma_sq * f.d2(0.0);
        }
        case SmallTimeCase::QuarticLeading: {
            if (std::abs(f.eval(0.0)) > 1e-12 || std::abs(f.d2 ? f.d2(0.0) : 0.0) > 1e-10 ||
                !std::isfinite(f.d4_at_zero))
                throw std::invalid_argument(
                    "QuarticLeading requires f(0)=f''(0)=0 and a recorded f''''(0)");
            const double s4 = theta.sigma_sq * theta.sigma_sq;
            return h * h * std::pow(u, 4.0) * s4 / 8.0 * f.d4_at_zero;
        }
    }
    throw std::logic_error("unreachable");
}

BiasDecayTable bias_decay_diagnostic(const SimModelSpec& model, const ThetaParams& theta,
                                     const MomentFunction& f, std::span<const double> h_schedule,
                                     std::size_t n_draws, std::uint64_t seed) {
    model.validate();
    BiasDecayTable table;
    const double rho = (model.nuisance && model.nuisance->scale > 0.0)
                           ? model.nuisance->alpha
                           : std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < h_schedule.size(); ++i) {
        const double h = h_schedule[i];
        const double u = 1.0 / std::sqrt(h * std::abs(std::log(h)));
        const auto batch = simulate_increments(model, n_draws, h, derive_seed(seed, i));
        double mean = 0.0, m2 = 0.0;
        for (double x : batch.values) mean += f.eval(u * x);
        mean /= static_cast<double>(n_draws);
        for (double x : batch.values) {
            const double d = f.eval(u * x) - mean;
            m2 += d * d;
        }
        const double se = std::sqrt(m2) / static_cast<double>(n_draws);
        const double model_mean = expected_moment(theta, h, u, f).value;
        BiasDecayRow row;
        row.h = h;
        row.u = u;
        row.mc_mean = mean;
        row.model_mean = model_mean;
        row.bias = std::abs(mean - model_mean);
        row.mc_se = se;
        row.censored = row.bias < 3.0 * se;
        table.rows.push_back(row);
    }
    // log-log slope over uncensored rows
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int nfit = 0;
    for (const auto& r : table.rows) {
        if (r.censored || r.bias <= 0.0) continue;
        const double x = std::log(r.h), y = std::log(r.bias);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++nfit;
    }
    if (nfit >= 2) {
        const double n = nfit;
        table.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    if (std::isfinite(rho) && h_schedule.size() >= 2 && !theta.components.empty()) {
        const double alpha = theta.components.front().alpha;
        const auto bound = [&](double h) {
            const double u = 1.0 / std::sqrt(h * std::abs(std::log(h)));
            return (h * std::pow(u, rho) +
                    h * h * std::pow(u, std::max(2.0, alpha + 1.0))) *
                   (1.0 + std::log(u));
        };
        const double h1 = h_schedule.front(), h2 = h_schedule.back();
        table.bound_slope = (std::log(bound(h1)) - std::log(bound(h2))) /
                            (std::log(h1) - std::log(h2));
    }
    return table;
}

}  // namespace levybg
