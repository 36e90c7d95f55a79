// Spectral-measure data model, Szego log integrals, Szego (outer) functions,
// entropy, and the scattering multiplier.
#pragma once

#include <optional>

#include "kw/common.hpp"

namespace kw {

enum class Support { FullLine, HalfLine };

struct Atom {
    double x = 0;  // position
    double m = 0;  // mass > 0
};

// Power-law closure for the density beyond the stored grid: w(x) ~ c*|x|^p.
struct TailModel {
    double p = 0;
    double c = 0;
};

// A measure w dx + atoms, sampled on a grid (trapezoid interpretation
// between points), plus a tail model closing Poisson-type integrals.
struct SpectralMeasure {
    Support support = Support::FullLine;
    std::vector<double> grid;     // strictly increasing
    std::vector<double> density;  // w(grid[k]) >= 0
    std::vector<Atom> atoms;
    std::optional<TailModel> tail;
};

namespace detail {

// Density values below this are the "exact zero" of the sentinel rule.
inline constexpr double density_zero = 1e-300;

// Fit w ~ c|x|^p over the last decade of grid points (both tails jointly on
// the full line).  Returns nullopt when the edge density vanishes.
inline std::optional<TailModel> fit_tail_power(const SpectralMeasure& mu) {
    double edge = mu.support == Support::FullLine
                      ? std::max(std::abs(mu.grid.front()), std::abs(mu.grid.back()))
                      : mu.grid.back();
    double lo = edge / 10.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t k = 0; k < mu.grid.size(); ++k) {
        double ax = std::abs(mu.grid[k]);
        if (ax < lo) continue;
        if (mu.density[k] <= density_zero) return std::nullopt;
        double X = std::log(ax), Y = std::log(mu.density[k]);
        sx += X; sy += Y; sxx += X * X; sxy += X * Y;
        ++n;
    }
    if (n < 2) return std::nullopt;
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-14) return TailModel{0.0, std::exp(sy / n)};
    double p = (n * sxy - sx * sy) / det;
    double lc = (sy - p * sx) / n;
    return TailModel{p, std::exp(lc)};
}

// int_X^inf log(x)/(1+x^2) dx  (X > 1), by the series in u = 1/x.
inline double tail_logx_over_1px2(double X) {
    double a = 1.0 / X, s = 0;
    double la = std::log(a);
    double apow = a;
    for (int k = 0; k < 200; ++k) {
        double n1 = 2.0 * k + 1.0;
        double t = apow * (1.0 / (n1 * n1) - la / n1);
        s += (k % 2 == 0) ? t : -t;
        apow *= a * a;
        if (apow < 1e-300 || std::abs(apow * (std::abs(la) + 1.0)) < 1e-18) break;
    }
    return s;
}

// int_X^inf x^p/(1+x^2) dx, p < 1, X > 1.
inline double tail_pow_over_1px2(double X, double p) {
    double s = 0;
    for (int k = 0; k < 400; ++k) {
        double e = p - 1.0 - 2.0 * k;
        double t = std::pow(X, e) / (2.0 * k + 1.0 - p);
        s += (k % 2 == 0) ? t : -t;
        if (std::abs(t) < 1e-18) break;
    }
    return s;
}

// int_X^inf (log c + p log x)/(1+x^2) dx
inline double tail_log_fullline(double X, const TailModel& t) {
    return std::log(t.c) * (pi / 2.0 - std::atan(X)) + t.p * tail_logx_over_1px2(X);
}

// int_X^inf x^{-1/2-k} dx and the log-weighted variant, assembled into
// int_X^inf (log c + p log x)/(sqrt(x)(x+1)) dx  (X > 1).
inline double tail_log_halfline(double X, const TailModel& t) {
    double s = 0;
    double lX = std::log(X);
    for (int k = 0; k < 400; ++k) {
        double e = 0.5 + k;
        double xe = std::pow(X, -e);
        double base = std::log(t.c) * xe / e;
        double logs = t.p * xe * (lX / e + 1.0 / (e * e));
        double term = base + logs;
        s += (k % 2 == 0) ? term : -term;
        if (std::abs(term) < 1e-18) break;
    }
    return s;
}

// int_X^inf c x^p/(x+1) dx, p < 0, X > 1.
inline double tail_pow_halfline(double X, const TailModel& t) {
    double s = 0;
    for (int k = 0; k < 400; ++k) {
        // int_X^inf x^{p-1-k} dx = X^{p-k}/(k-p)
        double term = std::pow(X, t.p - k) / (k - t.p);
        s += (k % 2 == 0) ? term : -term;
        if (std::abs(term) < 1e-18) break;
    }
    return t.c * s;
}

inline void validate(const SpectralMeasure& mu) {
    if (mu.grid.size() < 2) throw validation_error("measure: grid needs >= 2 points");
    if (mu.grid.size() != mu.density.size())
        throw validation_error("measure: grid/density size mismatch");
    if (!strictly_increasing(mu.grid))
        throw validation_error("measure: grid must be strictly increasing");
    for (double w : mu.density)
        if (!(w >= 0)) throw validation_error("measure: density must be >= 0");
    for (const Atom& a : mu.atoms)
        if (!(a.m > 0)) throw validation_error("measure: atom masses must be > 0");
    if (mu.support == Support::HalfLine) {
        if (mu.grid.front() <= 0) throw validation_error("half-line measure: grid must be > 0");
        if (mu.grid.back() <= 1) throw validation_error("half-line measure: grid must extend past 1");
        for (const Atom& a : mu.atoms)
            if (a.x < 0) throw validation_error("half-line measure: atoms must sit in R+");
        if (mu.tail && !(mu.tail->p < 0))
            throw validation_error("half-line measure: tail exponent must satisfy p < 0 for Poisson finiteness");
    } else {
        if (!(mu.grid.front() < -1 && mu.grid.back() > 1))
            throw validation_error("full-line measure: grid must span beyond [-1, 1]");
        if (mu.tail && !(mu.tail->p < 1))
            throw validation_error("full-line measure: tail exponent must satisfy p < 1 for Poisson finiteness");
    }
}

inline TailModel effective_tail(const SpectralMeasure& mu) {
    if (mu.tail) return *mu.tail;
    auto fitted = fit_tail_power(mu);
    return fitted ? *fitted : TailModel{0.0, 0.0};  // c = 0: density vanishes beyond grid
}

}  // namespace detail

// (1/pi) int log w / (1+x^2) dx with tail closure; -inf when w vanishes on a
// grid subinterval of positive length.  Atoms never contribute.
inline double szego_log_integral(const SpectralMeasure& mu) {
    detail::validate(mu);
    if (mu.support != Support::FullLine)
        throw validation_error("szego_log_integral expects a full-line measure");
    const auto& x = mu.grid;
    const auto& w = mu.density;
    double s = 0;
    for (size_t k = 0; k + 1 < x.size(); ++k) {
        bool z0 = w[k] <= detail::density_zero, z1 = w[k + 1] <= detail::density_zero;
        double dx = x[k + 1] - x[k];
        double xm = 0.5 * (x[k] + x[k + 1]);
        if (z0 && z1) return neg_inf;
        if (z0 || z1) {
            // linear ramp from 0: int_0^1 log(w1 * t) dt = log w1 - 1
            double wpos = z0 ? w[k + 1] : w[k];
            s += (std::log(wpos) - 1.0) * dx / (1.0 + xm * xm);
        } else {
            s += 0.5 * (std::log(w[k]) / (1.0 + x[k] * x[k]) +
                        std::log(w[k + 1]) / (1.0 + x[k + 1] * x[k + 1])) * dx;
        }
    }
    TailModel t = detail::effective_tail(mu);
    if (t.c <= 0) return neg_inf;
    s += detail::tail_log_fullline(x.back(), t);
    s += detail::tail_log_fullline(std::abs(x.front()), t);
    return s / pi;
}

// Half-line membership integral int log v(x) / (sqrt(x)(x+1)) dx.
inline double szego_membership_halfline(const SpectralMeasure& sigma) {
    detail::validate(sigma);
    if (sigma.support != Support::HalfLine)
        throw validation_error("szego_membership_halfline expects a half-line measure");
    const auto& x = sigma.grid;
    const auto& w = sigma.density;
    auto kern = [](double t) { return 1.0 / (std::sqrt(t) * (t + 1.0)); };
    double s = 0;
    for (size_t k = 0; k + 1 < x.size(); ++k) {
        bool z0 = w[k] <= detail::density_zero, z1 = w[k + 1] <= detail::density_zero;
        double dx = x[k + 1] - x[k];
        if (z0 && z1) return neg_inf;
        if (z0 || z1) {
            double wpos = z0 ? w[k + 1] : w[k];
            double xm = 0.5 * (x[k] + x[k + 1]);
            s += (std::log(wpos) - 1.0) * dx * kern(xm);
        } else {
            s += 0.5 * (std::log(w[k]) * kern(x[k]) + std::log(w[k + 1]) * kern(x[k + 1])) * dx;
        }
    }
    // head closure: density continued with its first value on (0, x_1]
    if (w.front() <= detail::density_zero) return neg_inf;
    s += std::log(w.front()) * 2.0 * std::atan(std::sqrt(x.front()));
    TailModel t = detail::effective_tail(sigma);
    if (t.c <= 0) return neg_inf;
    s += detail::tail_log_halfline(x.back(), t);
    return s;
}

namespace detail {

// log sqrt(w) interpolated on the grid (linear in w), tail-model beyond.
inline double log_sqrt_w_at(const SpectralMeasure& mu, const TailModel& t, double x) {
    const auto& g = mu.grid;
    if (x < g.front() || x > g.back()) {
        double ax = std::abs(x);
        if (t.c <= 0) return neg_inf;
        return 0.5 * (std::log(t.c) + t.p * std::log(ax));
    }
    auto it = std::upper_bound(g.begin(), g.end(), x);
    size_t k = std::min<size_t>(std::max<ptrdiff_t>(1, it - g.begin()), g.size() - 1);
    double u = (x - g[k - 1]) / (g[k] - g[k - 1]);
    double w = mu.density[k - 1] * (1 - u) + mu.density[k] * u;
    if (w <= density_zero) return neg_inf;
    return 0.5 * std::log(w);
}

}  // namespace detail

// Szego function D_mu(z), Im z > 0: the outer function with |D|^2 = w on the
// boundary and D(i) > 0.  Quadrature over the grid with a slowly-varying
// subtraction at Re z (kills the Poisson peak when Im z is small) and a
// geometric tail extension driven by the tail model.
inline cplx szego_function(const SpectralMeasure& mu, cplx z) {
    detail::validate(mu);
    if (mu.support != Support::FullLine)
        throw validation_error("szego_function expects a full-line measure (see string_szego_function)");
    if (!(z.imag() > 0)) throw validation_error("szego_function: Im z must be > 0");
    double J = szego_log_integral(mu);
    if (J == neg_inf) throw domain_error("szego_function: measure is not in the Szego class");
    TailModel t = detail::effective_tail(mu);

    double ls0 = detail::log_sqrt_w_at(mu, t, z.real());
    bool subtract = std::isfinite(ls0);

    auto kern = [&z](double x) -> cplx {
        return 1.0 / (x - z) - x / (1.0 + x * x);
    };
    cplx acc = 0;
    auto add_segment = [&](double xa, double xb, double la, double lb) {
        if (la == neg_inf || lb == neg_inf) {
            // zero-density edge cannot occur for a Szego measure interior;
            // treat as vanishing contribution of log toward the tail rule
            return;
        }
        acc += 0.5 * (la * kern(xa) + lb * kern(xb)) * (xb - xa);
    };
    const auto& g = mu.grid;
    std::vector<double> lsw(g.size());
    for (size_t k = 0; k < g.size(); ++k)
        lsw[k] = (mu.density[k] <= detail::density_zero) ? neg_inf : 0.5 * std::log(mu.density[k]);
    for (size_t k = 0; k + 1 < g.size(); ++k) {
        double la = lsw[k], lb = lsw[k + 1];
        if (subtract) { la -= ls0; lb -= ls0; }
        add_segment(g[k], g[k + 1], la, lb);
    }
    // geometric tails out to |x| ~ edge * 1e8 (segments oriented low-to-high)
    auto add_tail = [&](double edge, int dir) {
        const int n = 600;
        double r = std::pow(1e8, 1.0 / n);
        double xa = edge;
        for (int j = 0; j < n; ++j) {
            double xb = xa * r;
            double la = 0.5 * (std::log(t.c) + t.p * std::log(xa));
            double lb = 0.5 * (std::log(t.c) + t.p * std::log(xb));
            if (subtract) { la -= ls0; lb -= ls0; }
            if (dir > 0) add_segment(xa, xb, la, lb);
            else add_segment(-xb, -xa, lb, la);
            xa = xb;
        }
    };
    if (t.c > 0) {
        add_tail(g.back(), +1);
        add_tail(std::abs(g.front()), -1);
    }
    cplx expo = acc / (pi * cplx(0, 1));
    if (subtract) expo += ls0;  // subtracted constant re-enters via int K = i*pi
    return std::exp(expo);
}

// Szego function of a half-line (string) spectral measure:
// D^(S)(z) = D_{mu_sigma1}(sqrt z) / (sqrt(pi) z^{1/4}), where mu_sigma1 is
// the symmetrized full-line measure with mu([E1,E2]) = 0.5*pi*sigma([E1^2,E2^2]).
inline SpectralMeasure symmetrize_halfline(const SpectralMeasure& sigma) {
    detail::validate(sigma);
    if (sigma.support != Support::HalfLine)
        throw validation_error("symmetrize_halfline expects a half-line measure");
    SpectralMeasure mu;
    mu.support = Support::FullLine;
    size_t n = sigma.grid.size();
    mu.grid.resize(2 * n);
    mu.density.resize(2 * n);
    for (size_t k = 0; k < n; ++k) {
        double s = std::sqrt(sigma.grid[k]);
        double w1 = pi * s * sigma.density[k];
        mu.grid[n + k] = s;
        mu.density[n + k] = w1;
        mu.grid[n - 1 - k] = -s;
        mu.density[n - 1 - k] = w1;
    }
    for (const Atom& a : sigma.atoms) {
        if (a.x == 0) {
            mu.atoms.push_back({0.0, pi * a.m});
        } else {
            double s = std::sqrt(a.x);
            mu.atoms.push_back({s, 0.5 * pi * a.m});
            mu.atoms.push_back({-s, 0.5 * pi * a.m});
        }
    }
    TailModel t = detail::effective_tail(sigma);
    if (t.c > 0) mu.tail = TailModel{2.0 * t.p + 1.0, pi * t.c};
    return mu;
}

inline cplx string_szego_function(const SpectralMeasure& sigma, cplx z) {
    SpectralMeasure mu1 = symmetrize_halfline(sigma);
    if (szego_membership_halfline(sigma) == neg_inf)
        throw domain_error("string_szego_function: measure is not in the half-line Szego class");
    cplx rz = std::sqrt(z);                       // upper half-plane branch
    cplx qz = std::exp(0.25 * std::log(z));       // principal quarter root
    return szego_function(mu1, rz) / (std::sqrt(pi) * qz);
}

// Scattering multiplier s(x) = conj(D)/D on x_grid, evaluated at x + i*eps.
inline std::vector<cplx> scattering_multiplier(const SpectralMeasure& mu,
                                               const std::vector<double>& x_grid,
                                               double eps = 1e-3) {
    std::vector<cplx> out;
    out.reserve(x_grid.size());
    for (double x : x_grid) {
        cplx d = szego_function(mu, cplx(x, eps));
        out.push_back(std::conj(d) / d);
    }
    return out;
}

// Entropy K = log I - J at r = 0, I = (1/pi) int dmu/(1+x^2) (+ b0 = 0).
inline double entropy(const SpectralMeasure& mu) {
    detail::validate(mu);
    if (mu.support != Support::FullLine)
        throw validation_error("entropy expects a full-line measure");
    double J = szego_log_integral(mu);
    if (J == neg_inf) throw domain_error("entropy: measure is not in the Szego class");
    const auto& x = mu.grid;
    double I = 0;
    for (size_t k = 0; k + 1 < x.size(); ++k)
        I += 0.5 * (mu.density[k] / (1 + x[k] * x[k]) +
                    mu.density[k + 1] / (1 + x[k + 1] * x[k + 1])) * (x[k + 1] - x[k]);
    TailModel t = detail::effective_tail(mu);
    if (t.c > 0) {
        I += t.c * detail::tail_pow_over_1px2(x.back(), t.p);
        I += t.c * detail::tail_pow_over_1px2(std::abs(x.front()), t.p);
    }
    for (const Atom& a : mu.atoms) I += a.m / (1 + a.x * a.x);
    I /= pi;
    if (!(I > 0)) throw validation_error("entropy: measure has no mass");
    return std::log(I) - J;
}

}  // namespace kw
