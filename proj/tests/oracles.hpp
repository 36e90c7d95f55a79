// Test-only oracles, independent of the library's numerical paths.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// adaptive Simpson on [a, b]
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int depth = 40) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// PV integral (1/pi) int f(t)/(t - x) dt over [lo, hi] (Hilbert transform
// convention H f(x) = (1/pi) PV int f(t)/(x - t) dt = -this).
inline double pv_over_t_minus_x(const std::function<double(double)>& f, double x, double lo,
                                double hi, double tol = 1e-9) {
    // split out a symmetric window around x where the PV cancels the constant
    double d = std::min(std::min(x - lo, hi - x), 1.0);
    auto g = [&](double t) {
        double dt = t - x;
        if (std::abs(dt) < 1e-9) return (f(x + 1e-6) - f(x - 1e-6)) / 2e-6;
        return (f(t) - f(x)) / dt;
    };
    double core = integrate(g, x - d, x + d, tol);
    double wings = 0;
    if (lo < x - d) wings += integrate([&](double t) { return f(t) / (t - x); }, lo, x - d, tol);
    if (hi > x + d) wings += integrate([&](double t) { return f(t) / (t - x); }, x + d, hi, tol);
    // PV of f(x)/(t-x) over the symmetric window vanishes
    return (core + wings) / 3.14159265358979323846;
}

// classic RK4 for 2-vector ODEs y' = A(tau) y with complex entries
struct CVec2 {
    cplx a, b;
};

inline void rk4_system(const std::function<void(double, const CVec2&, CVec2&)>& deriv, CVec2& y,
                       double t0, double t1, int steps) {
    double h = (t1 - t0) / steps;
    for (int i = 0; i < steps; ++i) {
        double t = t0 + i * h;
        CVec2 k1, k2, k3, k4, tmp;
        deriv(t, y, k1);
        tmp = {y.a + 0.5 * h * k1.a, y.b + 0.5 * h * k1.b};
        deriv(t + 0.5 * h, tmp, k2);
        tmp = {y.a + 0.5 * h * k2.a, y.b + 0.5 * h * k2.b};
        deriv(t + 0.5 * h, tmp, k3);
        tmp = {y.a + h * k3.a, y.b + h * k3.b};
        deriv(t + h, tmp, k4);
        y.a += h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
        y.b += h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    }
}

// graded symmetric grid on [-X, X]: dense near 0, geometric toward the edges
inline std::vector<double> graded_grid(double X, int n_per_side, double x0 = 1e-3) {
    std::vector<double> g;
    g.reserve(2 * n_per_side + 1);
    double r = std::pow(X / x0, 1.0 / (n_per_side - 1));
    std::vector<double> pos(n_per_side);
    for (int i = 0; i < n_per_side; ++i) pos[i] = x0 * std::pow(r, i);
    for (int i = n_per_side - 1; i >= 0; --i) g.push_back(-pos[i]);
    g.push_back(0.0);
    for (int i = 0; i < n_per_side; ++i) g.push_back(pos[i]);
    return g;
}

// even-extension d'Alembert solution for the rho = 1 Neumann string
inline double dalembert(const std::function<double(double)>& u0, double xi, double t) {
    auto ue = [&](double x) { return u0(std::abs(x)); };
    return 0.5 * (ue(xi + t) + ue(xi - t));
}

inline double bump(double xi, double center, double width) {
    double r = (xi - center) / width;
    if (std::abs(r) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

}  // namespace oracle
