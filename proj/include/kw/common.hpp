// Shared primitives: error types, 2x2 matrices, small numeric helpers.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace kw {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// Thrown when an input object violates its documented invariants.  The CLI
// maps these to exit code 1.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an operation's mathematical precondition fails (e.g. a Szego
// function of a non-Szego measure).  CLI exit code 1.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Thrown on numerical/stability refusals (e.g. CFL violation).  CLI exit 3.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on filesystem failures.  CLI exit 2.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// General real 2x2 matrix.
struct Mat2 {
    double a = 0, b = 0, c = 0, d = 0;  // [[a, b], [c, d]]

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    Mat2 transpose() const { return {a, c, b, d}; }

    static Mat2 identity() { return {1, 0, 0, 1}; }
};

// Symmetric 2x2 matrix [[h1, h], [h, h2]]; the cell type for Hamiltonians.
struct SymMat2 {
    double h1 = 0, h2 = 0, h = 0;

    double det() const { return h1 * h2 - h * h; }
    double trace() const { return h1 + h2; }
    SymMat2 operator+(const SymMat2& o) const { return {h1 + o.h1, h2 + o.h2, h + o.h}; }
    SymMat2 operator*(double s) const { return {h1 * s, h2 * s, h * s}; }
};

inline double sqr(double x) { return x * x; }

// sin(x)/x, series near zero; works for complex arguments.
inline cplx sinc(cplx x) {
    if (std::abs(x) < 1e-4) {
        cplx x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

// (e^b - e^a)/(b - a), stable when b ~ a.  Equals the mean of e^g over a
// segment where g is linear from a to b.
inline double exp_mean_linear(double a, double b) {
    double d = b - a;
    if (std::abs(d) < 1e-8) {
        double m = 0.5 * (a + b);
        return std::exp(m) * (1.0 + d * d / 24.0);
    }
    return std::exp(a) * std::expm1(d) / d;
}

// Composite trapezoid over sampled values.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw validation_error("trapezoid: size mismatch");
    double s = 0;
    for (size_t i = 0; i + 1 < x.size(); ++i)
        s += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    return s;
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

inline bool strictly_increasing(const std::vector<double>& v) {
    for (size_t i = 0; i + 1 < v.size(); ++i)
        if (!(v[i] < v[i + 1])) return false;
    return true;
}

}  // namespace kw
