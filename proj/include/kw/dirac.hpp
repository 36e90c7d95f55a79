// Dirac potentials: the transfer matrix N0, Szego criteria (matrix and
// scalar forms), the Wigner-von Neumann region classifier, and the
// dispersion/Korey diagnostics.
#pragma once

#include "kw/canonical.hpp"
#include "kw/report.hpp"

namespace kw {

enum class DiracForm { Diagonal, Antidiagonal, General };

// q given either as piecewise-constant samples (continued with the last
// value beyond the breaks) or as the Wigner-von Neumann family
// q = sin(tau^alpha)/tau^beta for tau >= tau0, constant q(tau0) before.
struct ScalarPotential {
    enum class Kind { PiecewiseConstant, WignerVonNeumann };
    Kind kind = Kind::PiecewiseConstant;
    std::vector<double> breaks;  // pc: starts at 0
    std::vector<double> values;
    double alpha = 0, beta = 0, tau0 = 1;

    static ScalarPotential pc(std::vector<double> brk, std::vector<double> val) {
        ScalarPotential q;
        q.kind = Kind::PiecewiseConstant;
        q.breaks = std::move(brk);
        q.values = std::move(val);
        return q;
    }
    static ScalarPotential constant(double c) { return pc({0.0}, {c}); }
    static ScalarPotential wvn(double alpha, double beta, double tau0 = 1.0) {
        ScalarPotential q;
        q.kind = Kind::WignerVonNeumann;
        q.alpha = alpha;
        q.beta = beta;
        q.tau0 = tau0;
        return q;
    }

    double operator()(double tau) const {
        if (kind == Kind::PiecewiseConstant) {
            auto it = std::upper_bound(breaks.begin(), breaks.end(), tau);
            size_t k = (size_t)std::max<ptrdiff_t>(1, it - breaks.begin()) - 1;
            return values[std::min(k, values.size() - 1)];
        }
        double t = std::max(tau, tau0);
        return std::sin(std::pow(t, alpha)) / std::pow(t, beta);
    }
};

struct DiracPotential {
    DiracForm form = DiracForm::Diagonal;
    ScalarPotential q1, q2;  // diagonal uses q1, antidiagonal uses q2
    double tau_max = 0;

    static DiracPotential diagonal(ScalarPotential q, double tau_max) {
        return {DiracForm::Diagonal, std::move(q), ScalarPotential::constant(0), tau_max};
    }
    static DiracPotential antidiagonal(ScalarPotential q, double tau_max) {
        return {DiracForm::Antidiagonal, ScalarPotential::constant(0), std::move(q), tau_max};
    }
    static DiracPotential general(ScalarPotential a, ScalarPotential b, double tau_max) {
        return {DiracForm::General, std::move(a), std::move(b), tau_max};
    }

    const ScalarPotential& scalar_q() const {
        if (form == DiracForm::General)
            throw validation_error("scalar_q: general potentials have no single q");
        return form == DiracForm::Diagonal ? q1 : q2;
    }
};

enum class WvnRegion { A1, A2, A3, Outside, Boundary };

inline const char* to_string(WvnRegion r) {
    switch (r) {
        case WvnRegion::A1: return "A1";
        case WvnRegion::A2: return "A2";
        case WvnRegion::A3: return "A3";
        case WvnRegion::Outside: return "Outside";
        default: return "Boundary";
    }
}

struct RegionVerdict {
    WvnRegion region = WvnRegion::Outside;
    std::optional<bool> in_szego_class;  // empty on Boundary
};

struct KoreyResult {
    double eps = 0;          // <e^f><e^-f> - 1
    double lhs = 0;          // <|f - <f>|>
    double bound_ratio = 0;  // lhs / sqrt(eps)
    bool in_range = true;    // eps <= 1
};

namespace detail {

inline void validate(const ScalarPotential& q) {
    if (q.kind == ScalarPotential::Kind::PiecewiseConstant) {
        if (q.breaks.empty() || q.breaks.size() != q.values.size())
            throw validation_error("potential: breaks/values mismatch");
        if (q.breaks.front() != 0 || !strictly_increasing(q.breaks))
            throw validation_error("potential: breaks must start at 0 and increase");
    } else {
        if (!(q.tau0 > 0)) throw validation_error("potential: wvn requires tau0 > 0");
    }
}

inline void validate(const DiracPotential& Q) {
    validate(Q.q1);
    validate(Q.q2);
    if (!(Q.tau_max > 2)) throw validation_error("potential: tau_max must exceed 2");
}

// int_A^B e^{i w y} y^{-s} dy by iterated integration by parts; valid when A
// is large.  Returns the value and a bound on the truncation remainder.
inline std::pair<cplx, double> osc_power_integral(double w, double s, double A, double B,
                                                  double tol = 1e-14) {
    cplx iw(0, w);
    cplx coef = 1;
    cplx val = 0;
    double cur = s;
    double bound = inf;
    for (int k = 0; k < 12; ++k) {
        cplx bterm = std::exp(cplx(0, w * B)) * std::pow(B, -cur);
        cplx aterm = std::exp(cplx(0, w * A)) * std::pow(A, -cur);
        val += coef * (bterm - aterm) / iw;
        coef *= cur / iw;
        cur += 1.0;
        if (cur > 1.0) {
            bound = std::abs(coef) * std::pow(A, 1.0 - cur) / (cur - 1.0);
            if (bound < tol) break;
        }
    }
    return {val, bound};
}

inline double power_integral(double s, double A, double B) {
    if (std::abs(s - 1.0) < 1e-12) return std::log(B / A);
    return (std::pow(A, 1.0 - s) - std::pow(B, 1.0 - s)) / (s - 1.0);
}

// Step edges over [lo, hi]: at most base_h wide and split at the potentials'
// breakpoints, so RK4 never integrates across a jump of q.
inline std::vector<double> rk4_edges(const DiracPotential& Q, double lo, double hi,
                                     double base_h) {
    std::vector<double> cuts{lo, hi};
    auto add = [&](const ScalarPotential& q) {
        if (q.kind == ScalarPotential::Kind::PiecewiseConstant) {
            for (double b : q.breaks)
                if (b > lo && b < hi) cuts.push_back(b);
        } else if (q.tau0 > lo && q.tau0 < hi) {
            cuts.push_back(q.tau0);
        }
    };
    add(Q.q1);
    add(Q.q2);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<double> edges;
    for (size_t j = 0; j + 1 < cuts.size(); ++j) {
        int n = std::max(1, (int)std::ceil((cuts[j + 1] - cuts[j]) / base_h));
        for (int i = 0; i < n; ++i) edges.push_back(cuts[j] + (cuts[j + 1] - cuts[j]) * i / n);
    }
    edges.push_back(hi);
    return edges;
}

// A window's worth of g = 2 int q with enough nodes to resolve the phase,
// or the integration-by-parts asymptotics when that is unaffordable.
struct WindowData {
    std::vector<double> tau;
    std::vector<double> g;    // relative to the window start
    bool asymptotic = false;
    double term = 0;          // filled on the asymptotic path
    double s2 = 0;            // int gtilde^2
    double max_gtilde = 0;
    bool warn = false;
};

inline constexpr double phase_per_subcell = pi / 8.0;
inline constexpr int max_subcells = 40000;

// direct accumulation over given nodes: per-subcell Simpson with a
// trapezoid/midpoint Richardson check
template <class F>
inline void accumulate_g(const F& q, WindowData& wd) {
    size_t n = wd.tau.size();
    wd.g.assign(n, 0.0);
    double drift = 0;
    for (size_t j = 0; j + 1 < n; ++j) {
        double a = wd.tau[j], b = wd.tau[j + 1], d = b - a;
        double qa = q(a), qb = q(b), qm = q(0.5 * (a + b));
        double t1 = 0.5 * (qa + qb) * d;
        double t2 = 0.25 * (qa + 2.0 * qm + qb) * d;
        wd.g[j + 1] = wd.g[j] + 2.0 * (4.0 * t2 - t1) / 3.0;
        drift += std::abs(t2 - t1);
    }
    if (drift > 1e-3) wd.warn = true;
}

inline WindowData window_nodes_pc(const ScalarPotential& q, double lo, double hi) {
    WindowData wd;
    wd.tau.push_back(lo);
    auto it = std::upper_bound(q.breaks.begin(), q.breaks.end(), lo);
    for (; it != q.breaks.end() && *it < hi; ++it) wd.tau.push_back(*it);
    wd.tau.push_back(hi);
    // g exact: q constant per subcell
    size_t n = wd.tau.size();
    wd.g.assign(n, 0.0);
    for (size_t j = 0; j + 1 < n; ++j) {
        double mid = 0.5 * (wd.tau[j] + wd.tau[j + 1]);
        wd.g[j + 1] = wd.g[j] + 2.0 * q(mid) * (wd.tau[j + 1] - wd.tau[j]);
    }
    return wd;
}

inline WindowData window_nodes_wvn(const ScalarPotential& q, double lo, double hi) {
    WindowData wd;
    double a = q.alpha;
    if (a <= 0 || hi <= q.tau0) {
        int nb = 256;
        wd.tau = linspace(lo, hi, nb + 1);
        accumulate_g(q, wd);
        return wd;
    }
    double start = std::max(lo, q.tau0);
    double A = std::pow(start, a), B = std::pow(hi, a);
    double P = B - A;
    double need = P / phase_per_subcell;
    if (need > max_subcells) {
        // asymptotic path: g(x) = (2/a)(Phi(x^a) - Phi(A)) with
        // Phi(y) = -cos(y) y^-gamma - gamma sin(y) y^-gamma-1
        wd.asymptotic = true;
        double gamma = (q.alpha + q.beta - 1.0) / q.alpha;
        double eps_amp = (2.0 / a) * std::pow(A, -gamma);
        wd.max_gtilde = 2.0 * eps_amp;
        if (gamma > 0.02 && eps_amp <= 0.5 && A > 10.0) {
            double inv_a = 1.0 / a;
            double PhiA = -std::cos(A) * std::pow(A, -gamma) -
                          gamma * std::sin(A) * std::pow(A, -gamma - 1.0);
            cplx O1 = osc_power_integral(1.0, gamma + 1.0 - inv_a, A, B).first;
            cplx O1b = osc_power_integral(1.0, gamma + 2.0 - inv_a, A, B).first;
            double I1 = (-O1.real() - gamma * O1b.imag()) / a;
            double s1 = 2.0 * gamma + 1.0 - inv_a;
            cplx C1 = osc_power_integral(2.0, s1, A, B).first;
            cplx C2 = osc_power_integral(2.0, s1 + 1.0, A, B).first;
            cplx C3 = osc_power_integral(2.0, s1 + 2.0, A, B).first;
            double I2 = (0.5 * power_integral(s1, A, B) + 0.5 * C1.real() + gamma * C2.imag() +
                         0.5 * gamma * gamma * power_integral(s1 + 2.0, A, B) -
                         0.5 * gamma * gamma * C3.real()) / a;
            double c = 2.0 / a;
            double ig = c * (I1 - 2.0 * PhiA);
            double ig2 = c * c * (I2 - 2.0 * PhiA * I1 + 2.0 * PhiA * PhiA);
            double s2 = std::max(ig2 - 0.5 * ig * ig, 0.0);
            wd.s2 = s2;
            wd.term = 2.0 * s2 + 0.25 * s2 * s2;
        } else {
            // amplitude does not decay: phase-averaged surrogate (lower bound flavor)
            double mid = 0.5 * (start + hi);
            double amp = (2.0 / a) * std::pow(mid, -a * gamma);
            wd.warn = true;
            if (amp > 600.0) {
                wd.term = 1e12;
                wd.s2 = 1e12;
            } else {
                double i0 = std::cyl_bessel_i(0.0, amp);
                wd.term = 4.0 * (i0 * i0 - 1.0);
                wd.s2 = amp * amp;  // int over the window of amp^2 cos^2 ~ amp^2
            }
            wd.max_gtilde = 2.0 * amp;
        }
        return wd;
    }
    int nb = std::max(64, (int)std::ceil(need));
    wd.tau.push_back(lo);
    if (lo < q.tau0 && q.tau0 < hi) wd.tau.push_back(q.tau0);
    double y0 = std::pow(std::max(lo, q.tau0), a);
    for (int j = 1; j <= nb; ++j) {
        double y = y0 + (B - y0) * double(j) / nb;
        double t = std::pow(y, 1.0 / a);
        if (t > wd.tau.back() + 1e-12) wd.tau.push_back(std::min(t, hi));
    }
    if (wd.tau.back() < hi) wd.tau.push_back(hi);
    accumulate_g(q, wd);
    return wd;
}

inline WindowData window_data(const ScalarPotential& q, double lo, double hi) {
    return q.kind == ScalarPotential::Kind::PiecewiseConstant ? window_nodes_pc(q, lo, hi)
                                                              : window_nodes_wvn(q, lo, hi);
}

// exp moments of the mean-removed piecewise-linear g over the window.
// Conventions: the stored g is 2 int q (so h = e^g); gtilde = g - <g>.
struct WindowMoments {
    double exp_plus = 0;   // int e^{gtilde}
    double exp_minus = 0;  // int e^{-gtilde}
    double s2 = 0;         // int gtilde^2
    double max_gtilde = 0;
};
inline WindowMoments window_moments(const WindowData& wd, double L) {
    WindowMoments m;
    if (wd.asymptotic) {
        m.s2 = wd.s2;
        m.max_gtilde = wd.max_gtilde;
        return m;
    }
    double mean = 0;
    for (size_t j = 0; j + 1 < wd.tau.size(); ++j)
        mean += 0.5 * (wd.g[j] + wd.g[j + 1]) * (wd.tau[j + 1] - wd.tau[j]);
    mean /= L;
    for (size_t j = 0; j + 1 < wd.tau.size(); ++j) {
        double d = wd.tau[j + 1] - wd.tau[j];
        double ga = wd.g[j] - mean, gb = wd.g[j + 1] - mean;
        m.exp_plus += d * exp_mean_linear(ga, gb);
        m.exp_minus += d * exp_mean_linear(-ga, -gb);
        m.s2 += d * (ga * ga + ga * gb + gb * gb) / 3.0;
        m.max_gtilde = std::max(m.max_gtilde, std::max(std::abs(ga), std::abs(gb)));
    }
    return m;
}

}  // namespace detail

// N0 solving J N0' + Q N0 = 0, N0(0) = I.  Closed forms for the scalar
// forms (diagonal Q -> cosh/sinh of g, antidiagonal Q -> diag(e^-g, e^g),
// g = int_0^tau q); fixed-step RK4 for general Q.
inline std::vector<Mat2> transfer_N0(const DiracPotential& Q, const std::vector<double>& stops) {
    detail::validate(Q);
    for (double s : stops)
        if (s < 0 || s > Q.tau_max) throw validation_error("transfer_N0: stop outside truncation");
    if (!std::is_sorted(stops.begin(), stops.end()))
        throw validation_error("transfer_N0: stops must be ascending");
    std::vector<Mat2> out;
    out.reserve(stops.size());

    if (Q.form != DiracForm::General) {
        const ScalarPotential& q = Q.scalar_q();
        // cumulative g via window machinery segment by segment
        double g = 0, at = 0;
        for (double s : stops) {
            if (s > at) {
                auto wd = detail::window_data(q, at, s);
                if (wd.asymptotic) {
                    // large-phase jump: integration by parts on sin(y) y^-gamma
                    double gamma = (q.alpha + q.beta - 1.0) / q.alpha;
                    double A = std::pow(std::max(at, q.tau0), q.alpha);
                    double B = std::pow(s, q.alpha);
                    if (at < q.tau0) g += 2.0 * q(q.tau0) * (std::min(s, q.tau0) - at);
                    g += (2.0 / q.alpha) * detail::osc_power_integral(1.0, gamma, A, B).first.imag();
                } else {
                    g += wd.g.back();
                }
                at = s;
            }
            double gh = 0.5 * g;  // stored g is 2 int q
            if (Q.form == DiracForm::Diagonal)
                out.push_back({std::cosh(gh), std::sinh(gh), std::sinh(gh), std::cosh(gh)});
            else
                out.push_back({std::exp(-gh), 0.0, 0.0, std::exp(gh)});
        }
        return out;
    }

    // general: RK4 on N' = (JQ) N, JQ = [[-q2, q1], [q1, q2]]; steps are
    // split at the breakpoints, q sampled just inside the current step
    Mat2 N = Mat2::identity();
    double at = 0;
    for (double s : stops) {
        if (s > at) {
            auto edges = detail::rk4_edges(Q, at, s, 0.005);
            for (size_t j = 0; j + 1 < edges.size(); ++j) {
                double lo = edges[j], h = edges[j + 1] - edges[j];
                double bias = std::min(1e-9, 0.25 * h);
                auto deriv = [&](double t, const Mat2& Nm) {
                    double tc = std::clamp(t, lo + bias, lo + h - bias);
                    Mat2 A{-Q.q2(tc), Q.q1(tc), Q.q1(tc), Q.q2(tc)};
                    return A * Nm;
                };
                Mat2 k1 = deriv(lo, N);
                Mat2 k2 = deriv(lo + h / 2, N + k1 * (h / 2));
                Mat2 k3 = deriv(lo + h / 2, N + k2 * (h / 2));
                Mat2 k4 = deriv(lo + h, N + k3 * h);
                N = N + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            }
            at = s;
        }
        out.push_back(N);
    }
    return out;
}

// Scalar-form criterion: terms int_n^{n+2} h * int_n^{n+2} 1/h - 4 with
// h = e^{2 int q}; exact per-cell exponential integration of the
// piecewise-linear g, phase-resolved or asymptotic for oscillatory q.
inline SzegoReport dirac_special_criterion(const DiracPotential& Q, int n_max) {
    detail::validate(Q);
    if (Q.form == DiracForm::General)
        throw validation_error("dirac_special_criterion requires a diagonal or antidiagonal form");
    const ScalarPotential& q = Q.scalar_q();
    int N = std::min<int>(n_max, (int)std::floor(Q.tau_max) - 2 + 1);
    if (N < 3) throw validation_error("dirac_special_criterion: truncation too short");
    SzegoReport rep;
    rep.terms.reserve(N);
    for (int n = 0; n < N; ++n) rep.partition.push_back(n);
    bool osc_warn = q.kind == ScalarPotential::Kind::WignerVonNeumann && q.alpha > 3.0;
    for (int n = 0; n < N; ++n) {
        auto wd = detail::window_data(q, n, n + 2.0);
        if (wd.asymptotic) {
            rep.terms.push_back(wd.term);
            ++rep.surrogate_windows;
        } else {
            auto m = detail::window_moments(wd, 2.0);
            rep.terms.push_back(m.exp_plus * m.exp_minus - 4.0);
        }
        osc_warn = osc_warn || wd.warn;
    }
    rep.resolution_warning = osc_warn;
    {
        std::ostringstream os;
        os << "windows [n, n+2], n < " << N << "; tau_max=" << Q.tau_max;
        rep.truncation_note = os.str();
    }
    detail::classify_series(rep);
    return rep;
}

// Matrix criterion terms det int_n^{n+2} N0^* N0 - 4 (the eikonal of
// H = N0^*N0 is T(tau) = tau, so the partition is the integer lattice).
// Unit determinant of N0 makes the terms computable window-locally.
inline SzegoReport dirac_szego_sum(const DiracPotential& Q, int n_max) {
    detail::validate(Q);
    int N = std::min<int>(n_max, (int)std::floor(Q.tau_max) - 2 + 1);
    if (N < 3) throw validation_error("dirac_szego_sum: truncation too short");
    SzegoReport rep;
    rep.terms.reserve(N);
    for (int n = 0; n < N; ++n) rep.partition.push_back(n);

    if (Q.form != DiracForm::General) {
        const ScalarPotential& q = Q.scalar_q();
        bool osc_warn = q.kind == ScalarPotential::Kind::WignerVonNeumann && q.alpha > 3.0;
        for (int n = 0; n < N; ++n) {
            auto wd = detail::window_data(q, n, n + 2.0);
            if (wd.asymptotic) {
                rep.terms.push_back(wd.term);  // det identity: same scalar form (Prop. route)
                ++rep.surrogate_windows;
                osc_warn = osc_warn || wd.warn;
                continue;
            }
            auto m = detail::window_moments(wd, 2.0);
            double det;
            if (Q.form == DiracForm::Diagonal) {
                // H = [[cosh 2g, sinh 2g], [sinh 2g, cosh 2g]]
                double ic = 0.5 * (m.exp_plus + m.exp_minus);
                double is = 0.5 * (m.exp_plus - m.exp_minus);
                det = ic * ic - is * is;
            } else {
                det = m.exp_plus * m.exp_minus;  // H = diag(e^{-g}, e^{g}), g = 2 int q
            }
            rep.terms.push_back(det - 4.0);
            osc_warn = osc_warn || wd.warn;
        }
        rep.resolution_warning = osc_warn;
        detail::classify_series(rep);
        return rep;
    }

    // general form: RK4 for the window-local N (steps split at breakpoints),
    // Simpson for int N^T N
    auto HO = [](const Mat2& M) {
        return SymMat2{M.a * M.a + M.c * M.c, M.b * M.b + M.d * M.d, M.a * M.b + M.c * M.d};
    };
    for (int n = 0; n < N; ++n) {
        Mat2 Nm = Mat2::identity();
        SymMat2 I{0, 0, 0};
        SymMat2 Hprev = HO(Nm);
        auto edges = detail::rk4_edges(Q, n, n + 2.0, 0.005);
        for (size_t j = 0; j + 1 < edges.size(); ++j) {
            double lo = edges[j], hh = edges[j + 1] - edges[j];
            double bias = std::min(1e-9, 0.25 * hh);
            auto deriv = [&](double t, const Mat2& Nc) {
                double tc = std::clamp(t, lo + bias, lo + hh - bias);
                Mat2 A{-Q.q2(tc), Q.q1(tc), Q.q1(tc), Q.q2(tc)};
                return A * Nc;
            };
            Mat2 k1 = deriv(lo, Nm);
            Mat2 k2 = deriv(lo + hh / 2, Nm + k1 * (hh / 2));
            Mat2 k3 = deriv(lo + hh / 2, Nm + k2 * (hh / 2));
            Mat2 k4 = deriv(lo + hh, Nm + k3 * hh);
            // midpoint via an RK4 half step
            Mat2 j2 = deriv(lo + hh / 4, Nm + k1 * (hh / 4));
            Mat2 j3 = deriv(lo + hh / 4, Nm + j2 * (hh / 4));
            Mat2 j4 = deriv(lo + hh / 2, Nm + j3 * (hh / 2));
            Mat2 Nmid = Nm + (k1 + j2 * 2.0 + j3 * 2.0 + j4) * (hh / 12.0);
            Nm = Nm + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (hh / 6.0);
            SymMat2 Hb = HO(Nm);
            I = I + (Hprev + HO(Nmid) * 4.0 + Hb) * (hh / 6.0);
            Hprev = Hb;
        }
        rep.terms.push_back(I.det() - 4.0);
    }
    detail::classify_series(rep);
    return rep;
}

// Open region A1 u A2 u A3 of Theorem-1.6 type; points on the bounding
// polyline are classified Boundary (membership indeterminate there).
inline RegionVerdict wvn_region(double alpha, double beta) {
    RegionVerdict v;
    bool on_boundary = (alpha <= 0 && beta - alpha == 0.5) ||
                       (alpha >= 0 && alpha <= 1 && beta == 0.5) ||
                       (alpha >= 1 && alpha + beta == 1.5);
    if (on_boundary) {
        v.region = WvnRegion::Boundary;
        return v;
    }
    if (alpha <= 0 && beta - alpha > 0.5) {
        v.region = WvnRegion::A1;
        v.in_szego_class = true;
    } else if (alpha > 0 && alpha < 1 && beta > 0.5) {
        v.region = WvnRegion::A2;
        v.in_szego_class = true;
    } else if (alpha >= 1 && alpha + beta > 1.5) {
        v.region = WvnRegion::A3;
        v.in_szego_class = true;
    } else {
        v.region = WvnRegion::Outside;
        v.in_szego_class = false;
    }
    return v;
}

// Partial sums of the scalar criterion for q = sin(tau^alpha)/tau^beta.
inline SzegoReport wvn_numeric_check(double alpha, double beta, int n_max, double tau0 = 1.0) {
    DiracPotential Q = DiracPotential::diagonal(ScalarPotential::wvn(alpha, beta, tau0),
                                                double(n_max) + 2.0);
    return dirac_special_criterion(Q, n_max);
}

// Dispersion criterion: terms int_n^{n+2} gtilde_n^2, applicable when
// ||g_n||_inf tends to zero on the window.
inline SzegoReport dispersion_criterion(const DiracPotential& Q, int n_max) {
    detail::validate(Q);
    if (Q.form == DiracForm::General)
        throw validation_error("dispersion_criterion requires a scalar form");
    const ScalarPotential& q = Q.scalar_q();
    int N = std::min<int>(n_max, (int)std::floor(Q.tau_max) - 2 + 1);
    if (N < 3) throw validation_error("dispersion_criterion: truncation too short");
    SzegoReport rep;
    std::vector<double> maxg(N);
    for (int n = 0; n < N; ++n) {
        rep.partition.push_back(n);
        auto wd = detail::window_data(q, n, n + 2.0);
        auto m = detail::window_moments(wd, 2.0);
        rep.terms.push_back(m.s2);
        maxg[n] = m.max_gtilde;
        if (wd.asymptotic) ++rep.surrogate_windows;
        rep.resolution_warning = rep.resolution_warning || wd.warn;
    }
    double tail_max = 0;
    for (int n = std::max(0, N - std::max(1, N / 10)); n < N; ++n)
        tail_max = std::max(tail_max, maxg[n]);
    rep.applicable = tail_max <= 0.2;
    detail::classify_series(rep);
    if (!rep.applicable)
        rep.reason += " [not applicable: ||g_n||_inf does not vanish]";
    return rep;
}

// Korey's mean-oscillation estimate: <e^f><e^-f> = 1 + eps implies
// <|f - <f>|> <= c sqrt(eps); reports the measured ratio.
inline KoreyResult korey_check(const std::vector<double>& x, const std::vector<double>& f) {
    if (x.size() != f.size() || x.size() < 2)
        throw validation_error("korey_check: need matching sample arrays");
    double L = x.back() - x.front();
    if (!(L > 0)) throw validation_error("korey_check: degenerate interval");
    std::vector<double> ef(f.size()), emf(f.size());
    for (size_t i = 0; i < f.size(); ++i) {
        ef[i] = std::exp(f[i]);
        emf[i] = std::exp(-f[i]);
    }
    double mean_f = trapezoid(x, f) / L;
    double me = trapezoid(x, ef) / L;
    double mm = trapezoid(x, emf) / L;
    std::vector<double> dev(f.size());
    for (size_t i = 0; i < f.size(); ++i) dev[i] = std::abs(f[i] - mean_f);
    KoreyResult r;
    r.eps = me * mm - 1.0;
    r.lhs = trapezoid(x, dev) / L;
    r.in_range = r.eps <= 1.0;
    r.bound_ratio = r.eps > 1e-30 ? r.lhs / std::sqrt(r.eps) : 0.0;
    return r;
}

}  // namespace kw
