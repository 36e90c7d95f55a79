// Canonical Hamiltonian systems J Theta' = z H Theta: transfer-matrix
// integration, eikonal T / L_eta, the determinant-sum Szego criterion, and
// the Weyl-Titchmarsh function.
#pragma once

#include "kw/common.hpp"
#include "kw/report.hpp"

namespace kw {

// Piecewise-constant Hamiltonian on [0, tau_max); breaks[k] is the start of
// cell k, breaks[0] = 0.  extend_last_cell is the declared tail assumption
// standing in for the singularity condition int trace = inf.
struct Hamiltonian {
    std::vector<double> breaks;
    std::vector<SymMat2> cells;
    double tau_max = 0;
    bool extend_last_cell = true;
};

struct TransferState {
    cplx theta_p, theta_m;  // Theta = (Theta^+, Theta^-), Theta(0) = (1, 0)
    cplx phi_p, phi_m;      // Phi(0) = (0, 1)
    double tau = 0;
    cplx z = 0;

    cplx wronskian() const { return theta_p * phi_m - theta_m * phi_p; }
};

struct WeylResult {
    cplx m;
    double residual = 0;   // |m(tau_max) - m(tau_max/2)|
    bool stabilized = true;
};

namespace detail {

inline bool rank_one(const SymMat2& c) {
    return c.det() <= 1e-12 * sqr(c.trace());
}

inline void validate(const Hamiltonian& H) {
    if (H.cells.empty() || H.breaks.size() != H.cells.size())
        throw validation_error("hamiltonian: breaks/cells mismatch");
    if (H.breaks.front() != 0) throw validation_error("hamiltonian: breaks must start at 0");
    if (!strictly_increasing(H.breaks) || !(H.breaks.back() < H.tau_max))
        throw validation_error("hamiltonian: breaks must increase and stay below tau_max");
    for (const SymMat2& c : H.cells) {
        if (!(c.trace() > 0)) throw validation_error("hamiltonian: cell trace must be > 0");
        if (c.det() < -1e-10 * sqr(c.trace()))
            throw validation_error("hamiltonian: cell must be positive semidefinite");
    }
    // nontrivial: not a constant-direction rank-one multiple throughout
    bool all_rank_one = true;
    for (const SymMat2& c : H.cells) all_rank_one = all_rank_one && rank_one(c);
    if (all_rank_one) {
        const SymMat2& a = H.cells.front();
        bool same_dir = true;
        for (const SymMat2& c : H.cells) {
            // parallel rank-one directions <=> a*c is symmetric-rank-one aligned
            double cross = a.h1 * c.h2 + a.h2 * c.h1 - 2.0 * a.h * c.h;
            same_dir = same_dir && std::abs(cross) <= 1e-10 * a.trace() * c.trace();
        }
        if (same_dir)
            throw validation_error("hamiltonian: trivial (constant-direction rank-one)");
    }
}

struct CMat2 {
    cplx a, b, c, d;
    CMat2 operator*(const CMat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

// exp(dtau * A) with A = -zJH (trace-free, A^2 = -omega^2 I, omega = z sqrt(det H)):
// exp = cos(omega dtau) I + dtau sinc(omega dtau) A.  Exact for every cell,
// including det H = 0.
inline CMat2 cell_propagator(const SymMat2& Hc, cplx z, double dtau) {
    double det = std::max(Hc.det(), 0.0);
    cplx omega = z * std::sqrt(det);
    cplx cs = std::cos(omega * dtau);
    cplx sc = dtau * sinc(omega * dtau);
    cplx a11 = z * Hc.h, a12 = z * Hc.h2, a21 = -z * Hc.h1, a22 = -z * Hc.h;
    return {cs + sc * a11, sc * a12, sc * a21, cs + sc * a22};
}

// Prefix data for eikonal and window integrals.
struct Prefix {
    std::vector<double> tau;     // cell boundaries, size K+1 (ends at tau_max)
    std::vector<double> T;       // eikonal at boundaries
    std::vector<SymMat2> I;      // int_0^tau H at boundaries
    const Hamiltonian* H = nullptr;

    static Prefix build(const Hamiltonian& H) {
        validate(H);
        size_t K = H.cells.size();
        Prefix p;
        p.H = &H;
        p.tau.resize(K + 1);
        p.T.resize(K + 1);
        p.I.resize(K + 1);
        p.tau[0] = 0;
        p.T[0] = 0;
        p.I[0] = {0, 0, 0};
        for (size_t k = 0; k < K; ++k) {
            double hi = (k + 1 < K) ? H.breaks[k + 1] : H.tau_max;
            double len = hi - H.breaks[k];
            p.tau[k + 1] = hi;
            p.T[k + 1] = p.T[k] + std::sqrt(std::max(H.cells[k].det(), 0.0)) * len;
            p.I[k + 1] = p.I[k] + H.cells[k] * len;
        }
        return p;
    }

    size_t cell_index(double t) const {
        auto it = std::upper_bound(tau.begin(), tau.end(), t);
        size_t k = (size_t)std::max<ptrdiff_t>(1, it - tau.begin()) - 1;
        return std::min(k, tau.size() - 2);
    }

    double eikonal(double t) const {
        size_t k = cell_index(t);
        return T[k] + std::sqrt(std::max(H->cells[k].det(), 0.0)) * (t - tau[k]);
    }

    // min{tau: T(tau) = eta}; +inf when unreached before tau_max
    double eikonal_inverse(double eta) const {
        if (eta <= 0) return 0;
        if (eta > T.back()) return inf;
        auto it = std::lower_bound(T.begin(), T.end(), eta);
        size_t k = (size_t)(it - T.begin());
        if (T[k] == eta) {
            // exact hit at a boundary: the min is the start of the flat run
            while (k > 0 && T[k - 1] == eta) --k;
            return tau[k];
        }
        --k;  // T[k] < eta < T[k+1]
        double slope = std::sqrt(std::max(H->cells[k].det(), 0.0));
        return tau[k] + (eta - T[k]) / slope;
    }

    SymMat2 integral(double a, double b) const {
        size_t ka = cell_index(a), kb = cell_index(b);
        SymMat2 full = I[kb] + H->cells[kb] * (b - tau[kb]);
        SymMat2 head = I[ka] + H->cells[ka] * (a - tau[ka]);
        return full + head * -1.0;
    }
};

}  // namespace detail

// T(tau) = int_0^tau sqrt(det H).
inline double eikonal(const Hamiltonian& H, double tau) {
    auto p = detail::Prefix::build(H);
    if (tau < 0 || tau > H.tau_max) throw validation_error("eikonal: tau outside [0, tau_max]");
    return p.eikonal(tau);
}

inline double eikonal_inverse(const Hamiltonian& H, double eta) {
    auto p = detail::Prefix::build(H);
    return p.eikonal_inverse(eta);
}

// Theta and Phi at each stop (stops ascending within [0, tau_max]); within a
// constant cell the exact matrix exponential of -zJH is used.
inline std::vector<TransferState> integrate_transfer(const Hamiltonian& H, cplx z,
                                                     const std::vector<double>& stops) {
    detail::validate(H);
    for (double s : stops)
        if (s < 0 || s > H.tau_max)
            throw validation_error("integrate_transfer: stop outside [0, tau_max]");
    if (!std::is_sorted(stops.begin(), stops.end()))
        throw validation_error("integrate_transfer: stops must be ascending");

    std::vector<TransferState> out;
    out.reserve(stops.size());
    cplx th_p = 1, th_m = 0, ph_p = 0, ph_m = 1;
    double tau = 0;
    size_t k = 0;
    auto cell_end = [&](size_t j) {
        return (j + 1 < H.cells.size()) ? H.breaks[j + 1] : H.tau_max;
    };
    auto advance_to = [&](double target) {
        while (tau < target) {
            while (k + 1 < H.cells.size() && H.breaks[k + 1] <= tau) ++k;
            double stop = std::min(target, cell_end(k));
            double d = stop - tau;
            if (d > 0) {
                auto E = detail::cell_propagator(H.cells[k], z, d);
                cplx tp = E.a * th_p + E.b * th_m, tm = E.c * th_p + E.d * th_m;
                cplx pp = E.a * ph_p + E.b * ph_m, pm = E.c * ph_p + E.d * ph_m;
                th_p = tp; th_m = tm; ph_p = pp; ph_m = pm;
            }
            tau = stop;
        }
    };
    for (double s : stops) {
        advance_to(s);
        out.push_back({th_p, th_m, ph_p, ph_m, s, z});
    }
    return out;
}

// Determinant-sum criterion over windows [L_{alpha_n}, L_{alpha_{n+2}}]:
// terms det int H - (alpha_{n+2} - alpha_n)^2.
inline SzegoReport szego_sum(const Hamiltonian& H, const std::vector<double>& partition) {
    auto p = detail::Prefix::build(H);
    if (partition.size() < 3) throw validation_error("szego_sum: partition needs >= 3 points");
    if (!(partition.front() >= 0) || !strictly_increasing(partition))
        throw validation_error("szego_sum: partition must be nonnegative and increasing");
    double gmin = inf, gmax = 0;
    for (size_t i = 0; i + 1 < partition.size(); ++i) {
        double g = partition[i + 1] - partition[i];
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
    }
    if (!(gmin > 0) || gmax / gmin > 1e3)
        throw validation_error("szego_sum: partition spacing violates 0 < C1 <= gap <= C2");

    SzegoReport rep;
    rep.partition = partition;
    std::vector<double> L(partition.size());
    for (size_t i = 0; i < partition.size(); ++i) L[i] = p.eikonal_inverse(partition[i]);

    double det_tail = H.extend_last_cell ? std::max(H.cells.back().det(), 0.0) : 0.0;
    bool saturated = det_tail <= 0 && partition.back() > p.T.back();

    size_t nterms = 0;
    while (nterms + 2 < partition.size() && L[nterms + 2] < inf) ++nterms;
    rep.terms.reserve(nterms);
    for (size_t n = 0; n < nterms; ++n) {
        SymMat2 M = p.integral(L[n], L[n + 2]);
        rep.terms.push_back(M.det() - sqr(partition[n + 2] - partition[n]));
    }
    {
        std::ostringstream os;
        os << "truncated at tau_max=" << H.tau_max
           << (H.extend_last_cell ? "; tail: last cell extended" : "; tail: none declared");
        rep.truncation_note = os.str();
    }
    if (saturated) {
        detail::classify_series(rep);  // fill sums/diagnostics
        rep.verdict = Verdict::NotSzego;
        rep.reason = "sqrt(det H) in L1 on the window (eikonal saturates before the partition ends)";
        return rep;
    }
    if (nterms < 2)
        throw validation_error("szego_sum: fewer than 2 windows fit below tau_max");
    detail::classify_series(rep);
    return rep;
}

// Titchmarsh-Weyl function m(z) = lim Phi^-/Theta^-.  The truncation is
// closed with the exact Weyl solution of the constant tail cell when that
// cell has det > 0; otherwise the raw ratio is used with tau_max doubling.
inline WeylResult weyl_m(const Hamiltonian& H, cplx z, double eps_min = 1e-6,
                         double rel_tol = 1e-6) {
    detail::validate(H);
    if (!(z.imag() >= eps_min)) throw validation_error("weyl_m: Im z below eps_min");

    const SymMat2 tail = H.cells.back();
    bool closable = H.extend_last_cell && tail.h1 > 1e-14 && tail.det() > 1e-14;

    auto m_at = [&](double tau_end) -> cplx {
        // scaled propagation of (Theta, Phi) to tau_end (tail extension allowed)
        cplx th_p = 1, th_m = 0, ph_p = 0, ph_m = 1;
        double tau = 0;
        size_t K = H.cells.size();
        for (size_t k = 0; k < K && tau < tau_end; ++k) {
            double hi = (k + 1 < K) ? H.breaks[k + 1] : H.tau_max;
            if (k + 1 == K) hi = std::max(hi, tau_end);  // extend last cell
            double stop = std::min(hi, tau_end);
            double d = stop - tau;
            if (d > 0) {
                auto E = detail::cell_propagator(H.cells[k], z, d);
                cplx tp = E.a * th_p + E.b * th_m, tm = E.c * th_p + E.d * th_m;
                cplx pp = E.a * ph_p + E.b * ph_m, pm = E.c * ph_p + E.d * ph_m;
                th_p = tp; th_m = tm; ph_p = pp; ph_m = pm;
                double mx = std::max(std::max(std::abs(th_p), std::abs(th_m)),
                                     std::max(std::abs(ph_p), std::abs(ph_m)));
                if (mx > 1e100) {
                    double inv = 1.0 / mx;
                    th_p *= inv; th_m *= inv; ph_p *= inv; ph_m *= inv;
                }
            }
            tau = stop;
        }
        // the tail cell at tau_end is the last cell whenever tau_end >= breaks.back()
        const SymMat2& tc = H.cells[std::min(K - 1, (size_t)(std::upper_bound(H.breaks.begin(), H.breaks.end(), tau_end) - H.breaks.begin()) - 1)];
        if (closable && tc.h1 > 1e-14 && tc.det() > 1e-14) {
            cplx iw = cplx(tc.h, std::sqrt(tc.det()));
            return (tc.h1 * ph_p + iw * ph_m) / (tc.h1 * th_p + iw * th_m);
        }
        return ph_m / th_m;
    };

    WeylResult res;
    if (closable) {
        cplx prev = m_at(H.tau_max / 2);
        res.m = m_at(H.tau_max);
        res.residual = std::abs(res.m - prev);
        res.stabilized = res.residual <= rel_tol * std::max(1.0, std::abs(res.m));
        return res;
    }
    cplx prev = m_at(H.tau_max);
    for (int k = 1; k <= 16; ++k) {
        cplx cur = m_at(H.tau_max * std::pow(2.0, k));
        res.residual = std::abs(cur - prev);
        res.m = cur;
        if (res.residual <= rel_tol * std::max(1.0, std::abs(cur))) {
            res.stabilized = true;
            return res;
        }
        prev = cur;
    }
    res.stabilized = false;
    return res;
}

}  // namespace kw
