// Krein strings [M, L]: bijection to diagonal canonical systems, eikonal and
// wavefront, the string Szego criterion, transfer matrices phi/psi, the
// Titchmarsh-Weyl q, spectral density estimation, and the generalized
// Fourier transform.
#pragma once

#include "kw/canonical.hpp"
#include "kw/measures.hpp"

namespace kw {

struct StringAtom {
    double xi = 0;
    double m = 0;
};

// Piecewise-constant density plus point masses.  Pieces: density[j] on
// [density_breaks[j], density_breaks[j+1]); beyond the last break the density
// continues with its last value (the declared tail assumption).
struct MassDistribution {
    std::vector<double> density_breaks;  // starts at 0, strictly increasing
    std::vector<double> density;         // size = breaks - 1
    std::vector<StringAtom> atoms;       // ascending xi, 0 <= xi < xi_max
    double length = inf;                 // L
    double xi_max = 0;                   // computational truncation
};

struct StringTransfer {
    cplx phi, dphi;  // phi(xi, z), left derivative phi'(xi-)
    cplx psi, dpsi;
    double xi = 0;
    cplx z = 0;

    cplx wronskian() const { return phi * dpsi - psi * dphi; }
};

struct TwResult {
    cplx q;
    double residual = 0;
    bool stabilized = true;
};

struct DensityEstimate {
    SpectralMeasure sigma;            // half-line estimate Im q(l+ie)/pi
    std::vector<int> peak_flags;      // grid indices flagged as unresolved atoms
    double max_residual = 0;          // worst Weyl stabilization residual seen
    bool truncation_warning = false;
};

namespace detail {

inline void validate(const MassDistribution& M) {
    if (M.density_breaks.size() < 2 || M.density.size() + 1 != M.density_breaks.size())
        throw validation_error("string: density breaks/values mismatch");
    if (M.density_breaks.front() != 0 || !strictly_increasing(M.density_breaks))
        throw validation_error("string: breaks must start at 0 and increase");
    for (double r : M.density)
        if (!(r >= 0)) throw validation_error("string: density must be >= 0");
    if (!(M.xi_max > 0) || M.xi_max > M.length)
        throw validation_error("string: need 0 < xi_max <= L");
    if (M.density_breaks.back() > M.xi_max)
        throw validation_error("string: declared pieces must not pass xi_max");
    double prev = -1;
    for (const StringAtom& a : M.atoms) {
        if (!(a.m > 0)) throw validation_error("string: atom masses must be > 0");
        if (a.xi < 0 || a.xi >= M.xi_max)
            throw validation_error("string: atoms must satisfy 0 <= xi < xi_max");
        if (a.xi <= prev) throw validation_error("string: atoms must be strictly ascending");
        prev = a.xi;
    }
    // left end heavy: mass accumulates immediately
    bool left_heavy = M.density.front() > 0 || (!M.atoms.empty() && M.atoms.front().xi == 0);
    if (!left_heavy) throw validation_error("string: improper pair (left end carries no mass)");
}

// Segment decomposition of [0, xi_max]: constant-density stretches split at
// breaks and atom positions; atom masses sit at segment starts.
struct StringPrefix {
    std::vector<double> xi;    // segment boundaries, size S+1, ends at xi_max
    std::vector<double> rho;   // density per segment, size S
    std::vector<double> atom;  // atom mass at boundary xi[i] (0 when none), size S+1
    std::vector<double> M;     // cumulative mass at boundaries (right-continuous)
    std::vector<double> T;     // eikonal at boundaries
    double rho_tail = 0;

    static StringPrefix build(const MassDistribution& md) {
        validate(md);
        StringPrefix p;
        std::vector<double> cuts = md.density_breaks;
        for (const StringAtom& a : md.atoms) cuts.push_back(a.xi);
        cuts.push_back(md.xi_max);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end(),
                               [](double a, double b) { return a == b; }),
                   cuts.end());
        while (!cuts.empty() && cuts.back() > md.xi_max) cuts.pop_back();
        p.xi = cuts;
        size_t S = p.xi.size() - 1;
        p.rho.resize(S);
        p.atom.assign(S + 1, 0.0);
        for (const StringAtom& a : md.atoms) {
            auto it = std::lower_bound(p.xi.begin(), p.xi.end(), a.xi);
            p.atom[it - p.xi.begin()] += a.m;
        }
        for (size_t s = 0; s < S; ++s) {
            double x = p.xi[s];
            auto it = std::upper_bound(md.density_breaks.begin(), md.density_breaks.end(), x);
            size_t j = (size_t)std::max<ptrdiff_t>(1, it - md.density_breaks.begin()) - 1;
            p.rho[s] = j < md.density.size() ? md.density[j] : md.density.back();
        }
        p.rho_tail = md.density.back();
        p.M.resize(S + 1);
        p.T.resize(S + 1);
        p.M[0] = p.atom[0];
        p.T[0] = 0;
        for (size_t s = 0; s < S; ++s) {
            double len = p.xi[s + 1] - p.xi[s];
            p.M[s + 1] = p.M[s] + p.rho[s] * len + p.atom[s + 1];
            p.T[s + 1] = p.T[s] + std::sqrt(p.rho[s]) * len;
        }
        return p;
    }

    size_t segment(double x) const {
        auto it = std::upper_bound(xi.begin(), xi.end(), x);
        size_t s = (size_t)std::max<ptrdiff_t>(1, it - xi.begin()) - 1;
        return std::min(s, xi.size() - 2);
    }

    double mass_at(double x) const {  // M(x), right-continuous
        size_t s = segment(x);
        double m = M[s] + rho[s] * (x - xi[s]);
        if (s + 1 < xi.size() && x >= xi[s + 1]) m += atom[s + 1];  // x == xi_max
        return m;
    }

    double eikonal(double x) const {
        size_t s = segment(x);
        return T[s] + std::sqrt(rho[s]) * (x - xi[s]);
    }

    double eikonal_inverse(double eta) const {
        if (eta <= 0) return 0;
        if (eta > T.back()) return inf;
        auto it = std::lower_bound(T.begin(), T.end(), eta);
        size_t s = (size_t)(it - T.begin());
        if (T[s] == eta) {
            while (s > 0 && T[s - 1] == eta) --s;
            return xi[s];
        }
        --s;
        return xi[s] + (eta - T[s]) / std::sqrt(rho[s]);
    }
};

// One constant-density step for (f, f'): f'' = -z rho f.
inline void string_cell_step(cplx z, double rho, double len, cplx& f, cplx& df) {
    cplx omega = std::sqrt(z * rho);
    cplx c = std::cos(omega * len);
    cplx s = len * sinc(omega * len);
    cplx f1 = c * f + s * df;
    cplx d1 = -omega * std::sin(omega * len) * f + c * df;
    f = f1;
    df = d1;
}

}  // namespace detail

inline double string_mass(const MassDistribution& M, double xi) {
    auto p = detail::StringPrefix::build(M);
    if (xi < 0 || xi > M.xi_max) throw validation_error("string_mass: xi outside truncation");
    return p.mass_at(xi);
}

inline double string_eikonal(const MassDistribution& M, double xi) {
    auto p = detail::StringPrefix::build(M);
    if (xi < 0 || xi > M.xi_max) throw validation_error("string_eikonal: xi outside truncation");
    return p.eikonal(xi);
}

inline double string_eikonal_inverse(const MassDistribution& M, double eta) {
    auto p = detail::StringPrefix::build(M);
    return p.eikonal_inverse(eta);
}

// Predicted wavefront: f_t = L^(S)_{T^(S)(front0) + t}.
inline double wavefront(const MassDistribution& M, double front0, double t) {
    auto p = detail::StringPrefix::build(M);
    if (!(t >= 0)) throw validation_error("wavefront: t must be >= 0");
    if (!(front0 > 0 && front0 <= M.xi_max))
        throw validation_error("wavefront: front0 must lie in (0, xi_max]");
    return p.eikonal_inverse(p.eikonal(front0) + t);
}

// Bijection [M, L] -> diag(h2, h1) with unit trace: a density piece rho over
// d(xi) becomes a cell diag(rho, 1)/(1+rho) of tau-length (1+rho) d(xi); an
// atom of mass m becomes an indivisible cell diag(1, 0) of tau-length m.
inline Hamiltonian string_to_hamiltonian(const MassDistribution& M) {
    auto p = detail::StringPrefix::build(M);
    Hamiltonian H;
    double tau = 0;
    auto push = [&H, &tau](const SymMat2& c, double len) {
        if (len <= 0) return;
        if (!H.cells.empty()) {
            const SymMat2& b = H.cells.back();
            if (b.h1 == c.h1 && b.h2 == c.h2 && b.h == c.h) {
                tau += len;
                return;
            }
        }
        H.breaks.push_back(tau);
        H.cells.push_back(c);
        tau += len;
    };
    for (size_t s = 0; s + 1 < p.xi.size(); ++s) {
        if (p.atom[s] > 0) push({1.0, 0.0, 0.0}, p.atom[s]);
        double rho = p.rho[s];
        double len = (p.xi[s + 1] - p.xi[s]) * (1.0 + rho);
        push({rho / (1.0 + rho), 1.0 / (1.0 + rho), 0.0}, len);
    }
    if (p.atom.back() > 0) push({1.0, 0.0, 0.0}, p.atom.back());
    H.tau_max = tau;
    H.extend_last_cell = M.length == inf;
    return H;
}

// Inverse bijection for diagonal unit-trace Hamiltonians.
inline MassDistribution hamiltonian_to_string(const Hamiltonian& H) {
    detail::validate(H);
    MassDistribution M;
    M.density_breaks.push_back(0);
    double xi = 0;
    std::vector<StringAtom> atoms;
    size_t K = H.cells.size();
    for (size_t k = 0; k < K; ++k) {
        const SymMat2& c = H.cells[k];
        if (std::abs(c.h) > 1e-12 * c.trace())
            throw validation_error("hamiltonian_to_string: Hamiltonian must be diagonal");
        if (std::abs(c.trace() - 1.0) > 1e-9)
            throw validation_error("hamiltonian_to_string: cells must have unit trace");
        double hi = (k + 1 < K) ? H.breaks[k + 1] : H.tau_max;
        double len = hi - H.breaks[k];
        double b = c.h2;  // string h1
        if (b > 1e-14) {
            double rho = c.h1 / c.h2;
            double xlen = b * len;
            if (!M.density.empty() && M.density.back() == rho) {
                M.density_breaks.back() += xlen;
            } else {
                M.density.push_back(rho);
                M.density_breaks.push_back(M.density_breaks.back() + xlen);
            }
            xi += xlen;
        } else {
            double m = c.h1 * len;
            if (!atoms.empty() && atoms.back().xi == xi)
                atoms.back().m += m;
            else
                atoms.push_back({xi, m});
        }
    }
    M.atoms = std::move(atoms);
    M.xi_max = xi;
    M.length = H.extend_last_cell ? inf : xi;
    if (M.density.empty())
        throw validation_error("hamiltonian_to_string: no density cells (improper string)");
    return M;
}

// phi, psi and their left derivatives at xi.  Atoms at positions < xi apply
// the jump f' <- f' - z m f; an atom exactly at xi is not applied.
inline StringTransfer string_transfer(const MassDistribution& M, double xi, cplx z) {
    auto p = detail::StringPrefix::build(M);
    if (xi < 0 || xi > M.xi_max) throw validation_error("string_transfer: xi outside truncation");
    cplx phi = 1, dphi = 0, psi = 0, dpsi = 1;
    for (size_t s = 0; s + 1 < p.xi.size() && p.xi[s] < xi; ++s) {
        if (p.atom[s] > 0 && p.xi[s] < xi) {
            dphi -= z * p.atom[s] * phi;
            dpsi -= z * p.atom[s] * psi;
        }
        double stop = std::min(xi, p.xi[s + 1]);
        double len = stop - p.xi[s];
        if (len > 0) {
            detail::string_cell_step(z, p.rho[s], len, phi, dphi);
            detail::string_cell_step(z, p.rho[s], len, psi, dpsi);
        }
    }
    return {phi, dphi, psi, dpsi, xi, z};
}

// phi at a batch of ascending positions, for one z (spectral synthesis).
inline std::vector<cplx> string_phi_profile(const MassDistribution& M,
                                            const std::vector<double>& positions, cplx z) {
    auto p = detail::StringPrefix::build(M);
    if (!std::is_sorted(positions.begin(), positions.end()))
        throw validation_error("string_phi_profile: positions must be ascending");
    if (!positions.empty() && (positions.front() < 0 || positions.back() > M.xi_max))
        throw validation_error("string_phi_profile: positions outside truncation");
    std::vector<cplx> out(positions.size());
    cplx phi = 1, dphi = 0;
    double x = 0;
    size_t i = 0;
    for (size_t s = 0; s + 1 < p.xi.size() && i < positions.size(); ++s) {
        if (p.atom[s] > 0) dphi -= z * p.atom[s] * phi;  // phi itself is continuous
        double seg_end = p.xi[s + 1];
        double rho = p.rho[s];
        while (i < positions.size() && positions[i] <= seg_end) {
            double len = positions[i] - x;
            if (len > 0) {
                detail::string_cell_step(z, rho, len, phi, dphi);
                x = positions[i];
            }
            out[i++] = phi;
        }
        if (x < seg_end) {
            detail::string_cell_step(z, rho, seg_end - x, phi, dphi);
            x = seg_end;
        }
    }
    return out;
}

// Principal Titchmarsh-Weyl function q(z) = lim psi/phi, closed at the
// truncation with the exact constant-tail Weyl solution when rho_tail > 0.
inline TwResult string_tw_function(const MassDistribution& M, cplx z, double eps_min = 1e-9,
                                   double rel_tol = 1e-6) {
    auto p = detail::StringPrefix::build(M);
    double dist = z.real() >= 0 ? std::abs(z.imag()) : std::abs(z);
    if (!(dist >= eps_min)) throw validation_error("string_tw_function: z too close to R+");

    auto q_at = [&](double xi_end) -> cplx {
        cplx phi = 1, dphi = 0, psi = 0, dpsi = 1;
        double x = 0;
        for (size_t s = 0; s + 1 < p.xi.size() && x < xi_end; ++s) {
            if (p.atom[s] > 0) {
                dphi -= z * p.atom[s] * phi;
                dpsi -= z * p.atom[s] * psi;
            }
            double stop = std::min(xi_end, p.xi[s + 1]);
            double len = stop - x;
            if (len > 0) {
                detail::string_cell_step(z, p.rho[s], len, phi, dphi);
                detail::string_cell_step(z, p.rho[s], len, psi, dpsi);
            }
            x = stop;
            double mx = std::max({std::abs(phi), std::abs(dphi), std::abs(psi), std::abs(dpsi)});
            if (mx > 1e100) {
                double inv = 1.0 / mx;
                phi *= inv; dphi *= inv; psi *= inv; dpsi *= inv;
            }
        }
        if (x < xi_end && p.rho_tail > 0) {
            detail::string_cell_step(z, p.rho_tail, xi_end - x, phi, dphi);
            detail::string_cell_step(z, p.rho_tail, xi_end - x, psi, dpsi);
        }
        double rho_loc = xi_end >= p.xi.back() ? p.rho_tail : p.rho[p.segment(xi_end)];
        if (rho_loc > 0 && M.length == inf) {
            cplx iw = cplx(0, 1) * std::sqrt(z * rho_loc);
            return (dpsi - iw * psi) / (dphi - iw * phi);
        }
        return psi / phi;
    };

    TwResult res;
    if (p.rho_tail > 0 && M.length == inf) {
        cplx prev = q_at(M.xi_max / 2);
        res.q = q_at(M.xi_max);
        res.residual = std::abs(res.q - prev);
        res.stabilized = res.residual <= rel_tol * std::max(1.0, std::abs(res.q));
        return res;
    }
    cplx prev = q_at(M.xi_max);
    for (int k = 1; k <= 16; ++k) {
        cplx cur = q_at(M.xi_max * std::pow(2.0, k));
        res.residual = std::abs(cur - prev);
        res.q = cur;
        if (res.residual <= rel_tol * std::max(1.0, std::abs(cur))) {
            res.stabilized = true;
            return res;
        }
        prev = cur;
    }
    res.stabilized = false;
    return res;
}

// Szego criterion for strings (Theorem-style determinant form on the mass
// distribution): terms (xi_{n+2}-xi_n)(M(xi_{n+2})-M(xi_n)) - (eta_{n+2}-eta_n)^2.
inline SzegoReport string_szego_criterion(const MassDistribution& M,
                                          const std::vector<double>& eta_grid) {
    auto p = detail::StringPrefix::build(M);
    if (eta_grid.size() < 3)
        throw validation_error("string_szego_criterion: eta grid needs >= 3 points");
    if (!(eta_grid.front() >= 0) || !strictly_increasing(eta_grid))
        throw validation_error("string_szego_criterion: eta grid must be nonnegative and increasing");
    double gmin = inf, gmax = 0;
    for (size_t i = 0; i + 1 < eta_grid.size(); ++i) {
        double g = eta_grid[i + 1] - eta_grid[i];
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
    }
    if (!(gmin > 0) || gmax / gmin > 1e3)
        throw validation_error("string_szego_criterion: eta spacing violates c1 <= gap <= c2");

    SzegoReport rep;
    rep.partition = eta_grid;
    std::vector<double> xi(eta_grid.size());
    for (size_t i = 0; i < eta_grid.size(); ++i) xi[i] = p.eikonal_inverse(eta_grid[i]);

    bool saturating_tail = !(p.rho_tail > 0) || M.length < inf;
    bool saturated = saturating_tail && eta_grid.back() > p.T.back();

    size_t nterms = 0;
    while (nterms + 2 < eta_grid.size() && xi[nterms + 2] < inf) ++nterms;
    for (size_t n = 0; n < nterms; ++n) {
        double dxi = xi[n + 2] - xi[n];
        double dM = p.mass_at(xi[n + 2]) - p.mass_at(xi[n]);
        rep.terms.push_back(dxi * dM - sqr(eta_grid[n + 2] - eta_grid[n]));
    }
    {
        std::ostringstream os;
        os << "truncated at xi_max=" << M.xi_max << "; tail: rho continues with " << p.rho_tail;
        rep.truncation_note = os.str();
    }
    if (saturated) {
        detail::classify_series(rep);
        rep.verdict = Verdict::NotSzego;
        rep.reason = "sqrt(rho) in L1 on the window (eikonal saturates)";
        return rep;
    }
    if (nterms < 2)
        throw validation_error("string_szego_criterion: fewer than 2 windows fit below xi_max");
    detail::classify_series(rep);
    return rep;
}

// Two-material criterion terms A_n = (sqrt a - sqrt b)^2 (2 - d_n - d_{n+1})(d_n + d_{n+1}).
inline std::vector<double> two_material_terms(double a, double b,
                                              const std::vector<double>& delta) {
    if (!(a > 0) || !(b > 0)) throw validation_error("two_material_terms: a, b must be > 0");
    for (double d : delta)
        if (d < 0 || d > 1) throw validation_error("two_material_terms: delta in [0,1]");
    std::vector<double> out;
    if (delta.size() < 2) return out;
    double c = sqr(std::sqrt(a) - std::sqrt(b));
    out.reserve(delta.size() - 1);
    for (size_t n = 0; n + 1 < delta.size(); ++n) {
        double s = delta[n] + delta[n + 1];
        out.push_back(c * (2.0 - s) * s);
    }
    return out;
}

// Builder: unit cells [n, n+1) carrying density b on the left and a
// density-a inclusion of length delta[n] at the right end.
inline MassDistribution make_two_material_string(double a, double b,
                                                 const std::vector<double>& delta,
                                                 double extra_tail = 2.0) {
    if (!(a > 0) || !(b > 0)) throw validation_error("two-material string: a, b must be > 0");
    MassDistribution M;
    M.density_breaks.push_back(0);
    auto push = [&M](double rho, double len) {
        if (len <= 0) return;
        if (!M.density.empty() && M.density.back() == rho) {
            M.density_breaks.back() += len;
        } else {
            M.density.push_back(rho);
            M.density_breaks.push_back(M.density_breaks.back() + len);
        }
    };
    for (double d : delta) {
        if (d < 0 || d > 1) throw validation_error("two-material string: delta in [0,1]");
        push(b, 1.0 - d);
        push(a, d);
    }
    push(b, extra_tail);
    M.xi_max = M.density_breaks.back();
    M.length = inf;
    return M;
}

namespace detail {

template <class EpsOf>
inline DensityEstimate density_estimate_impl(const MassDistribution& M,
                                             const std::vector<double>& lambda_grid,
                                             const EpsOf& eps_of) {
    if (lambda_grid.empty() || lambda_grid.front() <= 0 || !strictly_increasing(lambda_grid))
        throw validation_error("spectral_density_estimate: lambda grid must be positive increasing");
    DensityEstimate est;
    est.sigma.support = Support::HalfLine;
    est.sigma.grid = lambda_grid;
    est.sigma.density.resize(lambda_grid.size());
    for (size_t k = 0; k < lambda_grid.size(); ++k) {
        TwResult r = string_tw_function(M, cplx(lambda_grid[k], eps_of(lambda_grid[k])));
        est.sigma.density[k] = r.q.imag() / pi;
        est.max_residual = std::max(est.max_residual, r.residual);
        if (!r.stabilized) est.truncation_warning = true;
    }
    for (size_t k = 1; k + 1 < lambda_grid.size(); ++k) {
        double v = est.sigma.density[k];
        if (v > 4.0 * (est.sigma.density[k - 1] + est.sigma.density[k + 1]) && v > 1e-8)
            est.peak_flags.push_back((int)k);
    }
    if (auto t = detail::fit_tail_power(est.sigma)) est.sigma.tail = *t;
    return est;
}

}  // namespace detail

// sigma'(lambda) ~ Im q(lambda + i eps)/pi on the grid.
inline DensityEstimate spectral_density_estimate(const MassDistribution& M,
                                                 const std::vector<double>& lambda_grid,
                                                 double eps) {
    if (!(eps > 0)) throw validation_error("spectral_density_estimate: eps must be > 0");
    return detail::density_estimate_impl(M, lambda_grid, [eps](double) { return eps; });
}

// Variant with lambda-proportional regularization eps_k = eps * min(1, lambda):
// keeps the relative smoothing error O(eps^2) uniformly down to small lambda.
// The synthesis paths (spectral evolution, traveling-wave profile) need the
// low end of the spectrum at full accuracy.
inline DensityEstimate spectral_density_estimate_scaled(const MassDistribution& M,
                                                        const std::vector<double>& lambda_grid,
                                                        double eps) {
    if (!(eps > 0)) throw validation_error("spectral_density_estimate_scaled: eps must be > 0");
    return detail::density_estimate_impl(
        M, lambda_grid, [eps](double l) { return eps * std::min(1.0, l); });
}

// U_M: v -> int v(xi) phi(xi, lambda) dm over lattice samples.
inline std::vector<double> generalized_fourier(const MassDistribution& M,
                                               const std::vector<double>& positions,
                                               const std::vector<double>& masses,
                                               const std::vector<double>& values,
                                               const std::vector<double>& lambda_grid) {
    if (positions.size() != masses.size() || positions.size() != values.size())
        throw validation_error("generalized_fourier: lattice arrays must match");
    std::vector<double> g(lambda_grid.size(), 0.0);
    for (size_t k = 0; k < lambda_grid.size(); ++k) {
        std::vector<cplx> phis = string_phi_profile(M, positions, cplx(lambda_grid[k], 0.0));
        double s = 0;
        for (size_t i = 0; i < positions.size(); ++i) s += values[i] * phis[i].real() * masses[i];
        g[k] = s;
    }
    return g;
}

}  // namespace kw
