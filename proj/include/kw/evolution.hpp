// Time evolution and dynamical diagnostics: bead-lattice wave simulation,
// spectral-synthesis oracle, free Dirac group, near-front mass, traveling
// wave profile, modified free evolution, and Cesaro localization.
#pragma once

#include "kw/string.hpp"

namespace kw {

struct LatticeString {
    std::vector<double> xi;       // node positions (zero-mass nodes condensed away)
    std::vector<double> mass;     // lumped masses, > 0
    std::vector<double> kspring;  // spring i connects nodes i, i+1: k = 1/(xi_{i+1}-xi_i)
    std::vector<double> rho;      // density at the node
    std::vector<char> ac;         // node cell is absolutely continuous
    double h = 0;
    double xi_max = 0;
    double total_mass = 0;
    bool atom_resolution_warning = false;  // atoms closer than h
};

struct WaveState {
    double t = 0;
    double dt = 0;
    std::vector<double> u;  // displacement at time t
    std::vector<double> v;  // velocity at t - dt/2 (leapfrog staggering)
};

// Lumped lattice: cell [xi_i - h/2, xi_i + h/2] mass plus atoms snapped to
// the nearest node; zero-mass nodes eliminated by static condensation.
inline LatticeString discretize(const MassDistribution& M, double h, double xi_max) {
    if (!(h > 0)) throw validation_error("discretize: h must be > 0");
    if (!(xi_max > 0) || xi_max > M.xi_max)
        throw validation_error("discretize: xi_max must lie within the string truncation");
    auto p = detail::StringPrefix::build(M);
    int n = (int)std::llround(xi_max / h) + 1;
    std::vector<double> pos(n), m(n, 0.0), rho(n);
    std::vector<char> ac(n, 1);
    std::vector<double> Mac(p.xi.size(), 0.0);  // a.c. mass prefix
    for (size_t s = 0; s + 1 < p.xi.size(); ++s)
        Mac[s + 1] = Mac[s] + p.rho[s] * (p.xi[s + 1] - p.xi[s]);
    auto ac_mass = [&](double x) {
        size_t s = p.segment(x);
        return Mac[s] + p.rho[s] * (x - p.xi[s]);
    };
    for (int i = 0; i < n; ++i) {
        pos[i] = i * h;
        double lo = std::max(0.0, pos[i] - h / 2), hi = std::min(xi_max, pos[i] + h / 2);
        m[i] = ac_mass(hi) - ac_mass(lo);
        rho[i] = p.rho[p.segment(std::min(pos[i], xi_max - 1e-12))];
        if (m[i] <= 0) ac[i] = 0;
    }
    LatticeString lat;
    double prev_atom = -inf;
    for (const StringAtom& a : M.atoms) {
        if (a.xi > xi_max) break;
        int i = std::min((int)std::llround(a.xi / h), n - 1);
        m[i] += a.m;
        ac[i] = 0;
        if (a.xi - prev_atom < h) lat.atom_resolution_warning = true;
        prev_atom = a.xi;
    }
    for (int i = 0; i < n; ++i) {
        if (m[i] <= 0) continue;  // static condensation of massless nodes
        lat.xi.push_back(pos[i]);
        lat.mass.push_back(m[i]);
        lat.rho.push_back(rho[i]);
        lat.ac.push_back(ac[i]);
        lat.total_mass += m[i];
    }
    if (lat.xi.size() < 3) throw validation_error("discretize: lattice too small");
    lat.kspring.resize(lat.xi.size() - 1);
    for (size_t i = 0; i + 1 < lat.xi.size(); ++i)
        lat.kspring[i] = 1.0 / (lat.xi[i + 1] - lat.xi[i]);
    lat.h = h;
    lat.xi_max = xi_max;
    return lat;
}

namespace detail {

inline void accel(const LatticeString& lat, const std::vector<double>& u, std::vector<double>& a) {
    size_t n = u.size();
    a.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double f = 0;
        if (i + 1 < n) f += lat.kspring[i] * (u[i + 1] - u[i]);
        if (i > 0) f -= lat.kspring[i - 1] * (u[i] - u[i - 1]);
        a[i] = f / lat.mass[i];
    }
}

}  // namespace detail

// Largest stable dt (Gershgorin bound on the stiffness spectrum).
inline double cfl_dt_bound(const LatticeString& lat) {
    double lmax = 0;
    size_t n = lat.xi.size();
    for (size_t i = 0; i < n; ++i) {
        double d = 0, o = 0;
        if (i + 1 < n) {
            d += lat.kspring[i] / lat.mass[i];
            o += lat.kspring[i] / std::sqrt(lat.mass[i] * lat.mass[i + 1]);
        }
        if (i > 0) {
            d += lat.kspring[i - 1] / lat.mass[i];
            o += lat.kspring[i - 1] / std::sqrt(lat.mass[i] * lat.mass[i - 1]);
        }
        lmax = std::max(lmax, d + o);
    }
    return 2.0 / std::sqrt(lmax);
}

inline WaveState make_wave_state(const LatticeString& lat, const std::vector<double>& u0,
                                 double dt, double cfl_safety = 0.9) {
    if (u0.size() != lat.xi.size()) throw validation_error("make_wave_state: u0 size mismatch");
    double bound = cfl_safety * cfl_dt_bound(lat);
    if (!(dt > 0) || dt > bound) {
        std::ostringstream os;
        os << "CFL violation: dt = " << dt << " exceeds stable bound; suggested dt = " << bound;
        throw numerical_error(os.str());
    }
    WaveState st;
    st.t = 0;
    st.dt = dt;
    st.u = u0;
    std::vector<double> a;
    detail::accel(lat, st.u, a);
    st.v.resize(u0.size());
    for (size_t i = 0; i < u0.size(); ++i) st.v[i] = -0.5 * dt * a[i];  // v at -dt/2, u_t(0)=0
    return st;
}

inline void step_leapfrog(const LatticeString& lat, WaveState& st, long n_steps) {
    std::vector<double> a;
    for (long s = 0; s < n_steps; ++s) {
        detail::accel(lat, st.u, a);
        for (size_t i = 0; i < st.u.size(); ++i) st.v[i] += st.dt * a[i];
        for (size_t i = 0; i < st.u.size(); ++i) st.u[i] += st.dt * st.v[i];
        st.t += st.dt;
    }
}

// Discrete leapfrog energy 1/2 v^T M v + 1/2 <K u_n, u_{n-1}> with v at the
// interleaved half step; exactly conserved by the scheme for this linear
// system (drift is rounding only).
inline double energy(const LatticeString& lat, const WaveState& st) {
    double E = 0;
    for (size_t i = 0; i < st.u.size(); ++i) E += 0.5 * lat.mass[i] * sqr(st.v[i]);
    for (size_t i = 0; i + 1 < st.u.size(); ++i) {
        double du = st.u[i + 1] - st.u[i];
        double dup = (st.u[i + 1] - st.dt * st.v[i + 1]) - (st.u[i] - st.dt * st.v[i]);
        E += 0.5 * lat.kspring[i] * du * dup;
    }
    return E;
}

// Mass-quantile front: smallest xi with int_{xi}^{inf} u^2 dm <= frac ||u||^2.
inline double detect_front(const LatticeString& lat, const WaveState& st, double frac = 1e-4) {
    double total = 0;
    for (size_t i = 0; i < st.u.size(); ++i) total += lat.mass[i] * sqr(st.u[i]);
    if (total <= 0) return 0;
    double tail = 0;
    for (size_t i = st.u.size(); i-- > 0;) {
        tail += lat.mass[i] * sqr(st.u[i]);
        if (tail > frac * total) return lat.xi[i];
    }
    return 0;
}

// int u^2 dm over the near-front window [L_{T(front0)+t-ell}, L_{T(front0)+t}].
inline double near_front_mass(const MassDistribution& M, const LatticeString& lat,
                              const WaveState& st, double ell, double front0) {
    auto p = detail::StringPrefix::build(M);
    if (!(ell > 0)) throw validation_error("near_front_mass: ell must be > 0");
    double a = p.eikonal(front0);
    double eta_hi = a + st.t, eta_lo = a + st.t - ell;
    if (eta_lo < 0) throw validation_error("near_front_mass: t < ell (window not reachable)");
    double lo = p.eikonal_inverse(eta_lo), hi = p.eikonal_inverse(eta_hi);
    if (!(hi < inf) || hi > lat.xi_max)
        throw validation_error("near_front_mass: window extends beyond the truncation");
    double s = 0;
    for (size_t i = 0; i < st.u.size(); ++i)
        if (lat.xi[i] >= lo && lat.xi[i] <= hi) s += lat.mass[i] * sqr(st.u[i]);
    return s;
}

struct SpectralEvolveResult {
    std::vector<double> u;
    double tail_share = 0;  // share of ||g||^2_sigma in the top decade of the grid
    bool truncation_warning = false;
};

// u(., t) = int cos(t sqrt(lambda)) phi(., lambda) g(lambda) dsigma(lambda):
// spectral synthesis against the estimated density; the oracle for leapfrog.
inline SpectralEvolveResult evolve_spectral(const MassDistribution& M,
                                            const LatticeString& lat,
                                            const std::vector<double>& u0, double t,
                                            const std::vector<double>& lambda_grid,
                                            double eps = 1e-2) {
    if (u0.size() != lat.xi.size()) throw validation_error("evolve_spectral: u0 size mismatch");
    DensityEstimate est = spectral_density_estimate_scaled(M, lambda_grid, eps);
    std::vector<double> g = generalized_fourier(M, lat.xi, lat.mass, u0, lambda_grid);

    size_t K = lambda_grid.size();
    std::vector<double> wq(K, 0.0);  // trapezoid weights
    for (size_t k = 0; k + 1 < K; ++k) {
        double d = lambda_grid[k + 1] - lambda_grid[k];
        wq[k] += 0.5 * d;
        wq[k + 1] += 0.5 * d;
    }
    SpectralEvolveResult res;
    double total = 0, tail = 0;
    for (size_t k = 0; k < K; ++k) {
        double c = g[k] * g[k] * est.sigma.density[k] * wq[k];
        total += c;
        if (lambda_grid[k] > lambda_grid.back() / 10.0) tail += c;
    }
    res.tail_share = total > 0 ? tail / total : 0.0;
    res.truncation_warning = res.tail_share > 0.01;

    res.u.assign(lat.xi.size(), 0.0);
    for (size_t k = 0; k < K; ++k) {
        double coef = std::cos(t * std::sqrt(lambda_grid[k])) * g[k] * est.sigma.density[k] * wq[k];
        if (coef == 0) continue;
        std::vector<cplx> phis = string_phi_profile(M, lat.xi, cplx(lambda_grid[k], 0.0));
        for (size_t i = 0; i < res.u.size(); ++i) res.u[i] += coef * phis[i].real();
    }
    return res;
}

struct ProfileResult {
    std::vector<double> eta;
    std::vector<double> G;
    double norm_G_sq = 0;      // ||G||^2 over the eta grid
    double norm_2g_ac_sq = 0;  // 2 ||g chi_ac||^2_{L^2(sigma)}
    SzegoReport classification;
};

// Traveling-wave profile G(eta) = (1/sqrt(pi)) int Re(D_sigma(a) e^{i eta sqrt(a)})
// g(a) a^{-1/4} da over the a.c. part of the spectrum.
inline ProfileResult traveling_wave_profile(const MassDistribution& M, const LatticeString& lat,
                                            const std::vector<double>& u0,
                                            const std::vector<double>& eta_grid,
                                            const std::vector<double>& lambda_grid,
                                            double eps = 1e-2, double eps_boundary = 1e-3) {
    auto p = detail::StringPrefix::build(M);
    int n_eta = (int)std::floor(p.T.back());
    if (n_eta < 4) throw validation_error("traveling_wave_profile: truncation too short to classify");
    std::vector<double> etas(n_eta);
    for (int i = 0; i < n_eta; ++i) etas[i] = i;
    ProfileResult res;
    res.classification = string_szego_criterion(M, etas);
    if (res.classification.verdict == Verdict::NotSzego)
        throw domain_error("traveling_wave_profile: string is not in the Szego class: " +
                           res.classification.reason);

    DensityEstimate est = spectral_density_estimate_scaled(M, lambda_grid, eps);
    std::vector<double> g = generalized_fourier(M, lat.xi, lat.mass, u0, lambda_grid);
    size_t K = lambda_grid.size();
    std::vector<char> ac(K, 1);
    for (int k : est.peak_flags) ac[k] = 0;

    std::vector<double> wq(K, 0.0);
    for (size_t k = 0; k + 1 < K; ++k) {
        double d = lambda_grid[k + 1] - lambda_grid[k];
        wq[k] += 0.5 * d;
        wq[k + 1] += 0.5 * d;
    }
    std::vector<cplx> coef(K, 0.0);
    for (size_t k = 0; k < K; ++k) {
        if (!ac[k] || est.sigma.density[k] <= 0) continue;
        cplx D = string_szego_function(est.sigma, cplx(lambda_grid[k], eps_boundary));
        coef[k] = D * g[k] * std::pow(lambda_grid[k], -0.25) * wq[k] / std::sqrt(pi);
        res.norm_2g_ac_sq += 2.0 * g[k] * g[k] * est.sigma.density[k] * wq[k];
    }
    res.eta = eta_grid;
    res.G.assign(eta_grid.size(), 0.0);
    for (size_t j = 0; j < eta_grid.size(); ++j) {
        double s = 0;
        for (size_t k = 0; k < K; ++k) {
            if (coef[k] == cplx(0, 0)) continue;
            double root = std::sqrt(lambda_grid[k]);
            s += (coef[k] * std::exp(cplx(0, eta_grid[j] * root))).real();
        }
        res.G[j] = s;
    }
    res.norm_G_sq = trapezoid(res.eta, [&] {
        std::vector<double> g2(res.G.size());
        for (size_t j = 0; j < res.G.size(); ++j) g2[j] = sqr(res.G[j]);
        return g2;
    }());
    return res;
}

// Modified free dynamics (V~_t G)(xi) = 1/2 chi_ac(xi) rho^{-1/4}(xi) G(T(xi) - t).
inline std::vector<double> modified_free_evolution(const MassDistribution& M,
                                                   const std::vector<double>& eta_grid,
                                                   const std::vector<double>& G, double t,
                                                   const std::vector<double>& xi_grid) {
    if (eta_grid.size() != G.size())
        throw validation_error("modified_free_evolution: eta/G size mismatch");
    auto p = detail::StringPrefix::build(M);
    auto G_at = [&](double eta) -> double {
        if (eta_grid.empty() || eta < eta_grid.front() || eta > eta_grid.back()) return 0.0;
        auto it = std::upper_bound(eta_grid.begin(), eta_grid.end(), eta);
        size_t k = std::min<size_t>(std::max<ptrdiff_t>(1, it - eta_grid.begin()), eta_grid.size() - 1);
        double u = (eta - eta_grid[k - 1]) / (eta_grid[k] - eta_grid[k - 1]);
        return G[k - 1] * (1 - u) + G[k] * u;
    };
    std::vector<double> out(xi_grid.size(), 0.0);
    for (size_t i = 0; i < xi_grid.size(); ++i) {
        double x = xi_grid[i];
        if (x < 0 || x > M.xi_max) continue;
        double rho = p.rho[p.segment(std::min(x, M.xi_max - 1e-12))];
        if (rho <= 0) continue;  // singular nodes carry no modified free wave
        out[i] = 0.5 * std::pow(rho, -0.25) * G_at(p.eikonal(x) - t);
    }
    return out;
}

struct DiracState {
    std::vector<cplx> z1, z2;  // samples at tau_j = j * dtau
    double dtau = 0;
};

// Exact free Dirac evolution on a lattice of cells [j dtau, (j+1) dtau):
// even/odd reflections and index shifts on step functions, so the L^2(R+)
// norm is preserved exactly and t on the lattice acts bitwise.
inline DiracState free_dirac_evolution(const DiracState& Z, double t) {
    if (Z.z1.size() != Z.z2.size() || !(Z.dtau > 0))
        throw validation_error("free_dirac_evolution: malformed state");
    long k = std::llround(t / Z.dtau);
    if (std::abs(t - k * Z.dtau) > 1e-9 * std::max(1.0, std::abs(t)))
        throw validation_error("free_dirac_evolution: t must be a lattice multiple of dtau");
    long n = (long)Z.z1.size();
    auto z1e = [&](long j) -> cplx {  // even step-function extension
        if (j < 0) j = -1 - j;
        return j < n ? Z.z1[j] : cplx(0, 0);
    };
    auto z2e = [&](long j) -> cplx {  // odd step-function extension
        bool neg = j < 0;
        if (neg) j = -1 - j;
        if (j >= n) return 0;
        return neg ? -Z.z2[j] : Z.z2[j];
    };
    DiracState out;
    out.dtau = Z.dtau;
    long m = n + std::abs(k);
    out.z1.resize(m);
    out.z2.resize(m);
    const cplx half(0.5, 0), ihalf(0, 0.5);
    for (long j = 0; j < m; ++j) {
        cplx am = z1e(j - k), ap = z1e(j + k);
        cplx bm = z2e(j - k), bp = z2e(j + k);
        out.z1[j] = half * (am + ap) + ihalf * (bm - bp);
        out.z2[j] = -ihalf * (am - ap) + half * (bm + bp);
    }
    return out;
}

// (1/T) int_0^T ||u||^2_{L^2(m, [0,b])} dt over n_samples equispaced times.
inline double cesaro_localization(const MassDistribution& M, const LatticeString& lat,
                                  const std::vector<double>& u0, double b, double T,
                                  int n_samples = 256, double cfl_safety = 0.9) {
    if (!(T > 0) || n_samples < 1) throw validation_error("cesaro_localization: bad T/n_samples");
    double sample_dt = T / n_samples;
    double stable = cfl_safety * cfl_dt_bound(lat);
    long per = (long)std::ceil(sample_dt / stable);
    double dt = sample_dt / per;
    WaveState st = make_wave_state(lat, u0, dt, cfl_safety);
    double acc = 0;
    for (int s = 0; s < n_samples; ++s) {
        step_leapfrog(lat, st, per);
        double v = 0;
        for (size_t i = 0; i < st.u.size() && lat.xi[i] <= b; ++i)
            v += lat.mass[i] * sqr(st.u[i]);
        acc += v;
    }
    return acc / n_samples;
}

}  // namespace kw
