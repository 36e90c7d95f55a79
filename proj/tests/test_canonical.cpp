#include <catch2/catch_amalgamated.hpp>

#include "kw/canonical.hpp"
#include "kw/dirac.hpp"
#include "kw/string.hpp"
#include "oracles.hpp"

using namespace kw;

namespace {

Hamiltonian identity_hamiltonian(double tau_max = 100) {
    Hamiltonian H;
    H.breaks = {0.0};
    H.cells = {{1.0, 1.0, 0.0}};
    H.tau_max = tau_max;
    return H;
}

// unit-trace cells (the normalization strings and Dirac reductions produce);
// keeps det <= 1/4 so transfer quantities stay well-conditioned
Hamiltonian random_psd_hamiltonian(std::mt19937& rng, int n_cells = 12, double tau_max = 12) {
    std::uniform_real_distribution<double> U(0.05, 0.95), T(-1.0, 1.0);
    Hamiltonian H;
    H.tau_max = tau_max;
    for (int k = 0; k < n_cells; ++k) {
        H.breaks.push_back(tau_max * k / n_cells);
        double h1 = U(rng), h2 = 1.0 - h1;
        double h = T(rng) * std::sqrt(h1 * h2);
        H.cells.push_back({h1, h2, h});
    }
    return H;
}

// Exact-average, determinant-normalized piecewise-constant reduction of the
// cosh/sinh Hamiltonian generated by a piecewise-constant diagonal Dirac q.
Hamiltonian dirac_cosh_hamiltonian(const std::vector<double>& qbreaks,
                                   const std::vector<double>& qvals, double ramp_end,
                                   double tau_max, double dx) {
    auto gq = [&](double t) {  // g(t) = int_0^t q
        double g = 0;
        for (size_t j = 0; j < qvals.size(); ++j) {
            double lo = qbreaks[j];
            double hi = j + 1 < qbreaks.size() ? qbreaks[j + 1] : t;
            if (t <= lo) break;
            g += qvals[j] * (std::min(t, hi) - lo);
        }
        return g;
    };
    auto qat = [&](double t) {
        size_t j = 0;
        while (j + 1 < qbreaks.size() && qbreaks[j + 1] <= t) ++j;
        return qvals[j];
    };
    Hamiltonian H;
    H.tau_max = tau_max;
    int n = (int)std::llround(ramp_end / dx);
    for (int k = 0; k < n; ++k) {
        double a = k * dx, b = a + dx;
        double s = 2.0 * qat(0.5 * (a + b));  // slope of 2g on the subcell
        double ic, is;
        if (std::abs(s) > 1e-14) {
            ic = (std::sinh(2 * gq(b)) - std::sinh(2 * gq(a))) / (s * dx);
            is = (std::cosh(2 * gq(b)) - std::cosh(2 * gq(a))) / (s * dx);
        } else {
            ic = std::cosh(2 * gq(a));
            is = std::sinh(2 * gq(a));
        }
        double det = ic * ic - is * is;
        double norm = 1.0 / std::sqrt(det);
        H.breaks.push_back(a);
        H.cells.push_back({ic * norm, ic * norm, is * norm});
    }
    H.breaks.push_back(ramp_end);
    double ge = 2 * gq(ramp_end);
    H.cells.push_back({std::cosh(ge), std::cosh(ge), std::sinh(ge)});
    return H;
}

}  // namespace

TEST_CASE("integrate_transfer: H = I gives (cos, -sin); z = 0 freezes") {
    Hamiltonian H = identity_hamiltonian();
    for (cplx z : {cplx(1.3, 0.0), cplx(0.5, 0.8)}) {
        auto states = integrate_transfer(H, z, {0.0, 1.0, 2.5, 7.0});
        for (const auto& st : states) {
            CHECK(std::abs(st.theta_p - std::cos(st.tau * z)) < 1e-11);
            CHECK(std::abs(st.theta_m + std::sin(st.tau * z)) < 1e-11);
            CHECK(std::abs(st.phi_p - std::sin(st.tau * z)) < 1e-11);
            CHECK(std::abs(st.phi_m - std::cos(st.tau * z)) < 1e-11);
        }
    }
    std::mt19937 rng(3);
    Hamiltonian R = random_psd_hamiltonian(rng);
    auto st0 = integrate_transfer(R, cplx(0, 0), {5.0, 11.0});
    for (const auto& st : st0) {
        CHECK(std::abs(st.theta_p - 1.0) < 1e-14);
        CHECK(std::abs(st.theta_m) < 1e-14);
        CHECK(std::abs(st.phi_m - 1.0) < 1e-14);
    }
}

TEST_CASE("integrate_transfer: Wronskian = 1 and RK4 oracle agreement") {
    std::mt19937 rng(17);
    cplx z(1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        Hamiltonian H = random_psd_hamiltonian(rng, 10, 10);
        auto states = integrate_transfer(H, z, {2.0, 6.4, 10.0});
        for (const auto& st : states) CHECK(std::abs(st.wronskian() - 1.0) < 1e-10);

        // oracle: per-cell RK4 with fine steps on Theta' = -z J H Theta
        oracle::CVec2 th{1.0, 0.0};
        for (size_t k = 0; k < H.cells.size(); ++k) {
            double lo = H.breaks[k];
            double hi = k + 1 < H.cells.size() ? H.breaks[k + 1] : H.tau_max;
            const SymMat2& c = H.cells[k];
            auto deriv = [&](double, const oracle::CVec2& y, oracle::CVec2& d) {
                d.a = z * (c.h * y.a + c.h2 * y.b);
                d.b = -z * (c.h1 * y.a + c.h * y.b);
            };
            oracle::rk4_system(deriv, th, lo, hi, 4000);
        }
        auto last = integrate_transfer(H, z, {H.tau_max}).front();
        CHECK(std::abs(th.a - last.theta_p) < 1e-6 * std::max(1.0, std::abs(th.a)));
        CHECK(std::abs(th.b - last.theta_m) < 1e-6 * std::max(1.0, std::abs(th.b)));
    }
}

TEST_CASE("eikonal: identity, rank-one head, inversion identities") {
    Hamiltonian H = identity_hamiltonian(50);
    CHECK(eikonal(H, 7.25) == Catch::Approx(7.25));
    CHECK(eikonal_inverse(H, 3.5) == Catch::Approx(3.5));

    Hamiltonian R;  // diag(1, 0) on [0, 5], then I
    R.breaks = {0.0, 5.0};
    R.cells = {{1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}};
    R.tau_max = 50;
    CHECK(eikonal(R, 5.0) == 0.0);
    CHECK(eikonal(R, 9.0) == Catch::Approx(4.0));
    for (double eta : {0.5, 1.0, 17.0}) CHECK(eikonal_inverse(R, eta) == Catch::Approx(eta + 5.0));
    CHECK(eikonal_inverse(R, 0.0) == 0.0);
    CHECK(eikonal_inverse(R, 100.0) == inf);

    // T(L_eta) = eta whenever L_eta < inf
    std::mt19937 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        Hamiltonian G = random_psd_hamiltonian(rng);
        std::uniform_real_distribution<double> U(0.0, eikonal(G, G.tau_max));
        double eta = U(rng);
        double L = eikonal_inverse(G, eta);
        if (L < inf) CHECK(eikonal(G, L) == Catch::Approx(eta).margin(1e-10));
    }
}

TEST_CASE("szego_sum: identity Hamiltonian is Szego with zero terms") {
    Hamiltonian H = identity_hamiltonian(300);
    std::vector<double> alpha(260);
    for (size_t i = 0; i < alpha.size(); ++i) alpha[i] = (double)i;
    SzegoReport rep = szego_sum(H, alpha);
    CHECK(rep.verdict == Verdict::Szego);
    for (double t : rep.terms) CHECK(std::abs(t) < 1e-9);
}

TEST_CASE("szego_sum: terms match the scalar Dirac criterion (cross-module identity)") {
    std::vector<double> qb{0.0, 1.0, 3.0, 6.0};
    std::vector<double> qv{0.3, -0.2, 0.1, 0.0};
    Hamiltonian H = dirac_cosh_hamiltonian(qb, qv, 8.0, 42.0, 2e-5);
    std::vector<double> alpha(42);
    for (size_t i = 0; i < alpha.size(); ++i) alpha[i] = (double)i;
    SzegoReport can = szego_sum(H, alpha);

    DiracPotential Q = DiracPotential::diagonal(ScalarPotential::pc(qb, qv), 42.0);
    SzegoReport dir = dirac_special_criterion(Q, (int)can.terms.size());
    REQUIRE(dir.terms.size() >= can.terms.size());
    for (size_t n = 0; n < can.terms.size(); ++n) {
        if (std::abs(dir.terms[n]) > 1e-6)
            CHECK(std::abs(can.terms[n] - dir.terms[n]) < 1e-8 * std::abs(dir.terms[n]));
        else
            CHECK(std::abs(can.terms[n] - dir.terms[n]) < 1e-10);
    }
}

TEST_CASE("szego_sum: term nonnegativity and sub-partition bound on unit-det Hamiltonians") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> U1(0.3, 3.0), Uh(-1.0, 1.0), Us(0.1, 1.9);
    for (int rep = 0; rep < 30; ++rep) {
        Hamiltonian H;
        H.tau_max = 24;
        int cells = 16;
        for (int k = 0; k < cells; ++k) {
            H.breaks.push_back(H.tau_max * k / cells);
            double h1 = U1(rng), h = Uh(rng);
            H.cells.push_back({h1, (1.0 + h * h) / h1, h});  // det = 1
        }
        std::vector<double> alpha(23);
        for (size_t i = 0; i < alpha.size(); ++i) alpha[i] = (double)i;
        SzegoReport rep_s = szego_sum(H, alpha);
        for (double t : rep_s.terms) CHECK(t >= -1e-10);

        // sub-partition monotonicity: det int_{I-} H - |I-|^2 <= 8 * term
        auto p = kw::detail::Prefix::build(H);
        for (size_t n = 0; n + 1 < rep_s.terms.size(); ++n) {
            if (rep_s.terms[n] > 1.0) continue;
            for (int t = 0; t < 4; ++t) {
                double a = n + Us(rng);
                double b = a + (n + 2.0 - a) * 0.5 * Us(rng);
                if (b <= a) continue;
                double sub = p.integral(a, b).det() - sqr(b - a);
                CHECK(sub <= 8.0 * rep_s.terms[n] + 1e-9);
            }
        }
    }
}

TEST_CASE("szego_sum: partition spacing validation and saturation verdict") {
    Hamiltonian H = identity_hamiltonian(100);
    CHECK_THROWS_AS(szego_sum(H, {0.0, 1.0, 1.0 + 1e-12, 3.0}), validation_error);

    Hamiltonian S;  // rank-one tail: sqrt(det H) integrable on the window
    S.breaks = {0.0, 10.0};
    S.cells = {{1.0, 1.0, 0.0}, {1.0, 0.0, 0.0}};
    S.tau_max = 40;
    std::vector<double> alpha(30);
    for (size_t i = 0; i < alpha.size(); ++i) alpha[i] = (double)i;
    SzegoReport rep = szego_sum(S, alpha);
    CHECK(rep.verdict == Verdict::NotSzego);
    CHECK(rep.reason.find("saturates") != std::string::npos);
}

TEST_CASE("szego_sum: partition invariance on a Szego / non-Szego pair") {
    std::vector<double> d_szego(400), d_not(400);
    for (int n = 0; n < 400; ++n) {
        d_szego[n] = 1.0 / sqr(n + 1.0);
        d_not[n] = 1.0 / std::sqrt(n + 1.0);
    }
    Hamiltonian Hs = string_to_hamiltonian(make_two_material_string(2.0, 1.0, d_szego));
    Hamiltonian Hn = string_to_hamiltonian(make_two_material_string(2.0, 1.0, d_not));
    for (double lam : {0.5, 1.0, 1.7}) {
        double eta_s = eikonal(Hs, Hs.tau_max), eta_n = eikonal(Hn, Hn.tau_max);
        std::vector<double> as, an;
        for (double a = 0; a <= eta_s; a += lam) as.push_back(a);
        for (double a = 0; a <= eta_n; a += lam) an.push_back(a);
        CHECK(szego_sum(Hs, as).verdict == Verdict::Szego);
        CHECK(szego_sum(Hn, an).verdict == Verdict::NotSzego);
    }
}

TEST_CASE("weyl_m: H = I gives m = i; Herglotz positivity; stabilization") {
    Hamiltonian H = identity_hamiltonian(64);
    for (cplx z : {cplx(0, 1), cplx(0, 2), cplx(1, 1), cplx(-3, 0.5)}) {
        WeylResult r = weyl_m(H, z);
        CHECK(std::abs(r.m - cplx(0, 1)) < 1e-9);
        CHECK(r.stabilized);
    }
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> Ur(-5.0, 5.0), Ui(0.05, 4.0);
    for (int rep = 0; rep < 50; ++rep) {
        Hamiltonian R = random_psd_hamiltonian(rng, 8, 16);
        cplx z(Ur(rng), Ui(rng));
        WeylResult r = weyl_m(R, z);
        CHECK(r.m.imag() >= -1e-12);
    }
}

TEST_CASE("hamiltonian validation: trivial rank-one rejected") {
    Hamiltonian H;
    H.breaks = {0.0, 1.0};
    H.cells = {{1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}};  // same direction (1,1)
    H.tau_max = 5;
    CHECK_THROWS_AS(eikonal(H, 1.0), validation_error);
    H.cells[1] = {2.0, 0.5, 1.0};  // rank-one, different direction
    CHECK_NOTHROW(eikonal(H, 1.0));
}
