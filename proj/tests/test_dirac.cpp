#include <catch2/catch_amalgamated.hpp>

#include "kw/dirac.hpp"
#include "oracles.hpp"

using namespace kw;

TEST_CASE("transfer_N0: closed forms for the scalar potentials") {
    DiracPotential zero = DiracPotential::diagonal(ScalarPotential::constant(0.0), 20);
    for (const Mat2& N : transfer_N0(zero, {0.0, 3.0, 11.0})) {
        CHECK(N.a == Catch::Approx(1.0));
        CHECK(N.d == Catch::Approx(1.0));
        CHECK(std::abs(N.b) + std::abs(N.c) < 1e-15);
    }

    // antidiagonal q = 1 on [0,1], 0 after: N0(1) = diag(e^-1, e)
    ScalarPotential q = ScalarPotential::pc({0.0, 1.0}, {1.0, 0.0});
    DiracPotential anti = DiracPotential::antidiagonal(q, 20);
    Mat2 N1 = transfer_N0(anti, {1.0}).front();
    CHECK(N1.a == Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(N1.d == Catch::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(std::abs(N1.b) + std::abs(N1.c) < 1e-15);

    // diagonal potentials give the cosh/sinh transfer matrix
    DiracPotential diag = DiracPotential::diagonal(q, 20);
    Mat2 D1 = transfer_N0(diag, {1.0}).front();
    CHECK(D1.a == Catch::Approx(std::cosh(1.0)).epsilon(1e-12));
    CHECK(D1.b == Catch::Approx(std::sinh(1.0)).epsilon(1e-12));
    CHECK(D1.c == Catch::Approx(std::sinh(1.0)).epsilon(1e-12));
    CHECK(D1.det() == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("transfer_N0: general potential keeps det = 1 (RK4 + step-halving oracle)") {
    DiracPotential Q = DiracPotential::general(ScalarPotential::constant(0.1),
                                               ScalarPotential::constant(0.1), 20);
    Mat2 N = transfer_N0(Q, {10.0}).front();
    CHECK(std::abs(N.det() - 1.0) < 1e-9);

    // oracle: fine-step RK4 on the first column of N' = (JQ) N
    oracle::CVec2 y{1.0, 0.0};
    auto deriv = [](double, const oracle::CVec2& v, oracle::CVec2& d) {
        // JQ = [[-q2, q1], [q1, q2]] with q1 = q2 = 0.1
        d.a = -0.1 * v.a + 0.1 * v.b;
        d.b = 0.1 * v.a + 0.1 * v.b;
    };
    oracle::rk4_system(deriv, y, 0.0, 10.0, 40000);
    CHECK(std::abs(y.a.real() - N.a) < 1e-9);
    CHECK(std::abs(y.b.real() - N.c) < 1e-9);
}

TEST_CASE("dirac criteria: zero potential, constant potential, L2 potential") {
    DiracPotential zero = DiracPotential::diagonal(ScalarPotential::constant(0.0), 300);
    SzegoReport rz = dirac_szego_sum(zero, 280);
    CHECK(rz.verdict == Verdict::Szego);
    for (double t : rz.terms) CHECK(std::abs(t) < 1e-12);
    SzegoReport sz = dirac_special_criterion(zero, 280);
    for (double t : sz.terms) CHECK(std::abs(t) < 1e-12);

    // constant q: term = sinh^2(2c)/c^2 - 4, independent of n -> NotSzego
    double c = 0.3;
    DiracPotential qc = DiracPotential::diagonal(ScalarPotential::constant(c), 300);
    SzegoReport rc = dirac_special_criterion(qc, 280);
    double hand = (std::exp(4 * c) - 1.0) * (1.0 - std::exp(-4 * c)) / (4 * c * c) - 4.0;
    CHECK(hand == Catch::Approx(sqr(std::sinh(2 * c)) / (c * c) - 4.0).epsilon(1e-12));
    for (double t : rc.terms) CHECK(t == Catch::Approx(hand).epsilon(1e-10));
    CHECK(rc.verdict == Verdict::NotSzego);

    // q = 1/(1+tau) is in L2: Szego side
    std::vector<double> br, vals;
    for (int k = 0; k < 4000; ++k) {
        br.push_back(0.1 * k);
        vals.push_back(1.0 / (1.0 + 0.1 * k + 0.05));
    }
    DiracPotential ql = DiracPotential::diagonal(ScalarPotential::pc(br, vals), 402);
    SzegoReport rl = dirac_special_criterion(ql, 400);
    CHECK(rl.verdict == Verdict::Szego);
}

TEST_CASE("dirac_szego_sum matches dirac_special_criterion; antidiagonal = diagonal") {
    ScalarPotential q = ScalarPotential::pc({0.0, 1.0, 3.0, 6.0}, {0.3, -0.2, 0.1, 0.0});
    DiracPotential diag = DiracPotential::diagonal(q, 60);
    DiracPotential anti = DiracPotential::antidiagonal(q, 60);
    SzegoReport rm = dirac_szego_sum(diag, 50);
    SzegoReport rs = dirac_special_criterion(diag, 50);
    SzegoReport ra = dirac_szego_sum(anti, 50);
    REQUIRE(rm.terms.size() == rs.terms.size());
    for (size_t n = 0; n < rm.terms.size(); ++n) {
        double scale = std::max(1e-8, std::abs(rs.terms[n]));
        CHECK(std::abs(rm.terms[n] - rs.terms[n]) < 1e-8 * scale);
        CHECK(std::abs(ra.terms[n] - rm.terms[n]) < 1e-10 * scale + 1e-14);
    }

    // general-form RK4 route agrees with the closed forms for a diagonal Q
    DiracPotential gen = DiracPotential::general(q, ScalarPotential::constant(0.0), 12);
    SzegoReport rg = dirac_szego_sum(gen, 10);
    for (size_t n = 0; n < rg.terms.size(); ++n)
        CHECK(rg.terms[n] == Catch::Approx(rs.terms[n]).margin(1e-8));
}

TEST_CASE("wvn_region: representative points and boundary strictness") {
    CHECK(wvn_region(-1.0, 0.0).region == WvnRegion::A1);
    CHECK(wvn_region(-1.0, 0.0).in_szego_class.value());
    CHECK(wvn_region(0.5, 1.0).region == WvnRegion::A2);
    CHECK(wvn_region(2.0, -0.4).region == WvnRegion::A3);
    CHECK(wvn_region(1.0, 0.5).region == WvnRegion::Boundary);
    CHECK(!wvn_region(1.0, 0.5).in_szego_class.has_value());
    CHECK(wvn_region(0.5, 0.5).region == WvnRegion::Boundary);
    CHECK(wvn_region(-2.0, -1.5).region == WvnRegion::Boundary);
    CHECK(wvn_region(0.5, 0.2).region == WvnRegion::Outside);
    CHECK_FALSE(wvn_region(0.5, 0.2).in_szego_class.value());
    CHECK(wvn_region(0.0, 0.8).region == WvnRegion::A1);
    CHECK(wvn_region(1.0, 2.0).region == WvnRegion::A3);
    CHECK(wvn_region(1.5, 0.1).region == WvnRegion::A3);  // 1.5 + 0.1 > 3/2
    CHECK(wvn_region(1.5, -0.1).region == WvnRegion::Outside);
}

TEST_CASE("wvn_numeric_check: convergence matches the region on sample points") {
    SzegoReport a1 = wvn_numeric_check(0.0, 1.0, 20000);
    CHECK(a1.verdict == Verdict::Szego);
    SzegoReport out = wvn_numeric_check(1.0, 0.4, 20000);
    CHECK(out.verdict == Verdict::NotSzego);
    SzegoReport a2 = wvn_numeric_check(0.3, 0.7, 20000);
    CHECK(a2.verdict == Verdict::Szego);
}

TEST_CASE("dispersion_criterion: agreement with the product criterion") {
    DiracPotential zero = DiracPotential::diagonal(ScalarPotential::constant(0.0), 200);
    SzegoReport rz = dispersion_criterion(zero, 150);
    for (double t : rz.terms) CHECK(std::abs(t) < 1e-14);

    std::vector<double> br, vals;
    for (int k = 0; k < 3000; ++k) {
        br.push_back(0.1 * k);
        vals.push_back(1.0 / (1.0 + 0.1 * k + 0.05));
    }
    DiracPotential ql = DiracPotential::diagonal(ScalarPotential::pc(br, vals), 302);
    SzegoReport rd = dispersion_criterion(ql, 300);
    CHECK(rd.applicable);
    CHECK(rd.verdict == Verdict::Szego);
    CHECK(dirac_special_criterion(ql, 300).verdict == Verdict::Szego);

    // WvN (0.5, 0.4) lies outside A: dispersion terms are not summable
    DiracPotential wvn = DiracPotential::diagonal(ScalarPotential::wvn(0.5, 0.4), 20002);
    SzegoReport rw = dispersion_criterion(wvn, 20000);
    CHECK(rw.verdict == Verdict::NotSzego);
    CHECK(wvn_region(0.5, 0.4).region == WvnRegion::Outside);

    // random small-amplitude potentials: the two criteria agree when ||g||_inf < 0.2
    std::mt19937 rng(81);
    std::uniform_real_distribution<double> A(-0.04, 0.04);
    for (int rep = 0; rep < 6; ++rep) {
        std::vector<double> b2, v2;
        for (int k = 0; k < 300; ++k) {
            b2.push_back(k);
            v2.push_back(A(rng) / std::sqrt(k + 1.0));
        }
        DiracPotential Q = DiracPotential::diagonal(ScalarPotential::pc(b2, v2), 302);
        SzegoReport d = dispersion_criterion(Q, 300);
        SzegoReport s = dirac_special_criterion(Q, 300);
        CHECK(d.applicable);
        CHECK(d.verdict == s.verdict);
    }
}

TEST_CASE("korey_check: examples and the conservative test constant") {
    std::vector<double> x(2001), f(2001);
    for (int i = 0; i <= 2000; ++i) x[i] = i / 2000.0;

    std::fill(f.begin(), f.end(), 0.7);
    KoreyResult rc = korey_check(x, f);
    CHECK(rc.eps == Catch::Approx(0.0).margin(1e-12));
    CHECK(rc.lhs == Catch::Approx(0.0).margin(1e-12));

    for (int i = 0; i <= 2000; ++i) f[i] = 0.1 * std::sin(2 * kw::pi * x[i]);
    KoreyResult rs = korey_check(x, f);
    // oracle values: eps = I0(d)^2 - 1, lhs = 2 d / pi for f = d sin(2 pi x)
    double eps_o = sqr(std::cyl_bessel_i(0.0, 0.1)) - 1.0;
    CHECK(rs.eps == Catch::Approx(eps_o).epsilon(1e-6));
    CHECK(rs.lhs == Catch::Approx(0.2 / kw::pi).epsilon(1e-5));
    CHECK(rs.bound_ratio <= 4.0);
    CHECK(rs.in_range);

    for (int i = 0; i <= 2000; ++i) f[i] = 0.05 * x[i];
    KoreyResult rl = korey_check(x, f);
    double me = (std::exp(0.05) - 1.0) / 0.05, mm = (1.0 - std::exp(-0.05)) / 0.05;
    CHECK(rl.eps == Catch::Approx(me * mm - 1.0).epsilon(1e-6));
    CHECK(rl.lhs == Catch::Approx(0.05 / 4.0).epsilon(1e-5));
    CHECK(rl.bound_ratio <= 4.0);

    std::mt19937 rng(91);
    std::uniform_real_distribution<double> D(0.01, 0.3), Ph(0.0, 2 * kw::pi);
    for (int rep = 0; rep < 50; ++rep) {
        double d1 = D(rng), d2 = D(rng), ph = Ph(rng), sl = D(rng);
        for (int i = 0; i <= 2000; ++i)
            f[i] = d1 * std::sin(2 * kw::pi * x[i] + ph) + d2 * std::cos(4 * kw::pi * x[i]) +
                   sl * (x[i] - 0.5);
        KoreyResult r = korey_check(x, f);
        REQUIRE(r.in_range);
        CHECK(r.bound_ratio <= 4.0);
    }

    std::fill(f.begin(), f.end(), 0.0);
    f[500] = 30.0;  // wild spike: eps out of range is flagged, not asserted
    for (int i = 0; i <= 2000; ++i) f[i] += 2.5 * std::sin(2 * kw::pi * x[i]);
    KoreyResult big = korey_check(x, f);
    CHECK_FALSE(big.in_range);
}
