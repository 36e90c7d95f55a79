// Szego criterion reports and the series-convergence detector shared by the
// canonical, string and dirac criteria.
#pragma once

#include <optional>
#include <sstream>

#include "kw/common.hpp"

namespace kw {

enum class Verdict { Szego, NotSzego, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Szego: return "Szego";
        case Verdict::NotSzego: return "NotSzego";
        default: return "Inconclusive";
    }
}

struct SzegoReport {
    std::vector<double> terms;
    std::vector<double> partial_sums;
    Verdict verdict = Verdict::Inconclusive;
    std::string reason;
    std::vector<double> tail_ratios;  // increments ratios over the doubling ladder
    std::vector<double> partition;    // the eta-grid the criterion was run with
    double fitted_p = std::numeric_limits<double>::quiet_NaN();
    double fitted_q = std::numeric_limits<double>::quiet_NaN();
    bool resolution_warning = false;  // oscillatory quadrature under-resolved
    int surrogate_windows = 0;        // windows evaluated by asymptotic surrogates
    bool applicable = true;           // dispersion criterion precondition
    std::string truncation_note;      // records the truncation/tail assumption used
};

namespace detail {

// Verdict for sum(terms):
//
// Stage 1 is the declared doubling heuristic: partial sums at N/2^k for five
// doublings; Szego when tail increments vanish or decay with ratio <= 0.7
// over the last three doublings, NotSzego when a term exceeds 1e3 or the
// increments are non-decreasing.
//
// Stage 2 handles the slowly-varying remainder: bin the term tail
// geometrically, fit mean(term) ~ c * n^{-p} * log(n)^{-q}, and place (p, q)
// against the convergence boundary of sum n^{-p} log^{-q} (p > 1, or p = 1
// and q > 1).  Margins below keep a genuine Inconclusive band.
inline void classify_series(SzegoReport& rep) {
    const std::vector<double>& raw = rep.terms;
    size_t n = raw.size();
    rep.partial_sums.resize(n);
    double s = 0;
    double max_term = 0;
    for (size_t i = 0; i < n; ++i) {
        s += std::max(raw[i], 0.0);
        rep.partial_sums[i] = s;
        max_term = std::max(max_term, raw[i]);
    }
    if (n == 0) {
        rep.verdict = Verdict::Inconclusive;
        rep.reason = "no terms computed";
        return;
    }
    if (max_term > 1e3) {
        rep.verdict = Verdict::NotSzego;
        rep.reason = "a single term exceeds 1e3";
        return;
    }

    const double total = rep.partial_sums.back();
    const double eps = 1e-10 * std::max(1.0, total);
    auto S = [&](size_t k) { return k == 0 ? 0.0 : rep.partial_sums[k - 1]; };

    if (n >= 64) {
        // checkpoints n/32, n/16, ..., n
        std::vector<double> inc;
        for (int k = 1; k <= 5; ++k) {
            size_t lo = n >> (6 - k), hi = n >> (5 - k);
            inc.push_back(S(hi) - S(lo));
        }
        rep.tail_ratios.clear();
        for (int k = 1; k < 5; ++k)
            rep.tail_ratios.push_back(inc[k - 1] > eps ? inc[k] / inc[k - 1]
                                                       : (inc[k] > eps ? inf : 0.0));
        bool all_tiny = true;
        for (double v : inc) all_tiny = all_tiny && v <= eps;
        if (all_tiny) {
            rep.verdict = Verdict::Szego;
            rep.reason = "partial sums converged (tail increments below tolerance)";
            return;
        }
        bool decay = true, nondecreasing = true;
        for (int k = 2; k <= 4; ++k) {
            double r = rep.tail_ratios[k - 1];
            if (!(r <= 0.7)) decay = false;
            if (!(r >= 0.999) || inc[k] <= eps) nondecreasing = false;
        }
        if (decay) {
            rep.verdict = Verdict::Szego;
            rep.reason = "tail increments decay with ratio <= 0.7 over the last 3 doublings";
            return;
        }
        if (nondecreasing) {
            rep.verdict = Verdict::NotSzego;
            rep.reason = "tail increments non-decreasing";
            return;
        }
    } else {
        if (total <= eps || S(n) - S(3 * n / 4) <= eps) {
            rep.verdict = Verdict::Szego;
            rep.reason = "partial sums converged (short series)";
        } else {
            rep.verdict = Verdict::Inconclusive;
            rep.reason = "series too short for the tail detector";
        }
        return;
    }

    // stage 2: binned tail fit
    size_t n_lo = std::max<size_t>(8, n / 1024);
    if (n < 512 || n_lo + 8 >= n) {
        rep.verdict = Verdict::Inconclusive;
        rep.reason = "doubling heuristic inconclusive; series too short for tail fit";
        return;
    }
    const int nbins = 28;
    std::vector<double> bx, bu, by;
    double ratio = double(n) / double(n_lo);
    bool tail_vanishes = true;
    for (int j = 0; j < nbins; ++j) {
        size_t a = (size_t)std::floor(n_lo * std::pow(ratio, double(j) / nbins));
        size_t b = (size_t)std::floor(n_lo * std::pow(ratio, double(j + 1) / nbins));
        b = std::min(b, n);
        if (b <= a) continue;
        double m = 0;
        for (size_t i = a; i < b; ++i) m += std::max(raw[i], 0.0);
        m /= double(b - a);
        double center = std::sqrt(double(a) * double(b));
        if (j >= nbins / 2 && m > eps) tail_vanishes = false;
        if (m > 0) {
            bx.push_back(std::log(center));
            bu.push_back(std::log(std::log(center)));
            by.push_back(std::log(m));
        }
    }
    if (tail_vanishes) {
        rep.verdict = Verdict::Szego;
        rep.reason = "term tail vanishes";
        return;
    }
    if (bx.size() < 6) {
        rep.verdict = Verdict::Inconclusive;
        rep.reason = "not enough populated bins for the tail fit";
        return;
    }
    // least squares  by = a0 - p*bx - q*bu  (centered, tiny ridge)
    size_t m = bx.size();
    double mx = 0, mu = 0, my = 0;
    for (size_t i = 0; i < m; ++i) { mx += bx[i]; mu += bu[i]; my += by[i]; }
    mx /= m; mu /= m; my /= m;
    double sxx = 1e-9, suu = 1e-9, sxu = 0, sxy = 0, suy = 0;
    for (size_t i = 0; i < m; ++i) {
        double dx = bx[i] - mx, du = bu[i] - mu, dy = by[i] - my;
        sxx += dx * dx; suu += du * du; sxu += dx * du;
        sxy += dx * dy; suy += du * dy;
    }
    double det = sxx * suu - sxu * sxu;
    double p, q;
    if (std::abs(det) < 1e-12 * sxx * suu) {
        p = -sxy / sxx;  // collinear: power fit only
        q = 0;
    } else {
        p = -(suu * sxy - sxu * suy) / det;
        q = -(sxx * suy - sxu * sxy) / det;
    }
    rep.fitted_p = p;
    rep.fitted_q = q;
    std::ostringstream os;
    os.precision(3);
    os << "tail fit term ~ n^-" << p << " log^-" << q << " -> ";
    if (p >= 1.10) {
        rep.verdict = Verdict::Szego;
        os << "summable";
    } else if (p <= 0.90) {
        rep.verdict = Verdict::NotSzego;
        os << "divergent";
    } else if (q >= 1.5) {
        rep.verdict = Verdict::Szego;
        os << "summable (log refinement)";
    } else if (q <= 1.2) {
        rep.verdict = Verdict::NotSzego;
        os << "divergent (log refinement)";
    } else {
        rep.verdict = Verdict::Inconclusive;
        os << "within the boundary band";
    }
    rep.reason = os.str();
}

}  // namespace detail
}  // namespace kw
