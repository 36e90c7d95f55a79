// Command handlers behind the kw CLI.  Kept in a header so tests can drive
// the exact code path the binary runs.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "kw/io.hpp"

namespace kw::cli {

struct RunConfig {
    std::string command;
    std::string input_path;
    json input;  // inline object (wins over input_path when non-null)
    std::string out_dir = ".";
    double h = 0.01;
    double dt = 0;  // 0: auto from the CFL bound
    double t_end = 10;
    double lambda_max = 1000;
    int lambda_points = 1200;
    int n_max = 10000;
    double eps = 1e-2;           // spectral smoothing
    double eps_boundary = 1e-3;  // boundary-value regularization
    double ell = 2;              // near-front window width
    double front0 = 0;           // 0: detect from u0 support
    double partition_step = 1;
    double b = 5;                // Cesaro window
    double T = 200;              // Cesaro horizon
    unsigned seed = 0;
    bool numeric_wvn = false;
    double u0_center = 3, u0_width = 1, u0_amp = 1;
    double alpha_min = -3.5, alpha_max = 4.5, alpha_step = 0.25;
    double beta_min = -1, beta_max = 2.5, beta_step = 0.25;
    bool spectral_check = false;
};

inline int log_level() {
    const char* v = std::getenv("KW_LOG");
    if (!v) return 0;
    std::string s(v);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[kw] " << msg << "\n";
}

inline RunConfig config_from_json(const json& j) {
    RunConfig c;
    if (j.contains("input")) {
        if (j.at("input").is_string()) c.input_path = j.at("input").get<std::string>();
        else c.input = j.at("input");
    }
    c.out_dir = j.value("out", std::string("."));
    c.h = j.value("h", c.h);
    c.dt = j.value("dt", c.dt);
    c.t_end = j.value("t_end", c.t_end);
    c.lambda_max = j.value("lambda_max", c.lambda_max);
    c.lambda_points = j.value("lambda_points", c.lambda_points);
    c.n_max = j.value("n_max", c.n_max);
    c.eps = j.value("eps", c.eps);
    c.eps_boundary = j.value("eps_boundary", c.eps_boundary);
    c.ell = j.value("ell", c.ell);
    c.front0 = j.value("front0", c.front0);
    c.partition_step = j.value("partition_step", c.partition_step);
    c.b = j.value("b", c.b);
    c.T = j.value("T", c.T);
    c.seed = j.value("seed", 0u);
    c.numeric_wvn = j.value("numeric_wvn", false);
    c.spectral_check = j.value("spectral_check", false);
    if (j.contains("u0")) {
        c.u0_center = j.at("u0").value("center", c.u0_center);
        c.u0_width = j.at("u0").value("width", c.u0_width);
        c.u0_amp = j.at("u0").value("amp", c.u0_amp);
    }
    if (j.contains("alpha_grid")) {
        c.alpha_min = j.at("alpha_grid").value("min", c.alpha_min);
        c.alpha_max = j.at("alpha_grid").value("max", c.alpha_max);
        c.alpha_step = j.at("alpha_grid").value("step", c.alpha_step);
    }
    if (j.contains("beta_grid")) {
        c.beta_min = j.at("beta_grid").value("min", c.beta_min);
        c.beta_max = j.at("beta_grid").value("max", c.beta_max);
        c.beta_step = j.at("beta_grid").value("step", c.beta_step);
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const char* known[] = {"input", "out", "h", "dt", "t_end", "lambda_max",
                                      "lambda_points", "n_max", "eps", "eps_boundary", "ell",
                                      "front0", "partition_step", "b", "T", "seed", "numeric_wvn",
                                      "spectral_check", "u0", "alpha_grid", "beta_grid", "command"};
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw validation_error("config: unknown key '" + it.key() + "'");
    }
    return c;
}

namespace detail {

inline json input_json(const RunConfig& c) {
    if (!c.input.is_null()) return c.input;
    if (c.input_path.empty()) throw validation_error("config: missing 'input'");
    return load_json_file(c.input_path);
}

inline std::string out_path(const RunConfig& c, const std::string& name) {
    std::filesystem::path dir(c.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory " + c.out_dir);
    return (dir / name).string();
}

// smooth compactly supported bump around center with half-width 'width'
inline std::vector<double> bump(const std::vector<double>& xs, double center, double width,
                                double amp) {
    std::vector<double> u(xs.size(), 0.0);
    for (size_t i = 0; i < xs.size(); ++i) {
        double r = (xs[i] - center) / width;
        if (std::abs(r) < 1.0) u[i] = amp * std::exp(1.0 - 1.0 / (1.0 - r * r));
    }
    return u;
}

inline void write_verdict_json(const RunConfig& c, const std::string& name, const SzegoReport& rep,
                               const json& extra = json::object()) {
    json j;
    j["verdict"] = to_string(rep.verdict);
    j["reason"] = rep.reason;
    j["terms"] = rep.terms.size();
    j["tail_ratios"] = rep.tail_ratios;
    j["truncation"] = rep.truncation_note;
    if (std::isfinite(rep.fitted_p)) {
        j["fitted_p"] = rep.fitted_p;
        j["fitted_q"] = rep.fitted_q;
    }
    if (rep.surrogate_windows) j["surrogate_windows"] = rep.surrogate_windows;
    if (rep.resolution_warning) j["resolution_warning"] = true;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    std::ofstream out(out_path(c, name));
    if (!out) throw io_error("cannot write " + name);
    out << j.dump(2) << "\n";
}

inline std::vector<double> lambda_grid_of(const RunConfig& c) {
    // uniform in sqrt(lambda): resolves the oscillation in the synthesis
    std::vector<double> g(c.lambda_points);
    double smax = std::sqrt(c.lambda_max);
    for (int i = 0; i < c.lambda_points; ++i) {
        double s = smax * (i + 1.0) / c.lambda_points;
        g[i] = s * s;
    }
    return g;
}

}  // namespace detail

inline int cmd_classify_string(const RunConfig& c) {
    MassDistribution M = string_from_json(detail::input_json(c));
    double eta_max = string_eikonal(M, M.xi_max);
    int n = std::min<int>(c.n_max + 2, (int)std::floor(eta_max / c.partition_step));
    if (n < 3) throw validation_error("classify-string: truncation too short for the partition");
    std::vector<double> etas(n);
    for (int i = 0; i < n; ++i) etas[i] = i * c.partition_step;
    SzegoReport rep = string_szego_criterion(M, etas);

    CsvWriter csv(detail::out_path(c, "string_terms.csv"));
    csv.comment("kw classify-string; " + rep.truncation_note);
    csv.header("n,xi_n,M_xi_n,term,partial_sum");
    auto p = kw::detail::StringPrefix::build(M);
    for (size_t i = 0; i < rep.terms.size(); ++i) {
        double xi = p.eikonal_inverse(etas[i]);
        csv.row((long)i, xi, p.mass_at(xi), rep.terms[i], rep.partial_sums[i]);
    }
    detail::write_verdict_json(c, "string_verdict.json", rep);
    log_info("classify-string: " + std::string(to_string(rep.verdict)));
    return 0;
}

inline int cmd_classify_canonical(const RunConfig& c) {
    Hamiltonian H = hamiltonian_from_json(detail::input_json(c));
    double eta_max = eikonal(H, H.tau_max);
    int n = std::min<int>(c.n_max + 2, (int)std::floor(eta_max / c.partition_step));
    if (n < 3) throw validation_error("classify-canonical: truncation too short");
    std::vector<double> alphas(n);
    for (int i = 0; i < n; ++i) alphas[i] = i * c.partition_step;
    SzegoReport rep = szego_sum(H, alphas);
    CsvWriter csv(detail::out_path(c, "canonical_terms.csv"));
    csv.comment("kw classify-canonical; " + rep.truncation_note);
    csv.header("n,L_lo,L_hi,term,partial_sum");
    for (size_t i = 0; i < rep.terms.size(); ++i)
        csv.row((long)i, eikonal_inverse(H, alphas[i]), eikonal_inverse(H, alphas[i + 2]),
                rep.terms[i], rep.partial_sums[i]);
    detail::write_verdict_json(c, "canonical_verdict.json", rep);
    return 0;
}

inline int cmd_classify_dirac(const RunConfig& c) {
    DiracPotential Q = potential_from_json(detail::input_json(c));
    SzegoReport rep = dirac_szego_sum(Q, c.n_max);
    bool scalar = Q.form != DiracForm::General;
    SzegoReport scal;
    if (scalar) scal = dirac_special_criterion(Q, c.n_max);
    CsvWriter csv(detail::out_path(c, "dirac_terms.csv"));
    csv.comment("kw classify-dirac; " + rep.truncation_note);
    csv.header(scalar ? "n,term,partial_sum,term_scalar" : "n,term,partial_sum");
    for (size_t i = 0; i < rep.terms.size(); ++i) {
        if (scalar) csv.row((long)i, rep.terms[i], rep.partial_sums[i], scal.terms[i]);
        else csv.row((long)i, rep.terms[i], rep.partial_sums[i]);
    }
    json extra;
    if (scalar) extra["scalar_verdict"] = to_string(scal.verdict);
    detail::write_verdict_json(c, "dirac_verdict.json", rep, extra);
    return 0;
}

inline int cmd_classify_wvn(const RunConfig& c) {
    if (!(c.alpha_step > 0) || !(c.beta_step > 0) || c.alpha_max < c.alpha_min ||
        c.beta_max < c.beta_min)
        throw validation_error("classify-wvn: empty grid");
    CsvWriter csv(detail::out_path(c, "wvn_map.csv"));
    csv.comment("kw classify-wvn; open region A1 u A2 u A3");
    csv.header("alpha,beta,region,numeric_verdict");
    int na = (int)std::floor((c.alpha_max - c.alpha_min) / c.alpha_step + 1e-9) + 1;
    int nb = (int)std::floor((c.beta_max - c.beta_min) / c.beta_step + 1e-9) + 1;
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
            double a = c.alpha_min + i * c.alpha_step;
            double b = c.beta_min + j * c.beta_step;
            RegionVerdict v = wvn_region(a, b);
            std::string numeric = "";
            if (c.numeric_wvn) {
                SzegoReport rep = wvn_numeric_check(a, b, c.n_max);
                numeric = to_string(rep.verdict);
            }
            csv.row(a, b, to_string(v.region), numeric);
        }
    }
    return 0;
}

inline int cmd_simulate(const RunConfig& c) {
    MassDistribution M = string_from_json(detail::input_json(c));
    LatticeString lat = discretize(M, c.h, M.xi_max);
    std::vector<double> u0 = detail::bump(lat.xi, c.u0_center, c.u0_width, c.u0_amp);
    double front0 = c.front0 > 0 ? c.front0 : c.u0_center + c.u0_width;
    double dt = c.dt > 0 ? c.dt : 0.9 * cfl_dt_bound(lat);
    WaveState st = make_wave_state(lat, u0, dt);

    int n_report = 64;
    double chunk = c.t_end / n_report;
    long per = std::max<long>(1, (long)std::llround(chunk / dt));

    CsvWriter diag(detail::out_path(c, "diagnostics.csv"));
    diag.comment("kw simulate; h=" + fmt(c.h) + " dt=" + fmt(dt) + " xi_max=" + fmt(M.xi_max));
    diag.comment("front_predicted = L^(S)_{T(front0)+t} (eikonal reading of the wavefront law)");
    diag.header("t,front_predicted,front_detected,near_front_mass,energy");
    auto p = kw::detail::StringPrefix::build(M);
    double a = p.eikonal(front0);
    for (int r = 0; r <= n_report; ++r) {
        if (r) step_leapfrog(lat, st, per);
        double fp = p.eikonal_inverse(a + st.t);
        double fd = detect_front(lat, st);
        double nf = st.t >= c.ell ? near_front_mass(M, lat, st, c.ell, front0) : 0.0;
        diag.row(st.t, fp < inf ? fp : -1.0, fd, nf, energy(lat, st));
    }

    CsvWriter snap(detail::out_path(c, "snapshot.csv"));
    snap.comment("kw simulate; final state");
    snap.header("t,xi,u,v,cumulative_mass");
    double cm = 0;
    for (size_t i = 0; i < lat.xi.size(); ++i) {
        cm += lat.mass[i];
        snap.row(st.t, lat.xi[i], st.u[i], st.v[i], cm);
    }

    if (c.spectral_check) {
        auto sp = evolve_spectral(M, lat, u0, st.t, detail::lambda_grid_of(c), c.eps);
        double num = 0, den = 0;
        for (size_t i = 0; i < lat.xi.size(); ++i) {
            num += lat.mass[i] * sqr(st.u[i] - sp.u[i]);
            den += lat.mass[i] * sqr(st.u[i]);
        }
        json j;
        j["relative_l2_difference"] = den > 0 ? std::sqrt(num / den) : 0.0;
        j["tail_share"] = sp.tail_share;
        std::ofstream out(detail::out_path(c, "spectral_check.json"));
        out << j.dump(2) << "\n";
    }
    return 0;
}

inline int cmd_front(const RunConfig& c) {
    MassDistribution M = string_from_json(detail::input_json(c));
    double front0 = c.front0 > 0 ? c.front0 : c.u0_center + c.u0_width;
    CsvWriter csv(detail::out_path(c, "front.csv"));
    csv.comment("kw front; f_t = L^(S)_{T(front0)+t}; the literal L^(S)_{front0+t} reading");
    csv.comment("of the wavefront theorem differs unless T(front0) = front0");
    csv.header("t,front_predicted");
    auto p = kw::detail::StringPrefix::build(M);
    double a = p.eikonal(front0);
    int n = 64;
    for (int i = 0; i <= n; ++i) {
        double t = c.t_end * i / n;
        double f = p.eikonal_inverse(a + t);
        csv.row(t, f < inf ? f : -1.0);
    }
    return 0;
}

inline int cmd_spectrum(const RunConfig& c) {
    MassDistribution M = string_from_json(detail::input_json(c));
    auto grid = detail::lambda_grid_of(c);
    DensityEstimate est = spectral_density_estimate(M, grid, c.eps);
    CsvWriter csv(detail::out_path(c, "spectrum.csv"));
    csv.comment("kw spectrum; eps=" + fmt(c.eps) + " xi_max=" + fmt(M.xi_max) +
                (est.truncation_warning ? " [truncation warning]" : ""));
    csv.header("lambda,density,peak_flag");
    std::vector<char> pk(grid.size(), 0);
    for (int k : est.peak_flags) pk[k] = 1;
    for (size_t k = 0; k < grid.size(); ++k)
        csv.row(grid[k], est.sigma.density[k], (int)pk[k]);
    return 0;
}

inline int cmd_profile(const RunConfig& c) {
    MassDistribution M = string_from_json(detail::input_json(c));
    LatticeString lat = discretize(M, c.h, M.xi_max);
    std::vector<double> u0 = detail::bump(lat.xi, c.u0_center, c.u0_width, c.u0_amp);
    double eta_max = string_eikonal(M, M.xi_max);
    int n_eta = (int)std::ceil(2.0 * eta_max / c.h);
    n_eta = std::min(n_eta, 400000);
    std::vector<double> eta(n_eta);
    for (int i = 0; i < n_eta; ++i) eta[i] = -eta_max + 2.0 * eta_max * i / (n_eta - 1);
    ProfileResult pr = traveling_wave_profile(M, lat, u0, eta, detail::lambda_grid_of(c), c.eps,
                                              c.eps_boundary);
    CsvWriter csv(detail::out_path(c, "profile.csv"));
    csv.comment("kw profile; ||G||^2=" + fmt(pr.norm_G_sq) +
                " 2||g chi_ac||^2_sigma=" + fmt(pr.norm_2g_ac_sq));
    csv.comment("classification: " + std::string(to_string(pr.classification.verdict)));
    csv.header("eta,G");
    for (size_t j = 0; j < pr.eta.size(); ++j) csv.row(pr.eta[j], pr.G[j]);
    return 0;
}

inline int cmd_free_dirac(const RunConfig& c) {
    json j = detail::input_json(c);
    DiracState Z;
    Z.dtau = j.value("dtau", 0.01);
    double lo = j.value("support_lo", 0.0), hi = j.value("support_hi", 1.0);
    double span = j.value("span", hi + c.t_end + 1.0);
    long n = (long)std::llround(span / Z.dtau) + 1;
    Z.z1.assign(n, 0.0);
    Z.z2.assign(n, 0.0);
    for (long i = 0; i < n; ++i) {
        double tau = i * Z.dtau;
        if (tau >= lo && tau <= hi) Z.z1[i] = 1.0;
    }
    DiracState out = free_dirac_evolution(Z, c.t_end);
    CsvWriter csv(detail::out_path(c, "free_dirac.csv"));
    csv.comment("kw free-dirac; t=" + fmt(c.t_end) + " dtau=" + fmt(Z.dtau));
    csv.header("tau,re_z1,im_z1,re_z2,im_z2");
    for (size_t i = 0; i < out.z1.size(); ++i)
        csv.row(i * out.dtau, out.z1[i].real(), out.z1[i].imag(), out.z2[i].real(),
                out.z2[i].imag());
    return 0;
}

inline int run_command(const RunConfig& c) {
    log_info("command: " + c.command);
    if (c.command == "classify-string") return cmd_classify_string(c);
    if (c.command == "classify-canonical") return cmd_classify_canonical(c);
    if (c.command == "classify-dirac") return cmd_classify_dirac(c);
    if (c.command == "classify-wvn") return cmd_classify_wvn(c);
    if (c.command == "simulate") return cmd_simulate(c);
    if (c.command == "front") return cmd_front(c);
    if (c.command == "profile") return cmd_profile(c);
    if (c.command == "spectrum") return cmd_spectrum(c);
    if (c.command == "free-dirac") return cmd_free_dirac(c);
    throw validation_error("unknown command: " + c.command);
}

inline int run_checked(const RunConfig& c) {
    try {
        return run_command(c);
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const kw::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 1;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace kw::cli
