// JSON (de)serialization for the domain objects and small CSV helpers.
#pragma once

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "kw/dirac.hpp"
#include "kw/evolution.hpp"

namespace kw {

using json = nlohmann::json;

inline json to_json(const SpectralMeasure& mu) {
    json j;
    j["support"] = mu.support == Support::FullLine ? "line" : "halfline";
    j["grid"] = mu.grid;
    j["density"] = mu.density;
    j["atoms"] = json::array();
    for (const Atom& a : mu.atoms) j["atoms"].push_back({{"x", a.x}, {"m", a.m}});
    if (mu.tail) j["tail"] = {{"p", mu.tail->p}, {"c", mu.tail->c}};
    return j;
}

inline SpectralMeasure measure_from_json(const json& j) {
    SpectralMeasure mu;
    std::string sup = j.at("support").get<std::string>();
    if (sup == "line") mu.support = Support::FullLine;
    else if (sup == "halfline") mu.support = Support::HalfLine;
    else throw validation_error("measure: support must be 'line' or 'halfline'");
    mu.grid = j.at("grid").get<std::vector<double>>();
    mu.density = j.at("density").get<std::vector<double>>();
    if (j.contains("atoms"))
        for (const auto& a : j.at("atoms"))
            mu.atoms.push_back({a.at("x").get<double>(), a.at("m").get<double>()});
    if (j.contains("tail"))
        mu.tail = TailModel{j.at("tail").at("p").get<double>(), j.at("tail").at("c").get<double>()};
    detail::validate(mu);
    return mu;
}

inline json to_json(const Hamiltonian& H) {
    json j;
    j["breaks"] = H.breaks;
    j["cells"] = json::array();
    for (const SymMat2& c : H.cells)
        j["cells"].push_back({{"h1", c.h1}, {"h2", c.h2}, {"h", c.h}});
    j["tau_max"] = H.tau_max;
    j["tail"] = H.extend_last_cell ? "last-cell" : "none";
    return j;
}

inline Hamiltonian hamiltonian_from_json(const json& j) {
    Hamiltonian H;
    H.breaks = j.at("breaks").get<std::vector<double>>();
    for (const auto& c : j.at("cells"))
        H.cells.push_back({c.at("h1").get<double>(), c.at("h2").get<double>(),
                           c.value("h", 0.0)});
    H.tau_max = j.at("tau_max").get<double>();
    if (j.contains("tail")) H.extend_last_cell = j.at("tail").get<std::string>() != "none";
    detail::validate(H);
    return H;
}

inline json to_json(const MassDistribution& M) {
    json j;
    j["density"] = json::array();
    for (size_t k = 0; k < M.density.size(); ++k)
        j["density"].push_back({{"to", M.density_breaks[k + 1]}, {"rho", M.density[k]}});
    j["atoms"] = json::array();
    for (const StringAtom& a : M.atoms) j["atoms"].push_back({{"xi", a.xi}, {"m", a.m}});
    if (M.length == inf) j["L"] = "inf";
    else j["L"] = M.length;
    j["xi_max"] = M.xi_max;
    return j;
}

namespace detail {

// named delta-sequences for the two-material generator
inline std::vector<double> delta_preset(const std::string& name, int cells) {
    std::vector<double> d(cells);
    for (int n = 0; n < cells; ++n) {
        double k = n + 1;
        if (name == "1/(n log(e+n))") d[n] = std::min(1.0, 1.0 / (k * std::log(std::exp(1.0) + k)));
        else if (name == "1/(n log^2(e+n))") d[n] = std::min(1.0, 1.0 / (k * sqr(std::log(std::exp(1.0) + k))));
        else if (name == "1/sqrt(n+1)") d[n] = 1.0 / std::sqrt(k);
        else if (name == "1/(n+1)^2") d[n] = 1.0 / (k * k);
        else throw validation_error("unknown delta preset: " + name);
    }
    return d;
}

}  // namespace detail

inline MassDistribution string_from_json(const json& j) {
    if (j.contains("two_material")) {
        const json& t = j.at("two_material");
        std::vector<double> delta;
        if (t.at("delta").is_string())
            delta = detail::delta_preset(t.at("delta").get<std::string>(), t.at("cells").get<int>());
        else
            delta = t.at("delta").get<std::vector<double>>();
        return make_two_material_string(t.at("a").get<double>(), t.at("b").get<double>(), delta,
                                        t.value("extra_tail", 2.0));
    }
    MassDistribution M;
    M.density_breaks.push_back(0);
    for (const auto& p : j.at("density")) {
        M.density_breaks.push_back(p.at("to").get<double>());
        M.density.push_back(p.at("rho").get<double>());
    }
    if (j.contains("atoms"))
        for (const auto& a : j.at("atoms"))
            M.atoms.push_back({a.at("xi").get<double>(), a.at("m").get<double>()});
    if (j.at("L").is_string()) {
        if (j.at("L").get<std::string>() != "inf") throw validation_error("string: L must be a number or 'inf'");
        M.length = inf;
    } else {
        M.length = j.at("L").get<double>();
    }
    M.xi_max = j.value("xi_max", std::min(M.length, M.density_breaks.back()));
    detail::validate(M);
    return M;
}

inline json to_json(const DiracPotential& Q) {
    auto qj = [](const ScalarPotential& q) {
        json j;
        if (q.kind == ScalarPotential::Kind::PiecewiseConstant) {
            j["kind"] = "pc";
            j["breaks"] = q.breaks;
            j["values"] = q.values;
        } else {
            j["kind"] = "wvn";
            j["alpha"] = q.alpha;
            j["beta"] = q.beta;
            j["tau0"] = q.tau0;
        }
        return j;
    };
    json j;
    j["form"] = Q.form == DiracForm::Diagonal ? "diagonal"
                : Q.form == DiracForm::Antidiagonal ? "antidiagonal" : "general";
    if (Q.form == DiracForm::General) {
        j["q1"] = qj(Q.q1);
        j["q2"] = qj(Q.q2);
    } else {
        j["q"] = qj(Q.scalar_q());
    }
    j["tau_max"] = Q.tau_max;
    return j;
}

inline ScalarPotential scalar_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "pc")
        return ScalarPotential::pc(j.at("breaks").get<std::vector<double>>(),
                                   j.at("values").get<std::vector<double>>());
    if (kind == "wvn")
        return ScalarPotential::wvn(j.at("alpha").get<double>(), j.at("beta").get<double>(),
                                    j.value("tau0", 1.0));
    throw validation_error("potential: kind must be 'pc' or 'wvn'");
}

inline DiracPotential potential_from_json(const json& j) {
    std::string form = j.at("form").get<std::string>();
    double tau_max = j.at("tau_max").get<double>();
    DiracPotential Q;
    if (form == "diagonal") Q = DiracPotential::diagonal(scalar_from_json(j.at("q")), tau_max);
    else if (form == "antidiagonal") Q = DiracPotential::antidiagonal(scalar_from_json(j.at("q")), tau_max);
    else if (form == "general") {
        const json& a = j.contains("q1") ? j.at("q1") : j.at("q");
        const json& b = j.contains("q2") ? j.at("q2") : j.at("q");
        Q = DiracPotential::general(scalar_from_json(a), scalar_from_json(b), tau_max);
    } else {
        throw validation_error("potential: form must be diagonal/antidiagonal/general");
    }
    detail::validate(Q);
    return Q;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw validation_error(std::string("malformed JSON in ") + path + ": " + e.what());
    }
}

// deterministic number formatting for CSV output
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const std::string& path) : out(path) {
        if (!out) throw io_error("cannot write " + path);
    }
    void comment(const std::string& line) { out << "# " << line << "\n"; }
    void header(const std::string& cols) { out << cols << "\n"; }
    template <class... Ts>
    void row(Ts... vals) {
        bool first = true;
        ((out << (first ? "" : ","), first = false, put(vals)), ...);
        out << "\n";
    }

  private:
    void put(double v) { out << fmt(v); }
    void put(int v) { out << v; }
    void put(long v) { out << v; }
    void put(size_t v) { out << v; }
    void put(const char* s) { out << s; }
    void put(const std::string& s) { out << s; }
};

}  // namespace kw
