#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kw/cli.hpp"

using namespace kw;
namespace fs = std::filesystem;

namespace {

fs::path sandbox() {
    fs::path p = fs::temp_directory_path() / "kw_io_test";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(KW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("json round trips") {
    SpectralMeasure mu;
    mu.support = Support::FullLine;
    mu.grid = {-10.0, -2.0, 0.0, 2.0, 10.0};
    mu.density = {0.5, 1.0, 2.0, 1.0, 0.5};
    mu.atoms = {{-1.0, 0.25}, {3.0, 1.5}};
    mu.tail = TailModel{-2.0, 1.0};
    SpectralMeasure mu2 = measure_from_json(to_json(mu));
    CHECK(mu2.grid == mu.grid);
    CHECK(mu2.density == mu.density);
    CHECK(mu2.atoms.size() == 2);
    CHECK(mu2.tail->p == -2.0);

    Hamiltonian H;
    H.breaks = {0.0, 1.5};
    H.cells = {{0.5, 0.5, 0.0}, {1.0, 2.0, -0.5}};
    H.tau_max = 4.0;
    Hamiltonian H2 = hamiltonian_from_json(to_json(H));
    CHECK(H2.breaks == H.breaks);
    CHECK(H2.cells[1].h == -0.5);
    CHECK(H2.extend_last_cell);

    MassDistribution M;
    M.density_breaks = {0.0, 2.0, 5.0};
    M.density = {1.0, 4.0};
    M.atoms = {{1.0, 3.0}};
    M.length = inf;
    M.xi_max = 5.0;
    MassDistribution M2 = string_from_json(to_json(M));
    CHECK(M2.density == M.density);
    CHECK(M2.length == inf);
    CHECK(M2.atoms[0].m == 3.0);

    DiracPotential Q = DiracPotential::diagonal(ScalarPotential::wvn(0.5, 1.0), 100);
    DiracPotential Q2 = potential_from_json(to_json(Q));
    CHECK(Q2.form == DiracForm::Diagonal);
    CHECK(Q2.q1.alpha == 0.5);

    json gen = {{"two_material",
                 {{"a", 2.0}, {"b", 1.0}, {"delta", "1/(n+1)^2"}, {"cells", 10}}}};
    MassDistribution G = string_from_json(gen);
    CHECK(G.xi_max == Catch::Approx(12.0));  // 10 cells + default extra tail 2
}

TEST_CASE("json loading errors") {
    CHECK_THROWS_AS(load_json_file("/nonexistent/kw.json"), io_error);
    fs::path bad = sandbox() / "bad.json";
    spit(bad, "{ not json");
    CHECK_THROWS_AS(load_json_file(bad.string()), validation_error);
    CHECK_THROWS_AS(measure_from_json(json{{"support", "ring"}}), validation_error);
}

TEST_CASE("cli: classify-string verdicts and determinism") {
    fs::path dir = sandbox();
    spit(dir / "hom.json", R"({"density":[{"to":300,"rho":1}],"atoms":[],"L":"inf","xi_max":300})");
    json cfg = {{"input", (dir / "hom.json").string()},
                {"out", (dir / "out1").string()},
                {"n_max", 200}};
    spit(dir / "cfg1.json", cfg.dump());
    REQUIRE(run_cli("classify-string --config " + (dir / "cfg1.json").string()) == 0);
    json verdict = load_json_file((dir / "out1" / "string_verdict.json").string());
    CHECK(verdict.at("verdict") == "Szego");

    // byte-identical reruns
    cfg["out"] = (dir / "out2").string();
    spit(dir / "cfg2.json", cfg.dump());
    REQUIRE(run_cli("classify-string --config " + (dir / "cfg2.json").string()) == 0);
    CHECK(slurp(dir / "out1" / "string_terms.csv") == slurp(dir / "out2" / "string_terms.csv"));
}

TEST_CASE("cli: exit codes") {
    fs::path dir = sandbox();
    // malformed config -> 1
    spit(dir / "broken.json", "{");
    CHECK(run_cli("classify-string --config " + (dir / "broken.json").string()) == 1);
    // missing config file -> 2
    CHECK(run_cli("classify-string --config " + (dir / "missing.json").string()) == 2);
    // missing input file -> 2
    json cfg = {{"input", (dir / "noinput.json").string()}, {"out", (dir / "o").string()}};
    spit(dir / "cfg3.json", cfg.dump());
    CHECK(run_cli("classify-string --config " + (dir / "cfg3.json").string()) == 2);
    // malformed input JSON -> 1
    spit(dir / "badinput.json", "]");
    json cfg4 = {{"input", (dir / "badinput.json").string()}, {"out", (dir / "o").string()}};
    spit(dir / "cfg4.json", cfg4.dump());
    CHECK(run_cli("classify-string --config " + (dir / "cfg4.json").string()) == 1);
    // CFL refusal -> 3
    spit(dir / "hom2.json", R"({"density":[{"to":20,"rho":1}],"atoms":[],"L":"inf","xi_max":20})");
    json cfg5 = {{"input", (dir / "hom2.json").string()},
                 {"out", (dir / "o5").string()},
                 {"dt", 1.0},
                 {"t_end", 2.0},
                 {"u0", {{"center", 3.0}, {"width", 1.0}}}};
    spit(dir / "cfg5.json", cfg5.dump());
    CHECK(run_cli("simulate --config " + (dir / "cfg5.json").string()) == 3);
    // profile on a non-Szego string -> 1
    json notsz = {{"two_material",
                   {{"a", 2.0}, {"b", 1.0}, {"delta", "1/sqrt(n+1)"}, {"cells", 40}}}};
    json cfg6 = {{"input", notsz}, {"out", (dir / "o6").string()}, {"lambda_points", 100},
                 {"lambda_max", 100.0}, {"h", 0.05}};
    spit(dir / "cfg6.json", cfg6.dump());
    CHECK(run_cli("profile --config " + (dir / "cfg6.json").string()) == 1);
    // unknown config key -> 1
    spit(dir / "cfg7.json", R"({"inptu": "x.json"})");
    CHECK(run_cli("classify-string --config " + (dir / "cfg7.json").string()) == 1);
}

TEST_CASE("cli: wvn map and free-dirac commands run") {
    fs::path dir = sandbox();
    json cfg = {{"input", json::object()},
                {"out", (dir / "wvn").string()},
                {"alpha_grid", {{"min", -1.0}, {"max", 1.0}, {"step", 0.5}}},
                {"beta_grid", {{"min", 0.0}, {"max", 1.0}, {"step", 0.5}}}};
    spit(dir / "wvn.json", cfg.dump());
    REQUIRE(run_cli("classify-wvn --config " + (dir / "wvn.json").string()) == 0);
    std::string csv = slurp(dir / "wvn" / "wvn_map.csv");
    CHECK(csv.find("alpha,beta,region,numeric_verdict") != std::string::npos);
    CHECK(csv.find("Boundary") != std::string::npos);

    json fd = {{"input", {{"dtau", 0.125}, {"support_lo", 0.0}, {"support_hi", 1.0}}},
               {"out", (dir / "fd").string()},
               {"t_end", 5.0}};
    spit(dir / "fd.json", fd.dump());
    REQUIRE(run_cli("free-dirac --config " + (dir / "fd.json").string()) == 0);
    CHECK(slurp(dir / "fd" / "free_dirac.csv").find("tau,re_z1") != std::string::npos);
}
