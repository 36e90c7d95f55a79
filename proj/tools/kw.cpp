// kw: Szego-class classification and wave diagnostics for canonical systems,
// Krein strings, and Dirac potentials.
#include <CLI11.hpp>

#include "kw/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Szego classification and string/Dirac wave diagnostics"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    double h = -1, dt = -1, t_end = -1, lambda_max = -1;
    long n_max = -1;
    unsigned seed = 0;
    bool seed_set = false;

    const char* names[] = {"classify-string", "classify-dirac", "classify-canonical",
                           "classify-wvn",    "simulate",       "front",
                           "profile",         "spectrum",       "free-dirac"};
    std::vector<CLI::App*> subs;
    for (const char* n : names) {
        CLI::App* s = app.add_subcommand(n);
        s->add_option("--config", config_path, "JSON run configuration")->required();
        s->add_option("--out", out_dir, "output directory (overrides config)");
        s->add_option("--h", h, "lattice spacing override");
        s->add_option("--dt", dt, "time step override");
        s->add_option("--t-end", t_end, "final time override");
        s->add_option("--lambda-max", lambda_max, "spectral grid cap override");
        s->add_option("--n-max", n_max, "criterion term cap override");
        s->add_option("--seed", seed, "seed echoed into outputs")->each([&](const std::string&) {
            seed_set = true;
        });
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc ? 1 : 0;
    }

    kw::cli::RunConfig cfg;
    try {
        cfg = kw::cli::config_from_json(kw::load_json_file(config_path));
    } catch (const kw::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (h > 0) cfg.h = h;
    if (dt > 0) cfg.dt = dt;
    if (t_end > 0) cfg.t_end = t_end;
    if (lambda_max > 0) cfg.lambda_max = lambda_max;
    if (n_max > 0) cfg.n_max = (int)n_max;
    if (seed_set) cfg.seed = seed;

    return kw::cli::run_checked(cfg);
}
