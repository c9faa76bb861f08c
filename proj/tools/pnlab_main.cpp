// Batch front door: runs one experiment described by a JSON config file.
//
//   pnlab <solve|verify|decay|blowup|regularize|sweep> --config cfg.json \
//         [--out DIR] [--seed N] [--jobs N] [--inequality ID]
//
// The output root defaults to ./runs, or $PNLAB_OUT_ROOT when set; --out
// overrides both. Exit status: 0 on a passing run (including an expected
// blow-up), 1 on an inequality violation, solver failure, or unexpected
// regime, 2 on an invalid config.

#include "pnlab/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    std::string inequality;
};

int run(const std::string& kind_name, const CliOptions& opt) {
    using namespace pnlab;
    ExperimentConfig cfg = load_config_file(opt.config_path);

    const ExperimentKind requested = kind_from_string(kind_name);
    if (cfg.kind != requested)
        throw ConfigError("config kind '" + std::string(to_string(cfg.kind)) +
                          "' does not match subcommand '" + kind_name + "'");
    if (opt.seed_set) {
        cfg.seed = opt.seed;
        cfg.raw["seed"] = opt.seed;
    }
    if (opt.jobs > 0) {
        cfg.jobs = opt.jobs;
        cfg.raw["jobs"] = opt.jobs;
    }
    if (!opt.inequality.empty()) {
        cfg.raw["verify"]["inequalities"] = std::vector<std::string>{opt.inequality};
    }

    fs::path out_dir;
    if (!opt.out_dir.empty()) {
        out_dir = opt.out_dir;
    } else {
        const char* root = std::getenv("PNLAB_OUT_ROOT");
        out_dir = fs::path(root ? root : "runs") /
                  (std::string(to_string(cfg.kind)) + "-" + std::to_string(cfg.seed));
    }

    RunOutcome outcome = run_experiment(cfg, out_dir);
    std::cout << "wrote " << out_dir.string() << " (exit " << outcome.exit_code << ")\n";
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for a degenerate nonlinear parabolic equation"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> kinds = {
        {"solve", "run one evolution solve"},
        {"verify", "sweep the embedding-inequality corpus"},
        {"decay", "long-time decay study"},
        {"blowup", "bounded/blow-up regime study"},
        {"regularize", "elliptic-regularization epsilon study"},
        {"sweep", "cartesian parameter sweep"},
    };
    const std::map<std::string, std::string> kind_of = {
        {"solve", "solve"},          {"verify", "verify-embeddings"},
        {"decay", "decay-study"},    {"blowup", "blowup-study"},
        {"regularize", "regularization-study"}, {"sweep", "sweep"},
    };

    CliOptions opt;
    for (const auto& [name, desc] : kinds) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", opt.config_path, "experiment config (JSON)")
            ->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "random seed override")
            ->each([&](const std::string&) { opt.seed_set = true; });
        sub->add_option("--jobs", opt.jobs, "parallel sweep workers");
        if (name == "verify")
            sub->add_option("--inequality", opt.inequality,
                            "run only inequalities whose name starts with this id");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return run(app.get_subcommands().front()->get_name(), opt);
    } catch (const pnlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
