// wigsolve command-line front end. Talks to the solver exclusively through
// the C API in wigsolve.h.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wigsolve.h"

namespace {

volatile std::sig_atomic_t g_interrupted = 0;

void handle_sigint(int) { g_interrupted = 1; }

int poll_interrupted(void) { return g_interrupted ? 1 : 0; }

std::string preset_path(const std::string& name) {
    const char* dir = std::getenv("WIGSOLVE_PRESETS");
    std::filesystem::path base =
        dir ? std::filesystem::path(dir)
            : std::filesystem::path(WIGSOLVE_DEFAULT_PRESET_DIR);
    return (base / (name + ".json")).string();
}

struct ConfigHandle {
    wig_config_t* cfg = nullptr;
    ~ConfigHandle() { wig_config_free(cfg); }
};

int fail(wig_status st) {
    std::fprintf(stderr, "error: %s\n", wig_last_error());
    return static_cast<int>(st);
}

int load_config(const std::string& config, const std::string& preset,
                const std::string& out_dir, bool seed_set, uint64_t seed,
                int threads, ConfigHandle& handle) {
    std::string path = config;
    if (path.empty() && !preset.empty())
        path = preset_path(preset);
    if (path.empty()) {
        std::fprintf(stderr, "error: provide --config PATH or --preset NAME\n");
        return static_cast<int>(WIG_ERR_CONFIG);
    }
    wig_status st = wig_config_load(path.c_str(), &handle.cfg);
    if (st != WIG_OK)
        return fail(st);
    if (seed_set && (st = wig_config_set_seed(handle.cfg, seed)) != WIG_OK)
        return fail(st);
    if (!out_dir.empty() &&
        (st = wig_config_set_output_dir(handle.cfg, out_dir.c_str())) != WIG_OK)
        return fail(st);
    if ((st = wig_config_set_threads(handle.cfg, threads)) != WIG_OK)
        return fail(st);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mesh-free solver for the Wigner transport equation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config, preset, out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    app.add_option("--config", config, "path to a JSON config file");
    app.add_option("--preset", preset,
                   "named preset (resolved against WIGSOLVE_PRESETS)");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--seed", seed, "seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--threads", threads, "worker cap; 1 guarantees the "
                                         "byte-determinism contract");

    auto* verify = app.add_subcommand("verify", "run the verification suite");
    auto* train = app.add_subcommand("train", "run the training loop");

    auto* evaluate =
        app.add_subcommand("evaluate", "sample a trained model");
    std::string checkpoint;
    std::vector<double> times;
    uint64_t n_samples = 16384;
    evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")
        ->required();
    evaluate->add_option("--times", times, "evaluation times")->required();
    evaluate->add_option("--samples", n_samples, "samples per time");

    auto* oracle = app.add_subcommand("oracle", "grid-based reference runs");
    std::vector<std::string> oracle_args;
    oracle->add_option("args", oracle_args,
                       "equivalence-sweep | evolve <potential> | wigner <state>")
        ->expected(1, 2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(WIG_ERR_CONFIG);
    }

    ConfigHandle handle;
    const int rc = load_config(config, preset, out_dir, seed_set, seed,
                               threads, handle);
    if (rc != 0)
        return rc;

    wig_status st = WIG_OK;
    if (verify->parsed()) {
        st = wig_cmd_verify(handle.cfg);
    } else if (train->parsed()) {
        std::signal(SIGINT, handle_sigint);
        st = wig_cmd_train(handle.cfg, poll_interrupted);
    } else if (evaluate->parsed()) {
        st = wig_cmd_evaluate(handle.cfg, checkpoint.c_str(), times.data(),
                              times.size(), n_samples);
    } else if (oracle->parsed()) {
        std::string sub;
        for (const auto& a : oracle_args) {
            if (!sub.empty())
                sub += ' ';
            sub += a;
        }
        st = wig_cmd_oracle(handle.cfg, sub.c_str());
    }
    if (st != WIG_OK && st != WIG_ERR_VERIFY)
        std::fprintf(stderr, "error: %s\n", wig_last_error());
    return static_cast<int>(st);
}
