#include "core/config.hpp"

#include <fstream>
#include <json.hpp>

#include "core/fft.hpp"
#include "core/potential.hpp"
#include "core/pushforward.hpp"

namespace wig {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError(where.empty() ? key : where + "." + key,
                              "unknown key");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, std::string("bad value: ") + e.what());
    }
}

std::map<std::string, double> read_params(const json& j, const char* key) {
    std::map<std::string, double> out;
    if (!j.contains(key))
        return out;
    const json& p = j.at(key);
    if (!p.is_object())
        throw ConfigError(key, "must be an object of named reals");
    for (const auto& [name, value] : p.items()) {
        if (!value.is_number())
            throw ConfigError(std::string(key) + "." + name,
                              "must be a number");
        out[name] = value.get<double>();
    }
    return out;
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text, nullptr, /*allow_exceptions=*/true,
                        /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("", std::string("cannot parse config: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("", "config root must be an object");
    check_keys(j, "", {"run", "constants", "potential", "initial", "network",
                       "test_functions", "training", "oracle", "evaluate",
                       "output_dir", "threads"});

    ExperimentConfig cfg;
    if (j.contains("run")) {
        const json& r = j["run"];
        check_keys(r, "run",
                   {"horizon", "batch_size", "num_test", "n_adv", "lr_gen",
                    "lr_adv", "seed", "epochs"});
        read(r, "horizon", cfg.run.horizon);
        read(r, "batch_size", cfg.run.batch_size);
        read(r, "num_test", cfg.run.num_test);
        read(r, "n_adv", cfg.run.n_adv);
        read(r, "lr_gen", cfg.run.lr_gen);
        read(r, "lr_adv", cfg.run.lr_adv);
        read(r, "seed", cfg.run.seed);
        read(r, "epochs", cfg.run.epochs);
    }
    if (j.contains("constants")) {
        const json& c = j["constants"];
        check_keys(c, "constants", {"hbar", "mass", "dim"});
        read(c, "hbar", cfg.consts.hbar);
        read(c, "mass", cfg.consts.mass);
        read(c, "dim", cfg.consts.dim);
    }
    if (j.contains("potential")) {
        const json& p = j["potential"];
        check_keys(p, "potential", {"name", "params"});
        if (!p.contains("name"))
            throw ConfigError("potential.name", "required");
        read(p, "name", cfg.potential_name);
        cfg.potential_params = read_params(p, "params");
    }
    if (j.contains("initial")) {
        const json& p = j["initial"];
        check_keys(p, "initial", {"name", "params", "freeze_alpha"});
        if (!p.contains("name"))
            throw ConfigError("initial.name", "required");
        read(p, "name", cfg.initial_name);
        cfg.initial_params = read_params(p, "params");
        read(p, "freeze_alpha", cfg.freeze_alpha);
    }
    if (j.contains("network")) {
        const json& n = j["network"];
        check_keys(n, "network", {"hidden_layers", "hidden_width", "d_base"});
        read(n, "hidden_layers", cfg.hidden_layers);
        read(n, "hidden_width", cfg.hidden_width);
        read(n, "d_base", cfg.d_base);
    }
    if (j.contains("test_functions")) {
        const json& t = j["test_functions"];
        check_keys(t, "test_functions", {"scale_x", "scale_p", "scale_kappa"});
        read(t, "scale_x", cfg.scale_x);
        read(t, "scale_p", cfg.scale_p);
        read(t, "scale_kappa", cfg.scale_kappa);
    }
    if (j.contains("training")) {
        const json& t = j["training"];
        check_keys(t, "training",
                   {"time_sampling", "variance_corrected_loss",
                    "checkpoint_every", "heldout_every", "frozen_flow",
                    "metrics_wallclock", "fd_step", "resume",
                    "exact_potential_grad", "lr_schedule"});
        read(t, "time_sampling", cfg.time_sampling);
        read(t, "variance_corrected_loss", cfg.variance_corrected_loss);
        read(t, "checkpoint_every", cfg.checkpoint_every);
        read(t, "heldout_every", cfg.heldout_every);
        read(t, "frozen_flow", cfg.frozen_flow);
        read(t, "metrics_wallclock", cfg.metrics_wallclock);
        read(t, "fd_step", cfg.fd_step);
        read(t, "resume", cfg.resume);
        read(t, "exact_potential_grad", cfg.exact_potential_grad);
        read(t, "lr_schedule", cfg.lr_schedule);
    }
    if (j.contains("oracle")) {
        const json& o = j["oracle"];
        check_keys(o, "oracle", {"grid_n", "x_min", "x_max", "p_min", "p_max"});
        read(o, "grid_n", cfg.grid_n);
        read(o, "x_min", cfg.x_min);
        read(o, "x_max", cfg.x_max);
        read(o, "p_min", cfg.p_min);
        read(o, "p_max", cfg.p_max);
    }
    if (j.contains("evaluate")) {
        const json& e = j["evaluate"];
        check_keys(e, "evaluate", {"hist_bins", "hist_range"});
        read(e, "hist_bins", cfg.hist_bins);
        read(e, "hist_range", cfg.hist_range);
    }
    read(j, "output_dir", cfg.output_dir);
    read(j, "threads", cfg.threads);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("config", "cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string dump_config(const ExperimentConfig& cfg) {
    json j;
    j["run"] = {{"horizon", cfg.run.horizon},
                {"batch_size", cfg.run.batch_size},
                {"num_test", cfg.run.num_test},
                {"n_adv", cfg.run.n_adv},
                {"lr_gen", cfg.run.lr_gen},
                {"lr_adv", cfg.run.lr_adv},
                {"seed", cfg.run.seed},
                {"epochs", cfg.run.epochs}};
    j["constants"] = {{"hbar", cfg.consts.hbar},
                      {"mass", cfg.consts.mass},
                      {"dim", cfg.consts.dim}};
    j["potential"] = {{"name", cfg.potential_name},
                      {"params", json(cfg.potential_params)}};
    j["initial"] = {{"name", cfg.initial_name},
                    {"params", json(cfg.initial_params)},
                    {"freeze_alpha", cfg.freeze_alpha}};
    j["network"] = {{"hidden_layers", cfg.hidden_layers},
                    {"hidden_width", cfg.hidden_width},
                    {"d_base", cfg.d_base}};
    j["test_functions"] = {{"scale_x", cfg.scale_x},
                           {"scale_p", cfg.scale_p},
                           {"scale_kappa", cfg.scale_kappa}};
    j["training"] = {{"time_sampling", cfg.time_sampling},
                     {"variance_corrected_loss", cfg.variance_corrected_loss},
                     {"checkpoint_every", cfg.checkpoint_every},
                     {"heldout_every", cfg.heldout_every},
                     {"frozen_flow", cfg.frozen_flow},
                     {"metrics_wallclock", cfg.metrics_wallclock},
                     {"fd_step", cfg.fd_step},
                     {"resume", cfg.resume},
                     {"exact_potential_grad", cfg.exact_potential_grad},
                     {"lr_schedule", cfg.lr_schedule}};
    j["oracle"] = {{"grid_n", cfg.grid_n},
                   {"x_min", cfg.x_min},
                   {"x_max", cfg.x_max},
                   {"p_min", cfg.p_min},
                   {"p_max", cfg.p_max}};
    j["evaluate"] = {{"hist_bins", cfg.hist_bins},
                     {"hist_range", cfg.hist_range}};
    j["output_dir"] = cfg.output_dir;
    j["threads"] = cfg.threads;
    return j.dump(2) + "\n";
}

void validate_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg.run, cfg.consts);
    if (cfg.hidden_layers < 0)
        throw ConfigError("network.hidden_layers", "must be >= 0");
    if (cfg.hidden_layers > 0 && cfg.hidden_width < 1)
        throw ConfigError("network.hidden_width", "must be >= 1");
    if (cfg.d_base == 0 || cfg.d_base < -1)
        throw ConfigError("network.d_base", "must be positive (or -1 = 2N)");
    if (cfg.scale_x < 0 || cfg.scale_p < 0 || cfg.scale_kappa < 0)
        throw ConfigError("test_functions", "scales must be non-negative");
    if (cfg.time_sampling != "uniform" && cfg.time_sampling != "stratified")
        throw ConfigError("training.time_sampling",
                          "must be 'uniform' or 'stratified'");
    if (!cfg.frozen_flow.empty() && cfg.frozen_flow != "free" &&
        cfg.frozen_flow != "harmonic")
        throw ConfigError("training.frozen_flow",
                          "must be '', 'free' or 'harmonic'");
    if (cfg.checkpoint_every < 1)
        throw ConfigError("training.checkpoint_every", "must be >= 1");
    if (cfg.heldout_every < 1)
        throw ConfigError("training.heldout_every", "must be >= 1");
    if (!(cfg.fd_step > 0))
        throw ConfigError("training.fd_step", "must be > 0");
    if (cfg.lr_schedule != "constant" && cfg.lr_schedule != "step")
        throw ConfigError("training.lr_schedule",
                          "must be 'constant' or 'step'");
    if (!is_power_of_two(static_cast<std::size_t>(cfg.grid_n)))
        throw ConfigError("oracle.grid_n", "must be a power of two");
    if (!(cfg.x_max > cfg.x_min) || !(cfg.p_max > cfg.p_min))
        throw ConfigError("oracle", "empty grid extent");
    if (cfg.hist_bins < 1)
        throw ConfigError("evaluate.hist_bins", "must be >= 1");
    if (!(cfg.hist_range > 0))
        throw ConfigError("evaluate.hist_range", "must be > 0");
    if (cfg.threads < 1)
        throw ConfigError("threads", "must be >= 1");

    // constructing these validates names and parameters
    make_potential(cfg.potential_name, cfg.potential_params, cfg.consts.dim,
                   cfg.consts.mass);
    const InitialDecomposition decomp =
        make_decomposition(cfg.initial_name, cfg.initial_params, cfg.consts);
    if (!decomp.has_minus && !cfg.freeze_alpha)
        throw ConfigError("initial.freeze_alpha",
                          "non-negative initial data has no minus sampler; "
                          "alpha must stay frozen at 0");
}

} // namespace wig
