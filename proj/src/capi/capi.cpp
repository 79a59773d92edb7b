#include "wigsolve.h"

#include <cstring>
#include <string>

#include "core/checkpoint.hpp"
#include "core/commands.hpp"
#include "core/config.hpp"
#include "core/trainer.hpp"

// Opaque handle definitions. The C surface owns its objects; the C++ core
// never sees these types.
struct wig_config_t {
    wig::ExperimentConfig cfg;
};

struct wig_model_t {
    wig::Checkpoint ck;
    wig::InitialDecomposition decomp;
};

namespace {

thread_local std::string g_last_error;

wig_status set_error(const std::exception& e, wig_status code) {
    g_last_error = e.what();
    return code;
}

template <typename Fn>
wig_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const wig::ConfigError& e) {
        return set_error(e, WIG_ERR_CONFIG);
    } catch (const wig::NumericError& e) {
        return set_error(e, WIG_ERR_DIVERGED);
    } catch (const std::exception& e) {
        return set_error(e, WIG_ERR);
    }
}

wig_status from_status(wig::CommandStatus st) {
    return static_cast<wig_status>(static_cast<int>(st));
}

} // namespace

extern "C" {

const char* wig_version(void) { return "0.1.0"; }

const char* wig_last_error(void) { return g_last_error.c_str(); }

wig_status wig_config_load(const char* path, wig_config_t** out) {
    if (!path || !out) {
        g_last_error = "null argument";
        return WIG_ERR;
    }
    return guarded([&] {
        auto* h = new wig_config_t{wig::load_config(path)};
        *out = h;
        return WIG_OK;
    });
}

wig_status wig_config_parse(const char* json_text, wig_config_t** out) {
    if (!json_text || !out) {
        g_last_error = "null argument";
        return WIG_ERR;
    }
    return guarded([&] {
        auto* h = new wig_config_t{wig::parse_config(json_text)};
        *out = h;
        return WIG_OK;
    });
}

wig_status wig_config_dump(const wig_config_t* cfg, char** out) {
    if (!cfg || !out) {
        g_last_error = "null argument";
        return WIG_ERR;
    }
    return guarded([&] {
        const std::string text = wig::dump_config(cfg->cfg);
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out = buf;
        return WIG_OK;
    });
}

wig_status wig_config_set_seed(wig_config_t* cfg, uint64_t seed) {
    if (!cfg) {
        g_last_error = "null config";
        return WIG_ERR;
    }
    cfg->cfg.run.seed = seed;
    return WIG_OK;
}

wig_status wig_config_set_threads(wig_config_t* cfg, int threads) {
    if (!cfg) {
        g_last_error = "null config";
        return WIG_ERR;
    }
    if (threads < 1) {
        g_last_error = "threads must be >= 1";
        return WIG_ERR_CONFIG;
    }
    cfg->cfg.threads = threads;
    return WIG_OK;
}

wig_status wig_config_set_output_dir(wig_config_t* cfg, const char* dir) {
    if (!cfg || !dir) {
        g_last_error = "null argument";
        return WIG_ERR;
    }
    cfg->cfg.output_dir = dir;
    return WIG_OK;
}

void wig_config_free(wig_config_t* cfg) { delete cfg; }

void wig_string_free(char* s) { delete[] s; }

wig_status wig_cmd_verify(const wig_config_t* cfg) {
    if (!cfg) {
        g_last_error = "null config";
        return WIG_ERR;
    }
    return guarded([&] { return from_status(wig::cmd_verify(cfg->cfg)); });
}

wig_status wig_cmd_train(const wig_config_t* cfg, int (*interrupted)(void)) {
    if (!cfg) {
        g_last_error = "null config";
        return WIG_ERR;
    }
    return guarded([&] {
        std::function<bool()> poll;
        if (interrupted)
            poll = [interrupted] { return interrupted() != 0; };
        return from_status(wig::cmd_train(cfg->cfg, poll));
    });
}

wig_status wig_cmd_evaluate(const wig_config_t* cfg, const char* checkpoint,
                            const double* times, size_t n_times,
                            uint64_t n_samples) {
    if (!cfg || !checkpoint || (!times && n_times > 0)) {
        g_last_error = "null argument";
        return WIG_ERR;
    }
    return guarded([&] {
        std::vector<double> tv(times, times + n_times);
        return from_status(wig::cmd_evaluate(cfg->cfg, checkpoint, tv,
                                             static_cast<int>(n_samples)));
    });
}

wig_status wig_cmd_oracle(const wig_config_t* cfg, const char* subcommand) {
    if (!cfg || !subcommand) {
        g_last_error = "null argument";
        return WIG_ERR;
    }
    return guarded(
        [&] { return from_status(wig::cmd_oracle(cfg->cfg, subcommand)); });
}

wig_status wig_model_load(const char* checkpoint, wig_model_t** out) {
    if (!checkpoint || !out) {
        g_last_error = "null argument";
        return WIG_ERR;
    }
    return guarded([&] {
        wig::Checkpoint ck = wig::load_checkpoint(checkpoint);
        auto decomp = wig::make_decomposition(ck.decomp_name, ck.decomp_params,
                                              ck.consts);
        *out = new wig_model_t{std::move(ck), std::move(decomp)};
        return WIG_OK;
    });
}

int wig_model_dim(const wig_model_t* model) {
    return model ? model->ck.sp.dim : 0;
}

double wig_model_alpha(const wig_model_t* model) {
    return model ? model->ck.sp.alpha() : 0.0;
}

double wig_model_horizon(const wig_model_t* model) {
    return model ? model->ck.horizon : 0.0;
}

int wig_model_has_minus(const wig_model_t* model) {
    if (!model)
        return 0;
    return !model->ck.sp.alpha_frozen && model->decomp.has_minus ? 1 : 0;
}

wig_status wig_model_sample(const wig_model_t* model, double t, uint64_t n,
                            uint64_t seed, double* xp_plus, double* xp_minus,
                            double* alpha_plus, double* alpha_minus) {
    if (!model || !xp_plus) {
        g_last_error = "null argument";
        return WIG_ERR;
    }
    return guarded([&] {
        if (t < 0.0 || t > model->ck.horizon)
            throw wig::ConfigError("t", "time outside [0, T]");
        const int dim = model->ck.sp.dim;
        const bool minus = wig_model_has_minus(model) != 0;
        if (minus && !xp_minus)
            throw wig::ConfigError("xp_minus",
                                   "model carries a minus branch; buffer "
                                   "required");
        wig::StreamTable streams(seed);
        const wig::VectorXd times =
            wig::VectorXd::Constant(static_cast<Eigen::Index>(n), t);
        const wig::SignedSample s = wig::sample_batch(
            model->ck.sp, model->decomp, times,
            streams.use(wig::StreamId::EvalInitPlus),
            streams.use(wig::StreamId::EvalInitMinus),
            streams.use(wig::StreamId::EvalNoisePlus),
            streams.use(wig::StreamId::EvalNoiseMinus));
        for (uint64_t m = 0; m < n; ++m) {
            for (int i = 0; i < dim; ++i) {
                xp_plus[m * 2 * dim + i] = s.plus.x(i, static_cast<int>(m));
                xp_plus[m * 2 * dim + dim + i] =
                    s.plus.p(i, static_cast<int>(m));
            }
            if (minus)
                for (int i = 0; i < dim; ++i) {
                    xp_minus[m * 2 * dim + i] =
                        s.minus.x(i, static_cast<int>(m));
                    xp_minus[m * 2 * dim + dim + i] =
                        s.minus.p(i, static_cast<int>(m));
                }
        }
        if (alpha_plus)
            *alpha_plus = s.alpha_plus;
        if (alpha_minus)
            *alpha_minus = s.alpha_minus;
        return WIG_OK;
    });
}

void wig_model_free(wig_model_t* model) { delete model; }

} // extern "C"
