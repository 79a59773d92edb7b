#include "core/types.hpp"

#include <cmath>

namespace wig {

void validate_config(const RunConfig& cfg, const PhysicalConstants& consts) {
    if (!(consts.hbar > 0.0) || !std::isfinite(consts.hbar))
        throw ConfigError("hbar", "must be a positive finite real");
    if (!(consts.mass > 0.0) || !std::isfinite(consts.mass))
        throw ConfigError("mass", "must be a positive finite real");
    if (consts.dim < 1)
        throw ConfigError("dim", "must be >= 1");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        throw ConfigError("horizon", "must be a positive finite real");
    if (cfg.batch_size < 1)
        throw ConfigError("batch_size", "must be >= 1");
    if (cfg.num_test < 1)
        throw ConfigError("num_test", "must be >= 1");
    if (cfg.n_adv < 0)
        throw ConfigError("n_adv", "must be >= 0");
    if (!(cfg.lr_gen > 0.0) || !std::isfinite(cfg.lr_gen))
        throw ConfigError("lr_gen", "must be a positive finite real");
    if (!(cfg.lr_adv > 0.0) || !std::isfinite(cfg.lr_adv))
        throw ConfigError("lr_adv", "must be a positive finite real");
    if (cfg.epochs < 0)
        throw ConfigError("epochs", "must be >= 0");
}

} // namespace wig
