#ifndef WIGSOLVE_CORE_CONFIG_HPP
#define WIGSOLVE_CORE_CONFIG_HPP

#include <map>
#include <string>

#include "core/types.hpp"

namespace wig {

/// Full experiment description. Loads from a single JSON file (// comments
/// allowed); unknown keys and out-of-range values are rejected before any
/// computation starts; round trips losslessly through dump().
struct ExperimentConfig {
    RunConfig run;
    PhysicalConstants consts;

    std::string potential_name = "free";
    std::map<std::string, double> potential_params;

    std::string initial_name = "gaussian-coherent";
    std::map<std::string, double> initial_params;
    bool freeze_alpha = true;

    int hidden_layers = 3;
    int hidden_width = 64;
    int d_base = -1;  // -1: default to 2N

    double scale_x = 4.0;
    double scale_p = 4.0;
    double scale_kappa = 4.0;

    // training knobs
    std::string time_sampling = "uniform";  // or "stratified"
    bool variance_corrected_loss = false;
    int checkpoint_every = 1000;
    int heldout_every = 50;
    std::string frozen_flow;  // "", "free" or "harmonic": freeze an exact map
    bool metrics_wallclock = false;  // per-epoch wall time column (breaks
                                     // byte-determinism when enabled)
    double fd_step = 1e-5;
    bool resume = false;
    bool exact_potential_grad = false;  // see ResidualOptions
    std::string lr_schedule = "constant";  // or "step": x0.3 after 60% of the
                                           // epochs, x0.1 after 85%

    // verification grids (1D oracle)
    int grid_n = 256;
    double x_min = -8.0, x_max = 8.0;
    double p_min = -8.0, p_max = 8.0;

    // evaluation
    int hist_bins = 64;
    double hist_range = 8.0;

    std::string output_dir = "out";
    int threads = 1;

    int d_base_effective() const {
        return d_base > 0 ? d_base : 2 * consts.dim;
    }
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string dump_config(const ExperimentConfig& cfg);

/// Full validation: RunConfig invariants plus cross-field consistency
/// (known potential/decomposition names, alpha freezing vs signed initial
/// data, grid constraints). Throws ConfigError.
void validate_experiment(const ExperimentConfig& cfg);

} // namespace wig

#endif
