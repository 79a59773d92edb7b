#ifndef WIGSOLVE_CORE_TRAINER_HPP
#define WIGSOLVE_CORE_TRAINER_HPP

#include <functional>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/oracle.hpp"
#include "core/residual.hpp"

namespace wig {

/// Everything the min-max loop mutates. Serializable through the checkpoint
/// container; save -> load -> step equals step under common random numbers.
struct TrainState {
    SignedPushforward sp;
    InitialDecomposition decomp;
    TestFunctionSet tfs;
    AdamState opt_plus, opt_minus, opt_alpha, opt_eta;
    StreamTable streams;
    uint64_t epoch = 0;
    std::optional<FlowMap> frozen_flow;  // exact map replacing the networks
};

struct EpochInfo {
    uint64_t epoch = 0;
    ResidualEstimate estimate;       // generator-phase estimate
    double heldout_loss = 0.0;       // latest held-out adversary evaluation
    bool heldout_evaluated = false;  // true when recomputed this epoch
    double alpha = 0.0;
    VectorXd mean_x, mean_p;         // signed moments at t = T
};

/// Stop request (checked between epochs) and per-epoch observer; returning
/// false stops the loop after the current epoch.
using EpochCallback = std::function<bool(const TrainState&, const EpochInfo&)>;

TrainState make_train_state(const ExperimentConfig& cfg);
TrainState state_from_checkpoint(const Checkpoint& ck,
                                 const ExperimentConfig& cfg);
Checkpoint to_checkpoint(const TrainState& state, const ExperimentConfig& cfg);

ResidualOptions residual_options_from(const ExperimentConfig& cfg);

/// Learning-rate factor for the current epoch under cfg.lr_schedule.
double lr_factor(const ExperimentConfig& cfg, uint64_t epoch);

/// n_adv gradient-ascent steps on the test-function parameters, a fresh
/// batch per step, frequencies clipped to the config boxes afterwards.
void adversary_phase(TrainState& state, const ExperimentConfig& cfg,
                     const PotentialOracle& v, int n_adv);

/// One descent step on (theta+, theta-, alpha_raw) with a fresh batch.
/// Returns the residual estimate of that batch. In frozen-flow mode the
/// parameters are left untouched and only the estimate is produced.
ResidualEstimate generator_phase(TrainState& state, const ExperimentConfig& cfg,
                                 const PotentialOracle& v);

/// Held-out adversary evaluation: the loss under a freshly initialized
/// test-function set of size `factor * K`, drawn from dedicated streams.
double heldout_loss(TrainState& state, const ExperimentConfig& cfg,
                    const PotentialOracle& v, int factor = 4);

/// Signed moment estimates (means of x and p) at time t.
void signed_moments(TrainState& state, double t, int n_samples,
                    VectorXd& mean_x, VectorXd& mean_p);

/// The full loop: epochs x (adversary_phase; generator_phase). Throws
/// NumericError if the loss diverges (non-finite or above 1e6).
void train_loop(TrainState& state, const ExperimentConfig& cfg,
                const PotentialOracle& v, const EpochCallback& on_epoch);

} // namespace wig

#endif
