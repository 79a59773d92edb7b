#ifndef WIGSOLVE_CORE_COMMANDS_HPP
#define WIGSOLVE_CORE_COMMANDS_HPP

#include <functional>
#include <vector>

#include "core/config.hpp"

namespace wig {

/// Exit-code contract shared by the C API and the CLI:
/// 0 success, 2 config error, 3 numerical divergence, 4 verification failure.
enum class CommandStatus : int {
    Ok = 0,
    Error = 1,
    BadConfig = 2,
    Diverged = 3,
    VerifyFailed = 4,
};

/// Run the full invariant suite (reduction-identity sweep, gradient checks,
/// classical-limit slopes, marginal tests, ...) and write
/// <out>/verify_report.csv with one row per named check. Returns Ok iff all
/// checks pass; the first failing check is reported on stderr.
CommandStatus cmd_verify(const ExperimentConfig& cfg);

/// Full training run: metrics.csv streamed per epoch, checkpoints written at
/// the configured cadence and on exit. `interrupted` is polled between
/// epochs; a true return flushes a final checkpoint and stops cleanly.
CommandStatus cmd_train(const ExperimentConfig& cfg,
                        const std::function<bool()>& interrupted = {});

/// Sample the stored pushforward at the requested times: signed sample
/// clouds, histogram marginals with a negativity report, and moment
/// estimates, all under <out>.
CommandStatus cmd_evaluate(const ExperimentConfig& cfg,
                           const std::string& checkpoint_path,
                           const std::vector<double>& times,
                           int n_samples);

/// Grid workflows: "equivalence-sweep", "evolve <potential>",
/// "wigner <state>". One-dimensional configs only.
CommandStatus cmd_oracle(const ExperimentConfig& cfg,
                         const std::string& subcommand);

} // namespace wig

#endif
