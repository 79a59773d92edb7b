#ifndef WIGSOLVE_CORE_RESIDUAL_HPP
#define WIGSOLVE_CORE_RESIDUAL_HPP

#include <functional>
#include <optional>

#include "core/pushforward.hpp"
#include "core/testfunc.hpp"

namespace wig {

/// How the bulk term touches the potential: the exact shifted difference
/// (default), or the finite-difference classical force (hbar -> 0 mode, same
/// interface, verification use).
enum class PotentialTerm { QuantumDifference, ClassicalForce };

/// Analytic map (t, x0, p0) -> (x, p) substituted for both network branches;
/// used to freeze exact solutions in place of the generator.
using FlowMap = std::function<void(double t, const VectorXd& x0,
                                   const VectorXd& p0, VectorXd& x, VectorXd& p)>;

struct ResidualOptions {
    bool generator_grads = false;
    bool adversary_grads = false;
    bool stratified_times = false;   // one time draw per stratum of [0, T]
    // optimize corrected_loss instead of loss: E[R-hat^2] = R^2 + Var(R-hat),
    // so below the variance floor the uncorrected gradient chases estimator
    // variance rather than the residual; the correction debiases it
    bool variance_corrected = false;
    // include the x-dependence of the shifted potential difference in the
    // generator gradient (finite differences on V, 4N extra evaluations per
    // sample per test function during descent). Off by default: the black-box
    // contract keeps V-derivative information out of the generator path.
    bool exact_potential_grad = false;
    PotentialTerm potential_term = PotentialTerm::QuantumDifference;
    double fd_step = 1e-5;           // V finite differences (adversary w_p path)
    std::optional<FlowMap> flow_override;
    bool heldout_streams = false;    // draw from the held-out stream family
};

struct ResidualEstimate {
    VectorXd per_test;   // K residuals R-hat
    VectorXd variance;   // K estimator variance estimates Var-hat(R-hat)
    double loss = 0.0;   // (1/K) sum (R-hat)^2; never negative
    // loss with the per-test variance estimate subtracted: an unbiased
    // estimate of the true squared residual (may dip below zero)
    double corrected_loss = 0.0;
    uint64_t v_calls = 0;        // full-vector potential evaluations
    uint64_t v_scalar_calls = 0; // scalar term evaluations (separable path)

    VectorXd std_errors() const { return variance.array().sqrt().matrix(); }
};

struct TfGrad {
    VectorXd w_x, w_p;
    double kappa = 0.0, b = 0.0;
};

struct LossGradients {
    NetGrads plus, minus;
    bool has_minus = false;
    double alpha_raw = 0.0;
    std::vector<TfGrad> tf;
};

/// Monte Carlo estimate of the weak-form residual for every test function:
///   R-hat(k) = E_T[sin phi(T)] - E_0[sin phi(0)] - T * E_t[integrand]
/// with the three terms drawn as independent batches of size M and the time
/// integral sampled by t ~ U[0, T]. All expectations use the signed
/// estimator over the pushforward branches.
ResidualEstimate estimate_residual(const SignedPushforward& sp,
                                   const InitialDecomposition& decomp,
                                   const TestFunctionSet& tfs,
                                   const PotentialOracle& v,
                                   const PhysicalConstants& consts,
                                   const RunConfig& cfg, StreamTable& streams,
                                   const ResidualOptions& opts = {});

/// Residual estimate plus gradients of the squared-residual loss.
/// Generator gradients flow pathwise through the pushed points; the
/// potential-difference coefficients are treated as per-sample data (the
/// oracle stays a black box on the generator side). Adversary gradients are
/// analytic in (w_x, kappa, b); the w_p dependence inside the potential
/// difference uses central finite differences on V, during ascent only.
std::pair<ResidualEstimate, LossGradients> loss_and_gradients(
    const SignedPushforward& sp, const InitialDecomposition& decomp,
    const TestFunctionSet& tfs, const PotentialOracle& v,
    const PhysicalConstants& consts, const RunConfig& cfg,
    StreamTable& streams, const ResidualOptions& opts);

} // namespace wig

#endif
