#ifndef WIGSOLVE_CORE_PUSHFORWARD_HPP
#define WIGSOLVE_CORE_PUSHFORWARD_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "core/net.hpp"
#include "core/rng.hpp"
#include "core/types.hpp"

namespace wig {

enum class Branch { Plus, Minus };

/// Smooth non-negative transform behind the mixing weight alpha.
double softplus(double raw);
double softplus_inverse(double alpha);
double sigmoid(double raw);

/// Prescribed decomposition of the initial state f0 = a+ f0+ - a- f0- with
/// seedable samplers for both non-negative parts.
struct InitialDecomposition {
    std::string name;
    std::map<std::string, double> params;
    /// Fill N x M matrices with M independent draws from f0+ / f0-.
    std::function<void(RandomStream&, MatrixXd&, MatrixXd&)> sample_plus;
    std::function<void(RandomStream&, MatrixXd&, MatrixXd&)> sample_minus;
    double alpha0 = 0.0;      // negative-part weight of the prescribed split
    bool has_minus = false;   // false for non-negative f0
};

/// Shipped decompositions:
///   gaussian-coherent   coherent-state phase-space Gaussian, f0 >= 0
///                       {x0, p0, omega}; alpha0 = 0
///   harmonic-excited-1  signed split of the first excited harmonic state
///                       {omega}; alpha0 = 2 e^{-1/2} - 1
InitialDecomposition make_decomposition(const std::string& name,
                                        const std::map<std::string, double>& params,
                                        const PhysicalConstants& consts);

/// Two-branch pushforward map with exact initial-condition enforcement:
///   F(t, x0, p0, z) = (x0, p0) + sqrt(t) * net(t, x0, p0, z)
/// and learnable mixing weight a+ = 1 + alpha, a- = alpha.
struct SignedPushforward {
    NetworkParams net_plus;
    NetworkParams net_minus;
    double alpha_raw = 0.0;
    bool alpha_frozen = false;  // frozen at alpha = 0; minus branch skipped
    int dim = 1;
    int d_base = 2;             // base-noise width; base_dist standard normal

    double alpha() const { return alpha_frozen ? 0.0 : softplus(alpha_raw); }
    double alpha_plus() const { return 1.0 + alpha(); }
    double alpha_minus() const { return alpha(); }
    const NetworkParams& net(Branch br) const {
        return br == Branch::Plus ? net_plus : net_minus;
    }
    NetworkParams& net(Branch br) {
        return br == Branch::Plus ? net_plus : net_minus;
    }
};

SignedPushforward make_pushforward(int dim, int d_base, int hidden_layers,
                                   int hidden_width, double alpha0,
                                   bool alpha_frozen, StreamTable& streams);

/// Returns current alpha (the transformed non-negative weight).
double wigner_negativity_weight(const SignedPushforward& sp);

/// Single-point pushforward. At t = 0 the output equals `init` bit-exactly.
PhasePoint push(const SignedPushforward& sp, Branch branch, double t,
                const PhasePoint& init, const VectorXd& z);

/// Batched pushforward inputs/outputs for one branch.
struct PushedBatch {
    VectorXd times;    // M
    MatrixXd x0, p0;   // N x M initial draws
    MatrixXd z;        // d_base x M base noise
    MatrixXd x, p;     // N x M pushed points
    VectorXd sqrt_t;   // M

    int size() const { return static_cast<int>(times.size()); }
    bool empty() const { return times.size() == 0; }
};

/// Push already-drawn inputs through one branch. Records the forward trace
/// when `trace` is given (needed for parameter gradients).
void push_batch(const SignedPushforward& sp, Branch branch,
                PushedBatch& batch, ForwardTrace* trace = nullptr);

struct SignedSample {
    PushedBatch plus;
    PushedBatch minus;   // empty when the minus branch is inactive
    double alpha_plus = 1.0;
    double alpha_minus = 0.0;
};

/// Draw M tuples per active branch (initial point + base noise, mutually
/// independent sub-streams), push them to `times`.
SignedSample sample_batch(const SignedPushforward& sp,
                          const InitialDecomposition& decomp,
                          const VectorXd& times, RandomStream init_plus,
                          RandomStream init_minus, RandomStream noise_plus,
                          RandomStream noise_minus);

/// Signed Monte Carlo mean (1/M) sum_m [a+ g(plus_m) - a- g(minus_m)].
double signed_expectation(
    const SignedSample& sample,
    const std::function<double(double t, const VectorXd& x, const VectorXd& p)>& g);

} // namespace wig

#endif
