#ifndef WIGSOLVE_CORE_POTENTIAL_HPP
#define WIGSOLVE_CORE_POTENTIAL_HPP

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "core/types.hpp"

namespace wig {

/// Black-box potential oracle x -> V(x). Training only ever evaluates it;
/// no derivative information is exposed. Evaluations are counted so tests
/// can audit the cost contract (two calls per sample per test function).
class PotentialOracle {
public:
    using VectorFn = std::function<double(const VectorXd&)>;
    using ScalarFn = std::function<double(double)>;

    static PotentialOracle generic(int dim, VectorFn v);
    /// Separable V(x) = sum_i U(x_i); enables the per-coordinate fast path.
    static PotentialOracle separable(int dim, ScalarFn u);

    double eval(const VectorXd& x) const;
    /// One scalar term U(x_i) of a separable potential.
    double eval_term(double xi) const;

    int dim() const { return dim_; }
    bool is_separable() const { return static_cast<bool>(term_); }

    /// Full-vector evaluations so far (eval()).
    uint64_t call_count() const { return counts_->vector_calls.load(); }
    /// Scalar term evaluations so far (separable fast path).
    uint64_t scalar_call_count() const { return counts_->scalar_calls.load(); }
    void reset_counts() const;

    /// The same potential with the separability flag dropped; used to force
    /// the generic evaluation path.
    PotentialOracle as_generic() const;

private:
    struct Counts {
        std::atomic<uint64_t> vector_calls{0};
        std::atomic<uint64_t> scalar_calls{0};
    };

    PotentialOracle(int dim, VectorFn v, ScalarFn u);

    int dim_;
    VectorFn fn_;
    ScalarFn term_;
    std::shared_ptr<Counts> counts_;
};

/// Library potentials, all with separable N-dimensional extensions:
///   free        V = 0
///   harmonic    sum_i (1/2) m omega^2 x_i^2            {omega}
///   quartic     sum_i (1/2) m omega^2 x_i^2 + lambda x_i^4   {omega, lambda}
///   double_well sum_i a (x_i^2 - c^2)^2                {a, c}
///   cosine      sum_i V0 cos(k0 x_i)                   {V0, k0}
PotentialOracle make_potential(const std::string& name,
                               const std::map<std::string, double>& params,
                               int dim, double mass);

/// [V(x + (hbar/2) w_p) - V(x - (hbar/2) w_p)] / hbar.
/// Exactly two oracle evaluations (2N scalar terms on the separable path).
double potential_difference(const PotentialOracle& v, const VectorXd& x,
                            const VectorXd& w_p, double hbar);

/// Central-finite-difference estimate of grad V(x) . w_p (verification only;
/// 2N evaluations with step fd_step per coordinate).
double classical_force_term(const PotentialOracle& v, const VectorXd& x,
                            const VectorXd& w_p, double fd_step = 1e-5);

/// The hbar-expansion of potential_difference truncated at odd order 1 or 3:
/// grad V . w_p                                            (order 1)
/// + (hbar^2/24) sum_ijk V_{x_i x_j x_k} w_i w_j w_k       (order 3)
/// The cubic contraction is the third directional derivative along w_p,
/// estimated by a 4-point central difference (verification only).
double moyal_truncated_term(const PotentialOracle& v, const VectorXd& x,
                            const VectorXd& w_p, double hbar, int order,
                            double fd_step1 = 1e-5, double fd_step3 = 1e-2);

} // namespace wig

#endif
