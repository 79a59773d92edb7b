#ifndef WIGSOLVE_CORE_TYPES_HPP
#define WIGSOLVE_CORE_TYPES_HPP

#include <Eigen/Core>
#include <cstdint>

#include "core/errors.hpp"

namespace wig {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// ħ, particle mass and the number of spatial degrees of freedom N.
/// Natural units (ħ = m = 1) by default.
struct PhysicalConstants {
    double hbar = 1.0;
    double mass = 1.0;
    int dim = 1;
};

/// One phase-space point (x, p), both vectors of length N.
class PhasePoint {
public:
    PhasePoint(VectorXd x, VectorXd p) : x_(std::move(x)), p_(std::move(p)) {
        if (x_.size() != p_.size())
            throw DimensionError("PhasePoint: |x| != |p|");
        if (!x_.allFinite() || !p_.allFinite())
            throw NumericError("PhasePoint: non-finite entry");
    }

    const VectorXd& x() const { return x_; }
    const VectorXd& p() const { return p_; }
    int dim() const { return static_cast<int>(x_.size()); }

private:
    VectorXd x_, p_;
};

/// A batch of M phase-space samples with time stamps; columns are samples.
/// The carrier of all Monte Carlo state. May be empty (M = 0) for an unused
/// signed branch.
struct PhaseBatch {
    VectorXd times;  // M
    MatrixXd x;      // N x M
    MatrixXd p;      // N x M

    int size() const { return static_cast<int>(times.size()); }
    int dim() const { return static_cast<int>(x.rows()); }
    PhasePoint point(int m) const { return PhasePoint(x.col(m), p.col(m)); }
};

/// Knobs of one training run. The seed fully determines every random draw in
/// single-threaded mode.
struct RunConfig {
    double horizon = 1.0;       // T
    int batch_size = 256;       // M
    int num_test = 64;          // K
    int n_adv = 5;              // adversary ascent steps per epoch
    double lr_gen = 1e-3;
    double lr_adv = 1e-2;
    uint64_t seed = 0;
    int epochs = 1;             // 0 allowed: returns the initial state
};

/// Throws ConfigError naming the offending field if any invariant fails.
void validate_config(const RunConfig& cfg, const PhysicalConstants& consts);

} // namespace wig

#endif
