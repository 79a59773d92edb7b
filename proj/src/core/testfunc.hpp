#ifndef WIGSOLVE_CORE_TESTFUNC_HPP
#define WIGSOLVE_CORE_TESTFUNC_HPP

#include <vector>

#include "core/potential.hpp"
#include "core/rng.hpp"
#include "core/types.hpp"

namespace wig {

/// Plane-wave test function sin(w_x.x + w_p.p + kappa t + b).
struct TestFunction {
    VectorXd w_x;
    VectorXd w_p;
    double kappa = 0.0;
    double b = 0.0;

    int dim() const { return static_cast<int>(w_x.size()); }
};

/// The adversary's parameter set: K plane waves sharing dimension N.
struct TestFunctionSet {
    std::vector<TestFunction> members;

    int size() const { return static_cast<int>(members.size()); }
    int dim() const { return members.empty() ? 0 : members.front().dim(); }
};

double phase(const TestFunction& tf, double t, const PhasePoint& pt);
double phase(const TestFunction& tf, double t, const VectorXd& x,
             const VectorXd& p);

/// sin(phase) — the test function value.
double test_value(const TestFunction& tf, double t, const PhasePoint& pt);
/// cos(phase) — the companion factor appearing in the bulk integrand.
double test_cos(const TestFunction& tf, double t, const PhasePoint& pt);

/// Pointwise bulk integrand of the weak-form residual:
///   [kappa + w_x.p/m - (V(x + hbar w_p/2) - V(x - hbar w_p/2))/hbar] cos(phase)
/// Exactly two potential evaluations per call.
double residual_integrand(const TestFunction& tf, double t,
                          const PhasePoint& pt, const PotentialOracle& v,
                          const PhysicalConstants& consts);

/// Frequencies uniform per component on [-scale, +scale]; offsets b uniform
/// on [0, 2pi).
TestFunctionSet init_test_set(int K, int N, double scale_x, double scale_p,
                              double scale_kappa, RandomStream& rng);

/// Clamp frequencies back into the init boxes (applied after each adversary
/// ascent step to prevent frequency blow-up). Offsets b are unconstrained.
void clip_to_boxes(TestFunctionSet& tfs, double scale_x, double scale_p,
                   double scale_kappa);

// Flat views for the optimizer: per member [w_x(N), w_p(N), kappa, b].
VectorXd testset_to_flat(const TestFunctionSet& tfs);
void flat_to_testset(const VectorXd& flat, TestFunctionSet& tfs);

} // namespace wig

#endif
