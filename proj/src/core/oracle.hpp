#ifndef WIGSOLVE_CORE_ORACLE_HPP
#define WIGSOLVE_CORE_ORACLE_HPP

#include <complex>
#include <string>

#include "core/residual.hpp"
#include "core/testfunc.hpp"

namespace wig {

// Grid-based ground-truth machinery, one-dimensional by design: grids are
// for verification; the mesh-free solver owns N >= 2.
//
// Transform conventions, fixed once and locked by the marginal tests:
//  * Wigner transform   f(x,p) = (1/2pi hbar) Int psi*(x+y/2) psi(x-y/2)
//                                e^{+i p y / hbar} dy
//  * momentum wave fn   psi_hat(p) = (1/sqrt(2pi hbar)) Int psi(x)
//                                e^{-i p x / hbar} dx
//  * theta_apply evaluates the operator through its defining double
//    integral: FFT in p with kernel e^{-i p y / hbar}, multiplication by
//    [V(x+y/2) - V(x-y/2)]/(i hbar) on the conjugate y-grid, inverse
//    transform. Its small-hbar limit is -dV/dx df/dp.

/// Rectangular phase-space grid with values f(x_i, p_j). Nodes are uniform,
/// half-open (x_i = x_min + i dx, i < n_x); n_p must be a power of two.
struct GridField {
    VectorXd xs;
    VectorXd ps;
    MatrixXd values;  // n_x rows, n_p cols

    int nx() const { return static_cast<int>(xs.size()); }
    int np() const { return static_cast<int>(ps.size()); }
    double dx() const { return xs[1] - xs[0]; }
    double dp() const { return ps[1] - ps[0]; }
};

GridField make_grid(double x_min, double x_max, int n_x, double p_min,
                    double p_max, int n_p);

/// Coherent-state Wigner function centered at (x0, p0); non-negative.
GridField gaussian_wigner(const GridField& proto, double hbar, double mass,
                          double omega, double x0, double p0);
/// First excited harmonic-oscillator Wigner state; negative near the origin.
GridField excited1_wigner(const GridField& proto, double hbar, double mass,
                          double omega);

/// Trapezoidal quadrature of `values` over the grid.
double grid_quadrature(const GridField& f);
/// Integral of max(-f, 0): the negative volume.
double negative_volume(const GridField& f);

/// Apply the nonlocal potential operator on the grid via FFT in p.
/// Preconditions: f decays at the grid edges (<= 1e-10 relative to its
/// peak); the result must be real to 1e-8 relative (residue reported via
/// *imag_residue).
GridField theta_apply(const PotentialOracle& v, const GridField& f,
                      double hbar, double* imag_residue = nullptr);

/// LHS of the reduction identity: Int (Theta f) sin(phi) dx dp with the
/// snapshot phase evaluated at t = 0.
double weak_integral_quadrature(const PotentialOracle& v, const GridField& f,
                                const TestFunction& tf, double hbar);

/// RHS of the reduction identity evaluated with the same grid f:
/// Int f(x,p) [V(x + hbar w_p/2) - V(x - hbar w_p/2)]/hbar cos(phi) dx dp.
double reduced_integral(const PotentialOracle& v, const GridField& f,
                        const TestFunction& tf, double hbar);

/// Order-3 truncation of the potential operator, spectral p-derivatives:
///   -dV/dx df/dp + (hbar^2/24) d3V/dx3 d3f/dp3
/// (analytic x-derivatives of V supplied by the caller).
GridField truncated_theta_apply(const std::function<double(double)>& dv,
                                const std::function<double(double)>& d3v,
                                const GridField& f, double hbar);

// --- reference Schroedinger dynamics ---------------------------------------

struct WaveFunctionGrid {
    VectorXd xs;
    Eigen::VectorXcd psi;

    double norm() const;  // Int |psi|^2 dx
    double dx() const { return xs[1] - xs[0]; }
    int nx() const { return static_cast<int>(xs.size()); }
};

WaveFunctionGrid coherent_state(const VectorXd& xs, double hbar, double mass,
                                double omega, double x0, double p0);
WaveFunctionGrid excited1_state(const VectorXd& xs, double hbar, double mass,
                                double omega);

/// Strang-split kinetic/potential evolution over `steps` steps of size dt.
/// Norm is preserved to 1e-10 per step; dt must satisfy the anti-aliasing
/// bound dt * max|kinetic phase| < pi.
WaveFunctionGrid split_step_evolve(const WaveFunctionGrid& psi0,
                                   const PotentialOracle& v, double hbar,
                                   double mass, double dt, int steps);

/// The momentum grid conjugate to the wave-function lattice (y = 2 dx), the
/// only grid on which the discrete Wigner transform reproduces both
/// marginals exactly.
VectorXd conjugate_momentum_grid(const VectorXd& xs, double hbar);

/// Discrete Wigner transform of psi onto the conjugate momentum grid.
GridField wigner_transform(const WaveFunctionGrid& psi, double hbar,
                           const VectorXd& p_grid);

/// |psi_hat(p)|^2 on an arbitrary momentum grid (direct quadrature).
VectorXd momentum_density(const WaveFunctionGrid& psi, double hbar,
                          const VectorXd& p_grid);

// --- closed-form solutions ---------------------------------------------------

/// Exact characteristic flow and (for Gaussian initial data) closed-form
/// density of the free and harmonic cases, where the quantum evolution
/// coincides with the classical one.
struct AnalyticSolution {
    FlowMap flow;  // forward map (t, x0, p0) -> (x, p)
    std::function<double(double t, const VectorXd& x, const VectorXd& p)>
        density;   // f(t, x, p) for the coherent initial state
};

/// name: "free" | "harmonic". params: {omega, x0, p0}.
AnalyticSolution analytic_solution(const std::string& name,
                                   const std::map<std::string, double>& params,
                                   const PhysicalConstants& consts);

// --- serialization -----------------------------------------------------------

void save_grid(const std::string& path, const GridField& f);
GridField load_grid(const std::string& path);
void export_grid_csv(const std::string& path, const GridField& f);

} // namespace wig

#endif
