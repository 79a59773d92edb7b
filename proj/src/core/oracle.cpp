#include "core/oracle.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "core/fft.hpp"

namespace wig {

namespace {

using cplx = std::complex<double>;

VectorXd trapezoid_weights(const VectorXd& nodes) {
    const Eigen::Index n = nodes.size();
    const double d = nodes[1] - nodes[0];
    VectorXd w = VectorXd::Constant(n, d);
    w[0] = 0.5 * d;
    w[n - 1] = 0.5 * d;
    return w;
}

void check_edge_decay(const MatrixXd& values, const char* what) {
    const double peak = values.cwiseAbs().maxCoeff();
    const double tol = 1e-10 * std::max(1.0, peak);
    double edge = 0.0;
    const auto nx = values.rows(), np = values.cols();
    edge = std::max(edge, values.row(0).cwiseAbs().maxCoeff());
    edge = std::max(edge, values.row(nx - 1).cwiseAbs().maxCoeff());
    edge = std::max(edge, values.col(0).cwiseAbs().maxCoeff());
    edge = std::max(edge, values.col(np - 1).cwiseAbs().maxCoeff());
    if (edge > tol)
        throw NumericError(std::string(what) +
                           ": field does not decay at the grid edges");
}

// Signed DFT frequency index: 0..n/2-1, then -n/2..-1.
inline Eigen::Index signed_index(Eigen::Index l, Eigen::Index n) {
    return l < n / 2 ? l : l - n;
}

} // namespace

GridField make_grid(double x_min, double x_max, int n_x, double p_min,
                    double p_max, int n_p) {
    if (n_x < 2 || n_p < 2)
        throw ConfigError("grid", "need at least 2 nodes per axis");
    if (!is_power_of_two(static_cast<std::size_t>(n_p)))
        throw ConfigError("grid", "n_p must be a power of two");
    if (!(x_max > x_min) || !(p_max > p_min))
        throw ConfigError("grid", "empty grid extent");
    GridField g;
    g.xs = VectorXd::LinSpaced(n_x, x_min, x_max - (x_max - x_min) / n_x);
    g.ps = VectorXd::LinSpaced(n_p, p_min, p_max - (p_max - p_min) / n_p);
    g.values = MatrixXd::Zero(n_x, n_p);
    return g;
}

GridField gaussian_wigner(const GridField& proto, double hbar, double mass,
                          double omega, double x0, double p0) {
    GridField g = proto;
    const double ax = mass * omega / hbar;
    const double ap = 1.0 / (mass * omega * hbar);
    const double norm = 1.0 / (M_PI * hbar);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.np(); ++j) {
            const double dx = g.xs[i] - x0;
            const double dp = g.ps[j] - p0;
            g.values(i, j) = norm * std::exp(-ax * dx * dx - ap * dp * dp);
        }
    return g;
}

GridField excited1_wigner(const GridField& proto, double hbar, double mass,
                          double omega) {
    GridField g = proto;
    const double ax = mass * omega / hbar;
    const double ap = 1.0 / (mass * omega * hbar);
    const double norm = 1.0 / (M_PI * hbar);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.np(); ++j) {
            const double s = ax * g.xs[i] * g.xs[i] + ap * g.ps[j] * g.ps[j];
            g.values(i, j) = norm * (2.0 * s - 1.0) * std::exp(-s);
        }
    return g;
}

double grid_quadrature(const GridField& f) {
    const VectorXd wx = trapezoid_weights(f.xs);
    const VectorXd wp = trapezoid_weights(f.ps);
    return wx.dot(f.values * wp);
}

double negative_volume(const GridField& f) {
    GridField neg = f;
    neg.values = (-f.values.array()).max(0.0).matrix();
    return grid_quadrature(neg);
}

GridField theta_apply(const PotentialOracle& v, const GridField& f,
                      double hbar, double* imag_residue) {
    if (v.dim() != 1)
        throw DimensionError("theta_apply: grid oracle is one-dimensional");
    check_edge_decay(f.values, "theta_apply");
    const int nx = f.nx(), np = f.np();
    const double dy = 2.0 * M_PI * hbar / (np * f.dp());
    GridField out = f;
    out.values.setZero();

    // Kernel values [V(x + y/2) - V(x - y/2)]/(i hbar) on the conjugate
    // y-grid; the Nyquist mode is dropped (odd kernel, ambiguous sign).
    std::vector<cplx> row(np);
    VectorXd x1(1), x2(1);
    double max_im = 0.0, max_re = 0.0;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < np; ++j) row[j] = cplx(f.values(i, j), 0.0);
        fft(row);
        for (int l = 0; l < np; ++l) {
            const Eigen::Index ls = signed_index(l, np);
            if (ls == -np / 2) {
                row[l] = 0.0;
                continue;
            }
            const double y = ls * dy;
            x1[0] = f.xs[i] + 0.5 * y;
            x2[0] = f.xs[i] - 0.5 * y;
            const double dv = v.eval(x1) - v.eval(x2);
            row[l] *= cplx(0.0, -dv / hbar);
        }
        ifft(row);
        for (int j = 0; j < np; ++j) {
            out.values(i, j) = row[j].real();
            max_im = std::max(max_im, std::abs(row[j].imag()));
            max_re = std::max(max_re, std::abs(row[j].real()));
        }
    }
    const double residue = max_im / std::max(1.0, max_re);
    if (imag_residue)
        *imag_residue = residue;
    if (residue > 1e-8)
        throw NumericError("theta_apply: imaginary residue exceeds 1e-8");
    return out;
}

double weak_integral_quadrature(const PotentialOracle& v, const GridField& f,
                                const TestFunction& tf, double hbar) {
    const GridField th = theta_apply(v, f, hbar);
    const VectorXd wx = trapezoid_weights(f.xs);
    const VectorXd wp = trapezoid_weights(f.ps);
    double acc = 0.0;
    for (int i = 0; i < f.nx(); ++i)
        for (int j = 0; j < f.np(); ++j)
            acc += wx[i] * wp[j] * th.values(i, j) *
                   std::sin(tf.w_x[0] * f.xs[i] + tf.w_p[0] * f.ps[j] + tf.b);
    return acc;
}

double reduced_integral(const PotentialOracle& v, const GridField& f,
                        const TestFunction& tf, double hbar) {
    const VectorXd wx = trapezoid_weights(f.xs);
    const VectorXd wp = trapezoid_weights(f.ps);
    VectorXd x1(1);
    double acc = 0.0;
    for (int i = 0; i < f.nx(); ++i) {
        x1[0] = f.xs[i];
        const double pd = potential_difference(v, x1, tf.w_p, hbar);
        for (int j = 0; j < f.np(); ++j)
            acc += wx[i] * wp[j] * f.values(i, j) * pd *
                   std::cos(tf.w_x[0] * f.xs[i] + tf.w_p[0] * f.ps[j] + tf.b);
    }
    return acc;
}

GridField truncated_theta_apply(const std::function<double(double)>& dv,
                                const std::function<double(double)>& d3v,
                                const GridField& f, double hbar) {
    const int nx = f.nx(), np = f.np();
    const double dy = 2.0 * M_PI * hbar / (np * f.dp());
    GridField out = f;
    std::vector<cplx> base(np), d1(np), d3(np);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < np; ++j) base[j] = cplx(f.values(i, j), 0.0);
        fft(base);
        for (int l = 0; l < np; ++l) {
            const Eigen::Index ls = signed_index(l, np);
            if (ls == -np / 2) {
                d1[l] = d3[l] = 0.0;
                continue;
            }
            const cplx iyh(0.0, ls * dy / hbar);
            d1[l] = base[l] * iyh;
            d3[l] = base[l] * iyh * iyh * iyh;
        }
        ifft(d1);
        ifft(d3);
        const double c1 = -dv(f.xs[i]);
        const double c3 = hbar * hbar / 24.0 * d3v(f.xs[i]);
        for (int j = 0; j < np; ++j)
            out.values(i, j) = c1 * d1[j].real() + c3 * d3[j].real();
    }
    return out;
}

// --- Schroedinger reference ---------------------------------------------------

double WaveFunctionGrid::norm() const {
    const VectorXd w = trapezoid_weights(xs);
    double acc = 0.0;
    for (int i = 0; i < nx(); ++i) acc += w[i] * std::norm(psi[i]);
    return acc;
}

WaveFunctionGrid coherent_state(const VectorXd& xs, double hbar, double mass,
                                double omega, double x0, double p0) {
    WaveFunctionGrid w;
    w.xs = xs;
    w.psi = Eigen::VectorXcd(xs.size());
    const double a = mass * omega / hbar;
    const double norm = std::pow(a / M_PI, 0.25);
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - x0;
        w.psi[i] = norm * std::exp(-0.5 * a * d * d) *
                   std::exp(cplx(0.0, p0 * xs[i] / hbar));
    }
    return w;
}

WaveFunctionGrid excited1_state(const VectorXd& xs, double hbar, double mass,
                                double omega) {
    WaveFunctionGrid w;
    w.xs = xs;
    w.psi = Eigen::VectorXcd(xs.size());
    const double a = mass * omega / hbar;
    const double norm = std::pow(a / M_PI, 0.25) * std::sqrt(2.0 * a);
    for (Eigen::Index i = 0; i < xs.size(); ++i)
        w.psi[i] = norm * xs[i] * std::exp(-0.5 * a * xs[i] * xs[i]);
    return w;
}

WaveFunctionGrid split_step_evolve(const WaveFunctionGrid& psi0,
                                   const PotentialOracle& v, double hbar,
                                   double mass, double dt, int steps) {
    if (steps < 0)
        throw ConfigError("steps", "must be >= 0");
    WaveFunctionGrid w = psi0;
    if (steps == 0 || dt == 0.0)
        return w;
    const int n = w.nx();
    if (!is_power_of_two(static_cast<std::size_t>(n)))
        throw ConfigError("grid", "split-step requires power-of-two n_x");
    const double dx = w.dx();

    // anti-aliasing bound on the kinetic phase per step
    const double k_max = M_PI / dx;
    if (dt * hbar * k_max * k_max / (2.0 * mass) >= M_PI)
        throw NumericError("split_step_evolve: dt too large for the grid");

    std::vector<cplx> half_v(n), kin(n);
    VectorXd x1(1);
    for (int i = 0; i < n; ++i) {
        x1[0] = w.xs[i];
        half_v[i] = std::exp(cplx(0.0, -0.5 * v.eval(x1) * dt / hbar));
    }
    for (int l = 0; l < n; ++l) {
        const double k = 2.0 * M_PI * signed_index(l, n) / (n * dx);
        kin[l] = std::exp(cplx(0.0, -hbar * k * k * dt / (2.0 * mass)));
    }

    double prev_norm = w.norm();
    std::vector<cplx> a(n);
    for (int s = 0; s < steps; ++s) {
        for (int i = 0; i < n; ++i) a[i] = w.psi[i] * half_v[i];
        fft(a);
        for (int l = 0; l < n; ++l) a[l] *= kin[l];
        ifft(a);
        for (int i = 0; i < n; ++i) w.psi[i] = a[i] * half_v[i];
        const double norm = w.norm();
        if (std::abs(norm - prev_norm) > 1e-10)
            throw NumericError("split_step_evolve: norm drift");
        prev_norm = norm;
    }
    return w;
}

VectorXd conjugate_momentum_grid(const VectorXd& xs, double hbar) {
    const Eigen::Index n = xs.size();
    const double dp = M_PI * hbar / (n * (xs[1] - xs[0]));
    VectorXd ps(n);
    for (Eigen::Index j = 0; j < n; ++j)
        ps[j] = (static_cast<double>(j) - static_cast<double>(n) / 2.0) * dp;
    return ps;
}

GridField wigner_transform(const WaveFunctionGrid& psi, double hbar,
                           const VectorXd& p_grid) {
    const int n = psi.nx();
    if (!is_power_of_two(static_cast<std::size_t>(n)))
        throw ConfigError("grid", "wigner_transform requires power-of-two n_x");
    {
        const double peak = psi.psi.cwiseAbs().maxCoeff();
        if (std::max(std::abs(psi.psi[0]), std::abs(psi.psi[n - 1])) >
            1e-10 * std::max(1.0, peak))
            throw NumericError("wigner_transform: psi does not decay at edges");
    }
    const VectorXd conj_grid = conjugate_momentum_grid(psi.xs, hbar);
    if (p_grid.size() != n || std::abs(p_grid[0] - conj_grid[0]) > 1e-9 ||
        std::abs(p_grid[1] - p_grid[0] - (conj_grid[1] - conj_grid[0])) > 1e-12)
        throw ConfigError("grid",
                          "wigner_transform: p-grid must be the conjugate grid");

    GridField out;
    out.xs = psi.xs;
    out.ps = conj_grid;
    out.values = MatrixXd::Zero(n, n);
    const double dy = 2.0 * psi.dx();
    const double scale = dy / (2.0 * M_PI * hbar) * n;

    std::vector<cplx> b(n);
    for (int i = 0; i < n; ++i) {
        for (int u = 0; u < n; ++u) {
            const Eigen::Index l = signed_index(u, n);
            const Eigen::Index ia = i + l, ib = i - l;
            cplx c(0.0, 0.0);
            if (ia >= 0 && ia < n && ib >= 0 && ib < n)
                c = std::conj(psi.psi[ia]) * psi.psi[ib];
            b[u] = (u & 1) ? -c : c;
        }
        ifft(b);
        for (int j = 0; j < n; ++j) out.values(i, j) = scale * b[j].real();
    }
    return out;
}

VectorXd momentum_density(const WaveFunctionGrid& psi, double hbar,
                          const VectorXd& p_grid) {
    const VectorXd w = trapezoid_weights(psi.xs);
    VectorXd out(p_grid.size());
    for (Eigen::Index j = 0; j < p_grid.size(); ++j) {
        cplx acc(0.0, 0.0);
        for (int i = 0; i < psi.nx(); ++i)
            acc += w[i] * psi.psi[i] *
                   std::exp(cplx(0.0, -p_grid[j] * psi.xs[i] / hbar));
        out[j] = std::norm(acc) / (2.0 * M_PI * hbar);
    }
    return out;
}

AnalyticSolution analytic_solution(const std::string& name,
                                   const std::map<std::string, double>& params,
                                   const PhysicalConstants& consts) {
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    const double mass = consts.mass;
    const double hbar = consts.hbar;
    const double omega = get("omega", 1.0);
    const double cx = get("x0", 0.0);
    const double cp = get("p0", 0.0);
    const double ax = mass * omega / hbar;
    const double ap = 1.0 / (mass * omega * hbar);
    auto coherent0 = [=](double x, double p) {
        const double dx = x - cx, dp = p - cp;
        return std::exp(-ax * dx * dx - ap * dp * dp) / (M_PI * hbar);
    };

    AnalyticSolution sol;
    if (name == "free") {
        sol.flow = [mass](double t, const VectorXd& x0, const VectorXd& p0,
                          VectorXd& x, VectorXd& p) {
            x = x0 + (t / mass) * p0;
            p = p0;
        };
        sol.density = [=](double t, const VectorXd& x, const VectorXd& p) {
            double f = 1.0;
            for (Eigen::Index i = 0; i < x.size(); ++i)
                f *= M_PI * hbar * coherent0(x[i] - p[i] * t / mass, p[i]);
            return f / (M_PI * hbar);
        };
        return sol;
    }
    if (name == "harmonic") {
        sol.flow = [mass, omega](double t, const VectorXd& x0,
                                 const VectorXd& p0, VectorXd& x, VectorXd& p) {
            const double c = std::cos(omega * t), s = std::sin(omega * t);
            x = c * x0 + (s / (mass * omega)) * p0;
            p = c * p0 - (mass * omega * s) * x0;
        };
        sol.density = [=](double t, const VectorXd& x, const VectorXd& p) {
            // pull back along the inverse rotation
            const double c = std::cos(omega * t), s = std::sin(omega * t);
            double f = 1.0;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const double x0 = c * x[i] - s / (mass * omega) * p[i];
                const double p0 = c * p[i] + mass * omega * s * x[i];
                f *= M_PI * hbar * coherent0(x0, p0);
            }
            return f / (M_PI * hbar);
        };
        return sol;
    }
    throw ConfigError("analytic.name", "unknown analytic solution '" + name + "'");
}

// --- serialization ------------------------------------------------------------

namespace {
constexpr char kGridMagic[8] = {'W', 'I', 'G', 'G', 'R', 'I', 'D', '\0'};
}

void save_grid(const std::string& path, const GridField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    os.write(kGridMagic, 8);
    const uint32_t version = 1;
    os.write(reinterpret_cast<const char*>(&version), 4);
    const uint64_t nx = f.nx(), np = f.np();
    os.write(reinterpret_cast<const char*>(&nx), 8);
    os.write(reinterpret_cast<const char*>(&np), 8);
    os.write(reinterpret_cast<const char*>(f.xs.data()), nx * 8);
    os.write(reinterpret_cast<const char*>(f.ps.data()), np * 8);
    for (int i = 0; i < f.nx(); ++i)
        for (int j = 0; j < f.np(); ++j) {
            const double v = f.values(i, j);
            os.write(reinterpret_cast<const char*>(&v), 8);
        }
    if (!os)
        throw IoError("short write to '" + path + "'");
}

GridField load_grid(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open '" + path + "'");
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kGridMagic, 8) != 0)
        throw IoError("'" + path + "' is not a grid file");
    uint32_t version = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1)
        throw IoError("unsupported grid file version");
    uint64_t nx = 0, np = 0;
    is.read(reinterpret_cast<char*>(&nx), 8);
    is.read(reinterpret_cast<char*>(&np), 8);
    GridField f;
    f.xs = VectorXd(nx);
    f.ps = VectorXd(np);
    f.values = MatrixXd(nx, np);
    is.read(reinterpret_cast<char*>(f.xs.data()), nx * 8);
    is.read(reinterpret_cast<char*>(f.ps.data()), np * 8);
    for (uint64_t i = 0; i < nx; ++i)
        for (uint64_t j = 0; j < np; ++j) {
            double v;
            is.read(reinterpret_cast<char*>(&v), 8);
            f.values(i, j) = v;
        }
    if (!is)
        throw IoError("short read from '" + path + "'");
    return f;
}

void export_grid_csv(const std::string& path, const GridField& f) {
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    os << "x,p,f\n";
    char buf[96];
    for (int i = 0; i < f.nx(); ++i)
        for (int j = 0; j < f.np(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", f.xs[i],
                          f.ps[j], f.values(i, j));
            os << buf;
        }
}

} // namespace wig
