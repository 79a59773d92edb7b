#include "core/potential.hpp"

#include <cmath>

namespace wig {

PotentialOracle::PotentialOracle(int dim, VectorFn v, ScalarFn u)
    : dim_(dim), fn_(std::move(v)), term_(std::move(u)),
      counts_(std::make_shared<Counts>()) {
    if (dim_ < 1)
        throw ConfigError("dim", "potential dimension must be >= 1");
}

PotentialOracle PotentialOracle::generic(int dim, VectorFn v) {
    return PotentialOracle(dim, std::move(v), nullptr);
}

PotentialOracle PotentialOracle::separable(int dim, ScalarFn u) {
    ScalarFn term = u;
    VectorFn v = [u = std::move(u)](const VectorXd& x) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) s += u(x[i]);
        return s;
    };
    return PotentialOracle(dim, std::move(v), std::move(term));
}

double PotentialOracle::eval(const VectorXd& x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw DimensionError("potential eval: |x| != dim");
    counts_->vector_calls.fetch_add(1, std::memory_order_relaxed);
    const double v = fn_(x);
    if (!std::isfinite(v))
        throw NumericError("potential returned non-finite value");
    return v;
}

double PotentialOracle::eval_term(double xi) const {
    if (!term_)
        throw NumericError("eval_term on a non-separable potential");
    counts_->scalar_calls.fetch_add(1, std::memory_order_relaxed);
    const double v = term_(xi);
    if (!std::isfinite(v))
        throw NumericError("potential term returned non-finite value");
    return v;
}

void PotentialOracle::reset_counts() const {
    counts_->vector_calls.store(0);
    counts_->scalar_calls.store(0);
}

PotentialOracle PotentialOracle::as_generic() const {
    PotentialOracle copy(dim_, fn_, nullptr);
    copy.counts_ = counts_;
    return copy;
}

PotentialOracle make_potential(const std::string& name,
                               const std::map<std::string, double>& params,
                               int dim, double mass) {
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    if (name == "free") {
        return PotentialOracle::separable(dim, [](double) { return 0.0; });
    }
    if (name == "harmonic") {
        const double omega = get("omega", 1.0);
        const double c = 0.5 * mass * omega * omega;
        return PotentialOracle::separable(
            dim, [c](double x) { return c * x * x; });
    }
    if (name == "quartic") {
        const double omega = get("omega", 1.0);
        const double lambda = get("lambda", 0.1);
        const double c = 0.5 * mass * omega * omega;
        return PotentialOracle::separable(dim, [c, lambda](double x) {
            const double x2 = x * x;
            return c * x2 + lambda * x2 * x2;
        });
    }
    if (name == "double_well") {
        const double a = get("a", 1.0);
        const double c = get("c", 1.0);
        return PotentialOracle::separable(dim, [a, c](double x) {
            const double d = x * x - c * c;
            return a * d * d;
        });
    }
    if (name == "cosine") {
        const double v0 = get("V0", 1.0);
        const double k0 = get("k0", 1.0);
        return PotentialOracle::separable(
            dim, [v0, k0](double x) { return v0 * std::cos(k0 * x); });
    }
    throw ConfigError("potential.name", "unknown potential '" + name + "'");
}

double potential_difference(const PotentialOracle& v, const VectorXd& x,
                            const VectorXd& w_p, double hbar) {
    if (x.size() != w_p.size() || static_cast<int>(x.size()) != v.dim())
        throw DimensionError("potential_difference: |x| != |w_p| != dim");
    const double h = 0.5 * hbar;
    if (v.is_separable()) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            s += v.eval_term(x[i] + h * w_p[i]) - v.eval_term(x[i] - h * w_p[i]);
        return s / hbar;
    }
    return (v.eval(x + h * w_p) - v.eval(x - h * w_p)) / hbar;
}

double classical_force_term(const PotentialOracle& v, const VectorXd& x,
                            const VectorXd& w_p, double fd_step) {
    if (x.size() != w_p.size() || static_cast<int>(x.size()) != v.dim())
        throw DimensionError("classical_force_term: |x| != |w_p| != dim");
    double s = 0.0;
    if (v.is_separable()) {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            s += w_p[i] *
                 (v.eval_term(x[i] + fd_step) - v.eval_term(x[i] - fd_step)) /
                 (2.0 * fd_step);
        return s;
    }
    VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + fd_step;
        const double vp = v.eval(probe);
        probe[i] = x[i] - fd_step;
        const double vm = v.eval(probe);
        probe[i] = x[i];
        s += w_p[i] * (vp - vm) / (2.0 * fd_step);
    }
    return s;
}

double moyal_truncated_term(const PotentialOracle& v, const VectorXd& x,
                            const VectorXd& w_p, double hbar, int order,
                            double fd_step1, double fd_step3) {
    if (order != 1 && order != 3)
        throw ConfigError("order", "moyal truncation order must be 1 or 3");
    double s = classical_force_term(v, x, w_p, fd_step1);
    if (order == 3) {
        // sum_ijk V_ijk w_i w_j w_k = d^3/ds^3 V(x + s w) at s = 0
        const double t = fd_step3;
        const double f2p = v.eval(x + (2.0 * t) * w_p);
        const double f1p = v.eval(x + t * w_p);
        const double f1m = v.eval(x - t * w_p);
        const double f2m = v.eval(x - (2.0 * t) * w_p);
        const double d3 = (f2p - 2.0 * f1p + 2.0 * f1m - f2m) / (2.0 * t * t * t);
        s += hbar * hbar / 24.0 * d3;
    }
    return s;
}

} // namespace wig
