#include "core/pushforward.hpp"

#include <cmath>

namespace wig {

double softplus(double raw) {
    if (raw > 0.0)
        return raw + std::log1p(std::exp(-raw));
    return std::log1p(std::exp(raw));
}

double softplus_inverse(double alpha) {
    if (!(alpha > 0.0))
        throw NumericError("softplus_inverse requires alpha > 0");
    return std::log(std::expm1(alpha));
}

double sigmoid(double raw) { return 1.0 / (1.0 + std::exp(-raw)); }

namespace {

// First excited harmonic state in dimensionless phase-space units
// s = u^2 + v^2: density (2s - 1) e^{-s} / (pi hbar), negative inside
// s < 1/2. Both parts sampled by rejection from a uniform box proposal.
struct Excited1Sampler {
    double x_scale, p_scale;

    void sample_part(RandomStream& rng, MatrixXd& x, MatrixXd& p,
                     bool positive) const {
        const double box = positive ? 5.0 : std::sqrt(0.5);
        const double envelope = positive ? 2.0 * std::exp(-1.5) : 1.0;
        for (Eigen::Index m = 0; m < x.cols(); ++m) {
            double u, v;
            for (;;) {
                u = rng.uniform(-box, box);
                v = rng.uniform(-box, box);
                const double s = u * u + v * v;
                const double dens =
                    positive ? std::max(2.0 * s - 1.0, 0.0) * std::exp(-s)
                             : std::max(1.0 - 2.0 * s, 0.0) * std::exp(-s);
                if (rng.uniform() * envelope < dens)
                    break;
            }
            x(0, m) = x_scale * u;
            p(0, m) = p_scale * v;
        }
    }
};

} // namespace

InitialDecomposition make_decomposition(const std::string& name,
                                        const std::map<std::string, double>& params,
                                        const PhysicalConstants& consts) {
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    InitialDecomposition d;
    d.name = name;
    d.params = params;
    if (name == "gaussian-coherent") {
        const double omega = get("omega", 1.0);
        const double x0 = get("x0", 0.0);
        const double p0 = get("p0", 0.0);
        const double sx = std::sqrt(consts.hbar / (2.0 * consts.mass * omega));
        const double sp = std::sqrt(consts.hbar * consts.mass * omega / 2.0);
        const int dim = consts.dim;
        d.sample_plus = [=](RandomStream& rng, MatrixXd& x, MatrixXd& p) {
            for (Eigen::Index m = 0; m < x.cols(); ++m)
                for (int i = 0; i < dim; ++i) {
                    x(i, m) = x0 + sx * rng.normal();
                    p(i, m) = p0 + sp * rng.normal();
                }
        };
        d.alpha0 = 0.0;
        d.has_minus = false;
        return d;
    }
    if (name == "harmonic-excited-1") {
        if (consts.dim != 1)
            throw ConfigError("initial.name",
                              "harmonic-excited-1 is one-dimensional");
        const double omega = get("omega", 1.0);
        Excited1Sampler s{std::sqrt(consts.hbar / (consts.mass * omega)),
                          std::sqrt(consts.hbar * consts.mass * omega)};
        d.sample_plus = [s](RandomStream& rng, MatrixXd& x, MatrixXd& p) {
            s.sample_part(rng, x, p, true);
        };
        d.sample_minus = [s](RandomStream& rng, MatrixXd& x, MatrixXd& p) {
            s.sample_part(rng, x, p, false);
        };
        // negative volume of the first excited Wigner state, 2 e^{-1/2} - 1
        d.alpha0 = 2.0 * std::exp(-0.5) - 1.0;
        d.has_minus = true;
        return d;
    }
    throw ConfigError("initial.name", "unknown decomposition '" + name + "'");
}

SignedPushforward make_pushforward(int dim, int d_base, int hidden_layers,
                                   int hidden_width, double alpha0,
                                   bool alpha_frozen, StreamTable& streams) {
    SignedPushforward sp;
    sp.dim = dim;
    sp.d_base = d_base;
    sp.alpha_frozen = alpha_frozen;
    sp.alpha_raw = alpha_frozen || alpha0 <= 0.0 ? -30.0  // softplus ~ 1e-13
                                                 : softplus_inverse(alpha0);
    const int in = 1 + 2 * dim + d_base;
    const int out = 2 * dim;
    auto rp = streams.use(StreamId::NetInitPlus);
    auto rm = streams.use(StreamId::NetInitMinus);
    sp.net_plus = make_mlp(in, out, hidden_layers, hidden_width,
                           Activation::Tanh, rp);
    sp.net_minus = make_mlp(in, out, hidden_layers, hidden_width,
                            Activation::Tanh, rm);
    return sp;
}

double wigner_negativity_weight(const SignedPushforward& sp) {
    return sp.alpha();
}

PhasePoint push(const SignedPushforward& sp, Branch branch, double t,
                const PhasePoint& init, const VectorXd& z) {
    if (t < 0.0)
        throw NumericError("push: negative time");
    if (static_cast<int>(z.size()) != sp.d_base)
        throw DimensionError("push: |z| != d_base");
    if (init.dim() != sp.dim)
        throw DimensionError("push: point dimension mismatch");
    const double st = std::sqrt(t);
    if (st == 0.0)
        return init;  // exact: the network term is annihilated
    const int n = sp.dim;
    VectorXd input(1 + 2 * n + sp.d_base);
    input[0] = t;
    input.segment(1, n) = init.x();
    input.segment(1 + n, n) = init.p();
    input.segment(1 + 2 * n, sp.d_base) = z;
    const VectorXd raw = forward(sp.net(branch), input);
    return PhasePoint(init.x() + st * raw.head(n), init.p() + st * raw.tail(n));
}

void push_batch(const SignedPushforward& sp, Branch branch,
                PushedBatch& batch, ForwardTrace* trace) {
    const int n = sp.dim;
    const int m = batch.size();
    batch.sqrt_t = batch.times.array().sqrt().matrix();
    MatrixXd input(1 + 2 * n + sp.d_base, m);
    input.row(0) = batch.times.transpose();
    input.middleRows(1, n) = batch.x0;
    input.middleRows(1 + n, n) = batch.p0;
    input.middleRows(1 + 2 * n, sp.d_base) = batch.z;
    MatrixXd raw;
    if (trace)
        raw = forward(sp.net(branch), input, *trace);
    else
        raw = forward(sp.net(branch), input);
    batch.x = batch.x0;
    batch.p = batch.p0;
    for (int j = 0; j < m; ++j) {
        const double st = batch.sqrt_t[j];
        if (st != 0.0) {
            batch.x.col(j) += st * raw.col(j).head(n);
            batch.p.col(j) += st * raw.col(j).tail(n);
        }
    }
}

namespace {

void draw_inputs(const SignedPushforward& sp,
                 const std::function<void(RandomStream&, MatrixXd&, MatrixXd&)>& sampler,
                 const VectorXd& times, RandomStream& init_rng,
                 RandomStream& noise_rng, PushedBatch& batch) {
    const int n = sp.dim;
    const int m = static_cast<int>(times.size());
    batch.times = times;
    batch.x0 = MatrixXd(n, m);
    batch.p0 = MatrixXd(n, m);
    batch.z = MatrixXd(sp.d_base, m);
    sampler(init_rng, batch.x0, batch.p0);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < sp.d_base; ++i)
            batch.z(i, j) = noise_rng.normal();
}

} // namespace

SignedSample sample_batch(const SignedPushforward& sp,
                          const InitialDecomposition& decomp,
                          const VectorXd& times, RandomStream init_plus,
                          RandomStream init_minus, RandomStream noise_plus,
                          RandomStream noise_minus) {
    for (Eigen::Index j = 0; j < times.size(); ++j)
        if (times[j] < 0.0)
            throw NumericError("sample_batch: negative time");
    SignedSample s;
    s.alpha_plus = sp.alpha_plus();
    s.alpha_minus = sp.alpha_minus();
    draw_inputs(sp, decomp.sample_plus, times, init_plus, noise_plus, s.plus);
    push_batch(sp, Branch::Plus, s.plus);
    const bool minus_active = !sp.alpha_frozen && decomp.has_minus;
    if (minus_active) {
        draw_inputs(sp, decomp.sample_minus, times, init_minus, noise_minus,
                    s.minus);
        push_batch(sp, Branch::Minus, s.minus);
    }
    return s;
}

double signed_expectation(
    const SignedSample& sample,
    const std::function<double(double, const VectorXd&, const VectorXd&)>& g) {
    const int m = sample.plus.size();
    if (m == 0)
        throw NumericError("signed_expectation: empty batch");
    if (!sample.minus.empty() && sample.minus.size() != m)
        throw DimensionError("signed_expectation: branch sizes differ");
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        double term = sample.alpha_plus *
                      g(sample.plus.times[j], sample.plus.x.col(j),
                        sample.plus.p.col(j));
        if (!sample.minus.empty())
            term -= sample.alpha_minus *
                    g(sample.minus.times[j], sample.minus.x.col(j),
                      sample.minus.p.col(j));
        acc += term;
    }
    return acc / m;
}

} // namespace wig
