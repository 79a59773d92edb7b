#include "core/testfunc.hpp"

#include <cmath>

namespace wig {

double phase(const TestFunction& tf, double t, const VectorXd& x,
             const VectorXd& p) {
    if (x.size() != tf.w_x.size() || p.size() != tf.w_p.size())
        throw DimensionError("phase: point/test-function dimension mismatch");
    return tf.w_x.dot(x) + tf.w_p.dot(p) + tf.kappa * t + tf.b;
}

double phase(const TestFunction& tf, double t, const PhasePoint& pt) {
    return phase(tf, t, pt.x(), pt.p());
}

double test_value(const TestFunction& tf, double t, const PhasePoint& pt) {
    return std::sin(phase(tf, t, pt));
}

double test_cos(const TestFunction& tf, double t, const PhasePoint& pt) {
    return std::cos(phase(tf, t, pt));
}

double residual_integrand(const TestFunction& tf, double t,
                          const PhasePoint& pt, const PotentialOracle& v,
                          const PhysicalConstants& consts) {
    const double pd = potential_difference(v, pt.x(), tf.w_p, consts.hbar);
    const double bulk = tf.kappa + tf.w_x.dot(pt.p()) / consts.mass - pd;
    return bulk * std::cos(phase(tf, t, pt));
}

TestFunctionSet init_test_set(int K, int N, double scale_x, double scale_p,
                              double scale_kappa, RandomStream& rng) {
    if (K < 1)
        throw ConfigError("num_test", "K must be >= 1");
    TestFunctionSet set;
    set.members.reserve(K);
    for (int k = 0; k < K; ++k) {
        TestFunction tf;
        tf.w_x = VectorXd(N);
        tf.w_p = VectorXd(N);
        for (int i = 0; i < N; ++i) tf.w_x[i] = rng.uniform(-scale_x, scale_x);
        for (int i = 0; i < N; ++i) tf.w_p[i] = rng.uniform(-scale_p, scale_p);
        tf.kappa = rng.uniform(-scale_kappa, scale_kappa);
        tf.b = rng.uniform(0.0, 2.0 * M_PI);
        set.members.push_back(std::move(tf));
    }
    return set;
}

VectorXd testset_to_flat(const TestFunctionSet& tfs) {
    const int n = tfs.dim();
    VectorXd flat(static_cast<Eigen::Index>(tfs.size()) * (2 * n + 2));
    Eigen::Index o = 0;
    for (const auto& tf : tfs.members) {
        flat.segment(o, n) = tf.w_x;
        flat.segment(o + n, n) = tf.w_p;
        flat[o + 2 * n] = tf.kappa;
        flat[o + 2 * n + 1] = tf.b;
        o += 2 * n + 2;
    }
    return flat;
}

void flat_to_testset(const VectorXd& flat, TestFunctionSet& tfs) {
    const int n = tfs.dim();
    if (flat.size() != static_cast<Eigen::Index>(tfs.size()) * (2 * n + 2))
        throw DimensionError("flat_to_testset: size mismatch");
    Eigen::Index o = 0;
    for (auto& tf : tfs.members) {
        tf.w_x = flat.segment(o, n);
        tf.w_p = flat.segment(o + n, n);
        tf.kappa = flat[o + 2 * n];
        tf.b = flat[o + 2 * n + 1];
        o += 2 * n + 2;
    }
}

void clip_to_boxes(TestFunctionSet& tfs, double scale_x, double scale_p,
                   double scale_kappa) {
    auto clamp = [](double v, double s) {
        return v > s ? s : (v < -s ? -s : v);
    };
    for (auto& tf : tfs.members) {
        for (Eigen::Index i = 0; i < tf.w_x.size(); ++i)
            tf.w_x[i] = clamp(tf.w_x[i], scale_x);
        for (Eigen::Index i = 0; i < tf.w_p.size(); ++i)
            tf.w_p[i] = clamp(tf.w_p[i], scale_p);
        tf.kappa = clamp(tf.kappa, scale_kappa);
    }
}

} // namespace wig
