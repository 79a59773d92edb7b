#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/testfunc.hpp"

using namespace wig;

namespace {
PhasePoint pt1(double x, double p) {
    VectorXd xv(1), pv(1);
    xv[0] = x;
    pv[0] = p;
    return PhasePoint(xv, pv);
}
TestFunction tf1(double wx, double wp, double kappa, double b) {
    TestFunction tf;
    tf.w_x = VectorXd(1);
    tf.w_p = VectorXd(1);
    tf.w_x[0] = wx;
    tf.w_p[0] = wp;
    tf.kappa = kappa;
    tf.b = b;
    return tf;
}
} // namespace

TEST_CASE("phase: worked examples") {
    CHECK(phase(tf1(0, 0, 0, M_PI_2), 3.7, pt1(1.0, -2.0)) ==
          doctest::Approx(M_PI_2));
    CHECK(phase(tf1(1, 2, 3, 0), 1.0, pt1(1.0, 1.0)) == doctest::Approx(6.0));
    // linear in the arguments when b = 0, t = 0
    const double one = phase(tf1(0.3, -0.7, 0, 0), 0.0, pt1(1.1, 0.4));
    const double two = phase(tf1(0.3, -0.7, 0, 0), 0.0, pt1(2.2, 0.8));
    CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-14));
}

TEST_CASE("test_value and test_cos") {
    CHECK(test_value(tf1(0, 0, 0, 0), 0.0, pt1(0, 0)) == 0.0);
    CHECK(test_cos(tf1(0, 0, 0, 0), 0.0, pt1(0, 0)) == 1.0);
    CHECK(test_value(tf1(0, 0, 0, M_PI_2), 0.0, pt1(0, 0)) ==
          doctest::Approx(1.0));
    CHECK(test_cos(tf1(0, 0, 0, M_PI_2), 0.0, pt1(0, 0)) ==
          doctest::Approx(0.0).epsilon(1e-12));

    RandomStream rng(1, StreamId::Scratch);
    for (int i = 0; i < 200; ++i) {
        const auto tf = tf1(rng.uniform(-4, 4), rng.uniform(-4, 4),
                            rng.uniform(-4, 4), rng.uniform(0, 2 * M_PI));
        const auto pt = pt1(rng.uniform(-3, 3), rng.uniform(-3, 3));
        const double s = test_value(tf, 0.5, pt), c = test_cos(tf, 0.5, pt);
        CHECK(s * s + c * c == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("residual integrand: worked examples") {
    const PhysicalConstants c{1.0, 1.0, 1};
    const auto vfree = make_potential("free", {}, 1, 1.0);
    // all bulk terms vanish
    CHECK(residual_integrand(tf1(0, 1.5, 0, 0.3), 0.2, pt1(0.7, -0.4), vfree,
                             c) == 0.0);

    const auto harmonic = make_potential("harmonic", {{"omega", 1.0}}, 1, 1.0);
    // (p - x w_p) cos(w_x x + w_p p) = (3 - 2) cos(5)
    CHECK(residual_integrand(tf1(1, 1, 0, 0), 0.0, pt1(2.0, 3.0), harmonic, c) ==
          doctest::Approx(std::cos(5.0)).epsilon(1e-12));

    const auto pure_quartic =
        PotentialOracle::separable(1, [](double x) { return x * x * x * x; });
    // kappa exactly cancels the quartic difference 5.0
    CHECK(residual_integrand(tf1(0, 1, 5, 0), 0.0, pt1(1.0, 0.0), pure_quartic,
                             c) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("integrand reduces to the classical one for quadratic wells") {
    const PhysicalConstants c{1.0, 1.0, 1};
    const auto harmonic = make_potential("harmonic", {{"omega", 1.3}}, 1, 1.0);
    RandomStream rng(2, StreamId::Scratch);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto tf = tf1(rng.uniform(-4, 4), rng.uniform(-4, 4),
                            rng.uniform(-4, 4), rng.uniform(0, 2 * M_PI));
        const auto pt = pt1(rng.uniform(-3, 3), rng.uniform(-3, 3));
        const double t = rng.uniform(0, 1);
        const double quantum = residual_integrand(tf, t, pt, harmonic, c);
        const double classical =
            (tf.kappa + tf.w_x[0] * pt.p()[0] -
             classical_force_term(harmonic, pt.x(), tf.w_p)) *
            std::cos(phase(tf, t, pt));
        worst = std::max(worst, std::abs(quantum - classical));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("integrand is 2pi-periodic in the offset") {
    const PhysicalConstants c{1.0, 1.0, 1};
    const auto dwell =
        make_potential("double_well", {{"a", 0.25}, {"c", 1.0}}, 1, 1.0);
    RandomStream rng(3, StreamId::Scratch);
    for (int i = 0; i < 200; ++i) {
        auto tf = tf1(rng.uniform(-2, 2), rng.uniform(-2, 2),
                      rng.uniform(-2, 2), rng.uniform(0, 2 * M_PI));
        const auto pt = pt1(rng.uniform(-2, 2), rng.uniform(-2, 2));
        const double base = residual_integrand(tf, 0.3, pt, dwell, c);
        tf.b += 2.0 * M_PI;
        CHECK(residual_integrand(tf, 0.3, pt, dwell, c) ==
              doctest::Approx(base).epsilon(1e-11));
    }
}

TEST_CASE("w_p = 0 removes every potential dependence bit-exactly") {
    const PhysicalConstants c{1.0, 1.0, 1};
    const auto vfree = make_potential("free", {}, 1, 1.0);
    const auto dwell =
        make_potential("double_well", {{"a", 0.25}, {"c", 1.0}}, 1, 1.0);
    RandomStream rng(4, StreamId::Scratch);
    for (int i = 0; i < 200; ++i) {
        const auto tf = tf1(rng.uniform(-2, 2), 0.0, rng.uniform(-2, 2),
                            rng.uniform(0, 2 * M_PI));
        const auto pt = pt1(rng.uniform(-2, 2), rng.uniform(-2, 2));
        CHECK(residual_integrand(tf, 0.9, pt, dwell, c) ==
              residual_integrand(tf, 0.9, pt, vfree, c));
    }
}

TEST_CASE("init_test_set ranges, determinism, degenerate scales") {
    RandomStream a(10, StreamId::TestInit);
    auto set = init_test_set(64, 1, 4, 4, 4, a);
    CHECK(set.size() == 64);
    for (const auto& tf : set.members) {
        CHECK(std::abs(tf.w_x[0]) <= 4.0);
        CHECK(std::abs(tf.w_p[0]) <= 4.0);
        CHECK(std::abs(tf.kappa) <= 4.0);
        CHECK(tf.b >= 0.0);
        CHECK(tf.b < 2 * M_PI);
    }

    RandomStream b(10, StreamId::TestInit);
    auto set2 = init_test_set(64, 1, 4, 4, 4, b);
    for (int k = 0; k < 64; ++k) {
        CHECK(set.members[k].w_x[0] == set2.members[k].w_x[0]);
        CHECK(set.members[k].b == set2.members[k].b);
    }

    RandomStream z(11, StreamId::TestInit);
    auto zero = init_test_set(1, 1, 0, 0, 0, z);
    CHECK(zero.members[0].w_x[0] == 0.0);
    CHECK(zero.members[0].w_p[0] == 0.0);
    CHECK(zero.members[0].kappa == 0.0);
}

TEST_CASE("flat round trip and clipping") {
    RandomStream a(12, StreamId::TestInit);
    auto set = init_test_set(8, 2, 4, 4, 4, a);
    auto flat = testset_to_flat(set);
    TestFunctionSet copy = set;
    flat_to_testset(flat, copy);
    CHECK(testset_to_flat(copy) == flat);

    set.members[0].w_x[0] = 11.0;
    set.members[0].kappa = -9.0;
    clip_to_boxes(set, 4, 4, 4);
    CHECK(set.members[0].w_x[0] == 4.0);
    CHECK(set.members[0].kappa == -4.0);
}
