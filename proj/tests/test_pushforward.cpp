#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/pushforward.hpp"

using namespace wig;

namespace {
SignedPushforward random_sp(uint64_t seed, int dim, bool frozen,
                            double alpha0 = 0.0) {
    StreamTable st(seed);
    auto sp = make_pushforward(dim, 2 * dim, 2, 8, alpha0, frozen, st);
    // randomize the zero output layer so the map is nontrivial
    RandomStream rng(seed, StreamId::Scratch);
    for (auto* net : {&sp.net_plus, &sp.net_minus}) {
        VectorXd flat = net_to_flat(*net);
        for (Eigen::Index i = 0; i < flat.size(); ++i)
            flat[i] = rng.uniform(-0.5, 0.5);
        flat_to_net(flat, *net);
    }
    return sp;
}
PhasePoint pt1(double x, double p) {
    VectorXd xv(1), pv(1);
    xv[0] = x;
    pv[0] = p;
    return PhasePoint(xv, pv);
}
} // namespace

TEST_CASE("alpha transform") {
    CHECK(softplus(-800.0) == 0.0);  // asymptotic floor (exp underflows)
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
    const double nv = 2.0 * std::exp(-0.5) - 1.0;  // 0.2130613...
    const double raw = softplus_inverse(nv);
    CHECK(softplus(raw) == doctest::Approx(nv).epsilon(1e-12));

    SignedPushforward sp;
    sp.alpha_raw = raw;
    sp.alpha_frozen = false;
    CHECK(wigner_negativity_weight(sp) == doctest::Approx(nv).epsilon(1e-12));
    CHECK(sp.alpha_plus() - sp.alpha_minus() == doctest::Approx(1.0));

    sp.alpha_frozen = true;
    CHECK(wigner_negativity_weight(sp) == 0.0);

    for (double raw2 : {-50.0, -3.0, 0.0, 4.0, 100.0})
        CHECK(softplus(raw2) >= 0.0);
}

TEST_CASE("push enforces the initial condition exactly at t = 0") {
    auto sp = random_sp(21, 2, true);
    RandomStream rng(22, StreamId::Scratch);
    for (int i = 0; i < 10000; ++i) {
        VectorXd x(2), p(2), z(4);
        for (int k = 0; k < 2; ++k) {
            x[k] = rng.uniform(-5, 5);
            p[k] = rng.uniform(-5, 5);
        }
        for (int k = 0; k < 4; ++k) z[k] = rng.normal();
        const PhasePoint init(x, p);
        const PhasePoint out = push(sp, Branch::Plus, 0.0, init, z);
        REQUIRE(out.x() == init.x());  // bit-exact
        REQUIRE(out.p() == init.p());
    }
}

TEST_CASE("zero-initialized raw map keeps the identity at every time") {
    StreamTable st(23);
    auto sp = make_pushforward(1, 2, 2, 8, 0.0, true, st);  // output layer zero
    VectorXd z(2);
    z << 0.4, -1.2;
    const auto out = push(sp, Branch::Plus, 0.73, pt1(1.5, -0.5), z);
    CHECK(out.x()[0] == 1.5);
    CHECK(out.p()[0] == -0.5);
}

TEST_CASE("bias-only network shifts by sqrt(t) times the bias") {
    SignedPushforward sp;
    sp.dim = 1;
    sp.d_base = 1;
    sp.alpha_frozen = true;
    NetworkParams net;
    Layer l;
    l.w = MatrixXd::Zero(2, 4);  // input 1 + 2 + 1
    l.b = VectorXd(2);
    l.b << 0.25, -0.75;
    net.layers.push_back(l);
    sp.net_plus = net;
    sp.net_minus = net;
    VectorXd z(1);
    z << 0.0;
    const auto out = push(sp, Branch::Plus, 1.0, pt1(2.0, 1.0), z);
    CHECK(out.x()[0] == doctest::Approx(2.25).epsilon(1e-15));
    CHECK(out.p()[0] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("negative time is rejected") {
    auto sp = random_sp(24, 1, true);
    VectorXd z(2);
    z.setZero();
    CHECK_THROWS_AS(push(sp, Branch::Plus, -0.1, pt1(0, 0), z), NumericError);
}

TEST_CASE("sample_batch: frozen alpha skips the minus branch") {
    const PhysicalConstants c{1.0, 1.0, 1};
    auto sp = random_sp(25, 1, true);
    const auto decomp = make_decomposition(
        "gaussian-coherent", {{"x0", 1.0}, {"omega", 1.0}}, c);
    StreamTable st(26);
    const VectorXd times = VectorXd::Zero(32);
    const auto s = sample_batch(sp, decomp, times, st.use(StreamId::InitPlus),
                                st.use(StreamId::InitMinus),
                                st.use(StreamId::NoisePlus),
                                st.use(StreamId::NoiseMinus));
    CHECK(s.minus.empty());
    CHECK(s.alpha_plus == 1.0);
    CHECK(s.alpha_minus == 0.0);
    // all times zero: returned points equal the initial draws
    CHECK(s.plus.x == s.plus.x0);
    CHECK(s.plus.p == s.plus.p0);
    // minus streams were never consumed
    CHECK(st.pos[static_cast<uint32_t>(StreamId::InitMinus)] == 0);
    CHECK(st.pos[static_cast<uint32_t>(StreamId::NoiseMinus)] == 0);
}

TEST_CASE("sample_batch is deterministic under the seed") {
    const PhysicalConstants c{1.0, 1.0, 1};
    auto sp = random_sp(27, 1, false, 0.2);
    const auto decomp =
        make_decomposition("harmonic-excited-1", {{"omega", 1.0}}, c);
    auto draw = [&] {
        StreamTable st(28);
        const VectorXd times = VectorXd::Constant(16, 0.5);
        return sample_batch(sp, decomp, times, st.use(StreamId::InitPlus),
                            st.use(StreamId::InitMinus),
                            st.use(StreamId::NoisePlus),
                            st.use(StreamId::NoiseMinus));
    };
    const auto a = draw();
    const auto b = draw();
    CHECK(a.plus.x == b.plus.x);
    CHECK(a.minus.x == b.minus.x);
    // plus and minus branches come from distinct sub-streams
    CHECK(a.plus.x0 != a.minus.x0);
}

TEST_CASE("signed expectation: normalization and simple functionals") {
    const PhysicalConstants c{1.0, 1.0, 1};
    auto sp = random_sp(29, 1, false, 0.37);
    const auto decomp =
        make_decomposition("harmonic-excited-1", {{"omega", 1.0}}, c);
    StreamTable st(30);
    const VectorXd times = VectorXd::Constant(256, 0.25);
    const auto s = sample_batch(sp, decomp, times, st.use(StreamId::InitPlus),
                                st.use(StreamId::InitMinus),
                                st.use(StreamId::NoisePlus),
                                st.use(StreamId::NoiseMinus));
    const double one = signed_expectation(
        s, [](double, const VectorXd&, const VectorXd&) { return 1.0; });
    CHECK(std::abs(one - 1.0) < 1e-12);

    // alpha_minus = 0 reduces to the ordinary mean over the plus batch
    auto frozen = random_sp(31, 1, true);
    const auto dec2 = make_decomposition(
        "gaussian-coherent", {{"x0", 0.0}, {"omega", 1.0}}, c);
    StreamTable st2(32);
    const auto s2 = sample_batch(frozen, dec2, VectorXd::Zero(128),
                                 st2.use(StreamId::InitPlus),
                                 st2.use(StreamId::InitMinus),
                                 st2.use(StreamId::NoisePlus),
                                 st2.use(StreamId::NoiseMinus));
    const double mean_x = signed_expectation(
        s2, [](double, const VectorXd& x, const VectorXd&) { return x[0]; });
    CHECK(mean_x == doctest::Approx(s2.plus.x.row(0).mean()).epsilon(1e-14));

    // mirrored batch: odd functional averages to zero
    SignedSample mirror = s2;
    const int m = mirror.plus.size();
    for (int j = 0; j < m / 2; ++j) {
        mirror.plus.x(0, j) = -mirror.plus.x(0, m - 1 - j);
        mirror.plus.p(0, j) = -mirror.plus.p(0, m - 1 - j);
    }
    if (m % 2 == 1) {
        mirror.plus.x(0, m / 2) = 0.0;
        mirror.plus.p(0, m / 2) = 0.0;
    }
    const double odd = signed_expectation(
        mirror, [](double, const VectorXd& x, const VectorXd&) { return x[0]; });
    CHECK(std::abs(odd) < 1e-12);
}

TEST_CASE("excited-state rejection sampler matches its density moments") {
    // E[x^2 + p^2] over |W1|-split parts: for the plus part the radial law is
    // proportional to (2s-1)e^{-s} on s > 1/2 with s = (x^2+p^2)/hbar;
    // E[s] = int s (2s-1) e^{-s} / int (2s-1) e^{-s} over [1/2, inf).
    // int_{1/2}^inf (2s-1)e^{-s} ds = 2 e^{-1/2};
    // int_{1/2}^inf s(2s-1)e^{-s} ds = e^{-1/2} (2*(s^2+2s+2)-(s+1))|...
    const PhysicalConstants c{1.0, 1.0, 1};
    const auto decomp =
        make_decomposition("harmonic-excited-1", {{"omega", 1.0}}, c);
    StreamTable st(33);
    auto rng = st.use(StreamId::InitPlus);
    const int n = 40000;
    MatrixXd x(1, n), p(1, n);
    decomp.sample_plus(rng, x, p);
    double mean_s = 0.0;
    for (int i = 0; i < n; ++i) mean_s += x(0, i) * x(0, i) + p(0, i) * p(0, i);
    mean_s /= n;
    // exact: E[s] = (11/2 e^{-1/2} - 5/2 e^{-1/2} ... computed by quadrature
    // below) -- integrate g(s) = s(2s-1)e^{-s} on [1/2, 10] numerically
    double num = 0.0, den = 0.0;
    const int q = 200000;
    for (int i = 0; i < q; ++i) {
        const double s = 0.5 + (10.0 - 0.5) * (i + 0.5) / q;
        const double w = (10.0 - 0.5) / q;
        num += s * (2 * s - 1) * std::exp(-s) * w;
        den += (2 * s - 1) * std::exp(-s) * w;
    }
    CHECK(mean_s == doctest::Approx(num / den).epsilon(0.02));

    // minus part lives strictly inside the disk s < 1/2
    auto rng2 = st.use(StreamId::InitMinus);
    MatrixXd xm(1, 1000), pm(1, 1000);
    decomp.sample_minus(rng2, xm, pm);
    for (int i = 0; i < 1000; ++i)
        REQUIRE(xm(0, i) * xm(0, i) + pm(0, i) * pm(0, i) <= 0.5 + 1e-12);
}
