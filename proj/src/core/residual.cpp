#include "core/residual.hpp"

#include <cmath>

namespace wig {

namespace {

inline void sin_cos(double a, double& s, double& c) {
#if defined(__GLIBC__)
    ::sincos(a, &s, &c);
#else
    s = std::sin(a);
    c = std::cos(a);
#endif
}

// Inner product w_x.x + w_p.p for one column, avoiding temporaries.
inline double phase_col(const TestFunction& tf, double t, const MatrixXd& x,
                        const MatrixXd& p, int m) {
    double s = tf.kappa * t + tf.b;
    for (Eigen::Index i = 0; i < x.rows(); ++i) s += tf.w_x[i] * x(i, m);
    for (Eigen::Index i = 0; i < p.rows(); ++i) s += tf.w_p[i] * p(i, m);
    return s;
}

// pd = potential-difference (or classical-force) term for one sample.
inline double potential_term_col(const PotentialOracle& v, const MatrixXd& x,
                                 int m, const TestFunction& tf, double hbar,
                                 PotentialTerm mode, double fd_step) {
    const VectorXd xc = x.col(m);
    if (mode == PotentialTerm::ClassicalForce)
        return classical_force_term(v, xc, tf.w_p, fd_step);
    return potential_difference(v, xc, tf.w_p, hbar);
}

// d(pd)/d(w_p) by central finite differences on V (the one place derivative
// information about V is approximated; adversary ascent only).
VectorXd potential_term_wp_grad(const PotentialOracle& v, const MatrixXd& x,
                                int m, const TestFunction& tf, double hbar,
                                PotentialTerm mode, double fd_step) {
    const int n = static_cast<int>(x.rows());
    VectorXd grad(n);
    const double s = fd_step;
    if (mode == PotentialTerm::ClassicalForce) {
        // pd = sum_i w_i dV/dx_i(x)
        if (v.is_separable()) {
            for (int i = 0; i < n; ++i)
                grad[i] = (v.eval_term(x(i, m) + s) - v.eval_term(x(i, m) - s)) /
                          (2.0 * s);
        } else {
            VectorXd probe = x.col(m);
            for (int i = 0; i < n; ++i) {
                probe[i] = x(i, m) + s;
                const double vp = v.eval(probe);
                probe[i] = x(i, m) - s;
                const double vm = v.eval(probe);
                probe[i] = x(i, m);
                grad[i] = (vp - vm) / (2.0 * s);
            }
        }
        return grad;
    }
    // pd = [V(x + h w_p) - V(x - h w_p)] / hbar, h = hbar/2:
    // d/dw_i = (1/2)[dV/dx_i(x+) + dV/dx_i(x-)]
    const double h = 0.5 * hbar;
    if (v.is_separable()) {
        for (int i = 0; i < n; ++i) {
            const double xp = x(i, m) + h * tf.w_p[i];
            const double xm = x(i, m) - h * tf.w_p[i];
            const double dp = (v.eval_term(xp + s) - v.eval_term(xp - s)) / (2.0 * s);
            const double dm = (v.eval_term(xm + s) - v.eval_term(xm - s)) / (2.0 * s);
            grad[i] = 0.5 * (dp + dm);
        }
        return grad;
    }
    const VectorXd xp = x.col(m) + h * tf.w_p;
    const VectorXd xm = x.col(m) - h * tf.w_p;
    VectorXd probe(n);
    for (int i = 0; i < n; ++i) {
        probe = xp;
        probe[i] += s;
        const double vpp = v.eval(probe);
        probe[i] -= 2.0 * s;
        const double vpm = v.eval(probe);
        probe = xm;
        probe[i] += s;
        const double vmp = v.eval(probe);
        probe[i] -= 2.0 * s;
        const double vmm = v.eval(probe);
        grad[i] = 0.5 * ((vpp - vpm) + (vmp - vmm)) / (2.0 * s);
    }
    return grad;
}

// d(pd)/dx by central finite differences on V (generator descent only,
// behind ResidualOptions::exact_potential_grad).
VectorXd potential_term_x_grad(const PotentialOracle& v, const MatrixXd& x,
                               int m, const TestFunction& tf, double hbar,
                               double fd_step) {
    const int n = static_cast<int>(x.rows());
    VectorXd grad(n);
    const double s = fd_step;
    const double h = 0.5 * hbar;
    if (v.is_separable()) {
        for (int i = 0; i < n; ++i) {
            const double xp = x(i, m) + h * tf.w_p[i];
            const double xm = x(i, m) - h * tf.w_p[i];
            const double dp = (v.eval_term(xp + s) - v.eval_term(xp - s)) / (2.0 * s);
            const double dm = (v.eval_term(xm + s) - v.eval_term(xm - s)) / (2.0 * s);
            grad[i] = (dp - dm) / hbar;
        }
        return grad;
    }
    const VectorXd xp = x.col(m) + h * tf.w_p;
    const VectorXd xm = x.col(m) - h * tf.w_p;
    VectorXd probe(n);
    for (int i = 0; i < n; ++i) {
        probe = xp;
        probe[i] += s;
        const double vpp = v.eval(probe);
        probe[i] -= 2.0 * s;
        const double vpm = v.eval(probe);
        probe = xm;
        probe[i] += s;
        const double vmp = v.eval(probe);
        probe[i] -= 2.0 * s;
        const double vmm = v.eval(probe);
        grad[i] = ((vpp - vpm) - (vmp - vmm)) / (2.0 * s * hbar);
    }
    return grad;
}

// Stored per-sample values for one term of the residual.
struct BranchArrays {
    MatrixXd sinv, cosv, g;  // [M x K]; g only for the bulk term
};

struct Group {
    PushedBatch plus, minus;
    ForwardTrace trace_plus, trace_minus;
    BranchArrays ap, am;
    MatrixXd y;      // signed per-sample values [M x K]
    VectorXd mean;   // K
    VectorXd var;    // K, unbiased sample variance of y
};

void finalize_stats(Group& g, int m_size, int k_size) {
    g.mean = g.y.colwise().mean();
    g.var = VectorXd::Zero(k_size);
    if (m_size > 1) {
        for (int k = 0; k < k_size; ++k)
            g.var[k] = (g.y.col(k).array() - g.mean[k]).square().sum() /
                       (m_size - 1);
    }
}

} // namespace

static std::pair<ResidualEstimate, LossGradients> residual_impl(
    const SignedPushforward& sp, const InitialDecomposition& decomp,
    const TestFunctionSet& tfs, const PotentialOracle& v,
    const PhysicalConstants& consts, const RunConfig& cfg,
    StreamTable& streams, const ResidualOptions& opts, bool want_grads) {
    const int m_size = cfg.batch_size;
    const int k_size = tfs.size();
    const int n = sp.dim;
    const double t_hor = cfg.horizon;
    const bool gen_grads = want_grads && opts.generator_grads;
    const bool adv_grads = want_grads && opts.adversary_grads;
    const bool minus_active = !sp.alpha_frozen && decomp.has_minus;
    const double a_plus = sp.alpha_plus();
    const double a_minus = sp.alpha_minus();

    if (gen_grads && opts.flow_override)
        throw ConfigError("flow_override",
                          "generator gradients are undefined for a frozen flow");
    if (tfs.dim() != n)
        throw DimensionError("residual: test-function dimension mismatch");

    const uint64_t v_calls0 = v.call_count();
    const uint64_t v_scalar0 = v.scalar_call_count();

    auto sid = [&](StreamId normal, StreamId heldout) {
        return opts.heldout_streams ? heldout : normal;
    };
    auto init_p = streams.use(sid(StreamId::InitPlus, StreamId::HeldoutInitPlus));
    auto init_m = streams.use(sid(StreamId::InitMinus, StreamId::HeldoutInitMinus));
    auto noise_p = streams.use(sid(StreamId::NoisePlus, StreamId::HeldoutNoisePlus));
    auto noise_m =
        streams.use(sid(StreamId::NoiseMinus, StreamId::HeldoutNoiseMinus));
    auto times_rng = streams.use(sid(StreamId::Times, StreamId::HeldoutTimes));

    Group ga, gb, gc;

    auto draw_branch = [&](Group& g, Branch br, const VectorXd& times,
                           bool needs_push, bool needs_noise) {
        PushedBatch& batch = br == Branch::Plus ? g.plus : g.minus;
        auto& sampler =
            br == Branch::Plus ? decomp.sample_plus : decomp.sample_minus;
        RandomStream& irng = br == Branch::Plus ? init_p : init_m;
        RandomStream& nrng = br == Branch::Plus ? noise_p : noise_m;
        batch.times = times;
        batch.sqrt_t = times.array().sqrt().matrix();
        batch.x0 = MatrixXd(n, m_size);
        batch.p0 = MatrixXd(n, m_size);
        sampler(irng, batch.x0, batch.p0);
        if (needs_noise) {
            batch.z = MatrixXd(sp.d_base, m_size);
            for (int j = 0; j < m_size; ++j)
                for (int i = 0; i < sp.d_base; ++i)
                    batch.z(i, j) = nrng.normal();
        }
        if (!needs_push) {
            batch.x = batch.x0;  // t = 0 boundary: identity by construction
            batch.p = batch.p0;
            return;
        }
        if (opts.flow_override) {
            batch.x = MatrixXd(n, m_size);
            batch.p = MatrixXd(n, m_size);
            VectorXd xo(n), po(n);
            for (int j = 0; j < m_size; ++j) {
                (*opts.flow_override)(times[j], batch.x0.col(j),
                                      batch.p0.col(j), xo, po);
                batch.x.col(j) = xo;
                batch.p.col(j) = po;
            }
            return;
        }
        ForwardTrace* trace = nullptr;
        if (gen_grads)
            trace = br == Branch::Plus ? &g.trace_plus : &g.trace_minus;
        push_batch(sp, br, batch, trace);
    };

    // Three independent batches: terminal boundary, initial boundary, bulk.
    const VectorXd times_a = VectorXd::Constant(m_size, t_hor);
    const VectorXd times_b = VectorXd::Zero(m_size);
    VectorXd times_c(m_size);
    for (int j = 0; j < m_size; ++j) {
        times_c[j] = opts.stratified_times
                         ? t_hor * ((j + times_rng.uniform()) / m_size)
                         : times_rng.uniform(0.0, t_hor);
    }

    draw_branch(ga, Branch::Plus, times_a, true, true);
    draw_branch(gb, Branch::Plus, times_b, false, false);
    draw_branch(gc, Branch::Plus, times_c, true, true);
    if (minus_active) {
        draw_branch(ga, Branch::Minus, times_a, true, true);
        draw_branch(gb, Branch::Minus, times_b, false, false);
        draw_branch(gc, Branch::Minus, times_c, true, true);
    }

    const bool store = want_grads;
    auto alloc_group = [&](Group& g, bool bulk) {
        g.y = MatrixXd(m_size, k_size);
        if (!store) return;
        g.ap.sinv = MatrixXd(m_size, k_size);
        g.ap.cosv = MatrixXd(m_size, k_size);
        if (bulk) g.ap.g = MatrixXd(m_size, k_size);
        if (minus_active) {
            g.am.sinv = MatrixXd(m_size, k_size);
            g.am.cosv = MatrixXd(m_size, k_size);
            if (bulk) g.am.g = MatrixXd(m_size, k_size);
        }
    };
    alloc_group(ga, false);
    alloc_group(gb, false);
    alloc_group(gc, true);

    // Pass 1: per-sample values, per-test means and variances.
    // TODO: fan out over (m, k) with a tree reduction once multi-core
    // runners matter; the serial accumulation order is load-bearing for the
    // single-threaded determinism contract.
    for (int k = 0; k < k_size; ++k) {
        const TestFunction& tf = tfs.members[k];

        auto boundary_value = [&](const PushedBatch& b, BranchArrays& arr,
                                  int j) {
            double s, c;
            sin_cos(phase_col(tf, b.times[j], b.x, b.p, j), s, c);
            if (store) {
                arr.sinv(j, k) = s;
                arr.cosv(j, k) = c;
            }
            return s;
        };
        auto bulk_value = [&](const PushedBatch& b, BranchArrays& arr, int j) {
            double s, c;
            sin_cos(phase_col(tf, b.times[j], b.x, b.p, j), s, c);
            const double pd = potential_term_col(v, b.x, j, tf, consts.hbar,
                                                 opts.potential_term,
                                                 opts.fd_step);
            double dot_wp = 0.0;
            for (int i = 0; i < n; ++i) dot_wp += tf.w_x[i] * b.p(i, j);
            const double gval = tf.kappa + dot_wp / consts.mass - pd;
            if (store) {
                arr.sinv(j, k) = s;
                arr.cosv(j, k) = c;
                arr.g(j, k) = gval;
            }
            return gval * c;
        };

        for (int j = 0; j < m_size; ++j) {
            double ya = a_plus * boundary_value(ga.plus, ga.ap, j);
            double yb = a_plus * boundary_value(gb.plus, gb.ap, j);
            double yc = a_plus * bulk_value(gc.plus, gc.ap, j);
            if (minus_active) {
                ya -= a_minus * boundary_value(ga.minus, ga.am, j);
                yb -= a_minus * boundary_value(gb.minus, gb.am, j);
                yc -= a_minus * bulk_value(gc.minus, gc.am, j);
            }
            ga.y(j, k) = ya;
            gb.y(j, k) = yb;
            gc.y(j, k) = yc;
        }
    }
    finalize_stats(ga, m_size, k_size);
    finalize_stats(gb, m_size, k_size);
    finalize_stats(gc, m_size, k_size);

    ResidualEstimate est;
    est.per_test = ga.mean - gb.mean - t_hor * gc.mean;
    est.variance = (ga.var + gb.var + t_hor * t_hor * gc.var) / m_size;
    double loss = 0.0, corrected = 0.0;
    for (int k = 0; k < k_size; ++k) {
        const double r = est.per_test[k];
        loss += r * r;
        corrected += r * r - est.variance[k];
    }
    est.loss = loss / k_size;
    est.corrected_loss = corrected / k_size;
    est.v_calls = v.call_count() - v_calls0;
    est.v_scalar_calls = v.scalar_call_count() - v_scalar0;
    if (!est.per_test.allFinite() || !std::isfinite(est.loss))
        throw NumericError("residual estimate is not finite");

    LossGradients grads;
    if (!want_grads)
        return {est, grads};

    grads.has_minus = minus_active;
    if (gen_grads) {
        grads.plus = NetGrads::zeros_like(sp.net_plus);
        if (minus_active) grads.minus = NetGrads::zeros_like(sp.net_minus);
    }
    if (adv_grads) {
        grads.tf.resize(k_size);
        for (auto& tg : grads.tf) {
            tg.w_x = VectorXd::Zero(n);
            tg.w_p = VectorXd::Zero(n);
        }
    }

    // Pass 2: per-sample loss weights d(loss)/d(y), then chain into
    // adversary parameters, alpha and the network output cotangents.
    MatrixXd cot_a_p, cot_c_p, cot_a_m, cot_c_m;
    if (gen_grads) {
        cot_a_p = MatrixXd::Zero(2 * n, m_size);
        cot_c_p = MatrixXd::Zero(2 * n, m_size);
        if (minus_active) {
            cot_a_m = MatrixXd::Zero(2 * n, m_size);
            cot_c_m = MatrixXd::Zero(2 * n, m_size);
        }
    }
    const double corr = opts.variance_corrected && m_size > 1
                            ? 1.0 / (static_cast<double>(m_size) * (m_size - 1))
                            : 0.0;
    double alpha_grad = 0.0;

    for (int k = 0; k < k_size; ++k) {
        const TestFunction& tf = tfs.members[k];
        const double r = est.per_test[k];
        const double base_a = 2.0 * r / (k_size * static_cast<double>(m_size));
        TfGrad* tg = adv_grads ? &grads.tf[k] : nullptr;

        for (int j = 0; j < m_size; ++j) {
            const double wa =
                base_a - 2.0 * corr / k_size * (ga.y(j, k) - ga.mean[k]);
            const double wb =
                -base_a - 2.0 * corr / k_size * (gb.y(j, k) - gb.mean[k]);
            const double wc = -t_hor * base_a -
                              2.0 * corr * t_hor * t_hor / k_size *
                                  (gc.y(j, k) - gc.mean[k]);

            // --- boundary terms -------------------------------------------
            auto boundary_grads = [&](const BranchArrays& arr,
                                      const PushedBatch& b, double weight,
                                      double sign_alpha, double t_val,
                                      MatrixXd* cot) {
                const double c = arr.cosv(j, k);
                const double wac = weight * sign_alpha * c;
                if (tg) {
                    for (int i = 0; i < n; ++i) {
                        tg->w_x[i] += wac * b.x(i, j);
                        tg->w_p[i] += wac * b.p(i, j);
                    }
                    tg->kappa += wac * t_val;
                    tg->b += wac;
                }
                if (cot) {
                    for (int i = 0; i < n; ++i) {
                        (*cot)(i, j) += wac * tf.w_x[i];
                        (*cot)(n + i, j) += wac * tf.w_p[i];
                    }
                }
            };
            boundary_grads(ga.ap, ga.plus, wa, a_plus, t_hor,
                           gen_grads ? &cot_a_p : nullptr);
            boundary_grads(gb.ap, gb.plus, wb, a_plus, 0.0, nullptr);
            if (minus_active) {
                boundary_grads(ga.am, ga.minus, wa, -a_minus, t_hor,
                               gen_grads ? &cot_a_m : nullptr);
                boundary_grads(gb.am, gb.minus, wb, -a_minus, 0.0, nullptr);
            }

            // --- bulk term -------------------------------------------------
            auto bulk_grads = [&](const BranchArrays& arr, const PushedBatch& b,
                                  double weight, double sign_alpha,
                                  MatrixXd* cot) {
                const double c = arr.cosv(j, k);
                const double s = arr.sinv(j, k);
                const double gval = arr.g(j, k);
                const double wsa = weight * sign_alpha;
                if (cot && opts.exact_potential_grad) {
                    if (opts.potential_term != PotentialTerm::QuantumDifference)
                        throw ConfigError("exact_potential_grad",
                                          "only supported for the quantum "
                                          "difference term");
                    const VectorXd dpdx = potential_term_x_grad(
                        v, b.x, j, tf, consts.hbar, opts.fd_step);
                    for (int i = 0; i < n; ++i)
                        (*cot)(i, j) += wsa * (-c) * dpdx[i];
                }
                if (tg) {
                    const VectorXd dpd = potential_term_wp_grad(
                        v, b.x, j, tf, consts.hbar, opts.potential_term,
                        opts.fd_step);
                    for (int i = 0; i < n; ++i) {
                        tg->w_x[i] += wsa * (c * b.p(i, j) / consts.mass -
                                             gval * s * b.x(i, j));
                        tg->w_p[i] +=
                            wsa * (-c * dpd[i] - gval * s * b.p(i, j));
                    }
                    tg->kappa += wsa * (c - gval * s * b.times[j]);
                    tg->b += wsa * (-gval * s);
                }
                if (cot) {
                    for (int i = 0; i < n; ++i) {
                        (*cot)(i, j) += wsa * (-gval * s) * tf.w_x[i];
                        (*cot)(n + i, j) +=
                            wsa * (c * tf.w_x[i] / consts.mass -
                                   gval * s * tf.w_p[i]);
                    }
                }
            };
            bulk_grads(gc.ap, gc.plus, wc, a_plus,
                       gen_grads ? &cot_c_p : nullptr);
            if (minus_active)
                bulk_grads(gc.am, gc.minus, wc, -a_minus,
                           gen_grads ? &cot_c_m : nullptr);

            // --- mixing weight ---------------------------------------------
            if (minus_active && !sp.alpha_frozen) {
                alpha_grad += wa * (ga.ap.sinv(j, k) - ga.am.sinv(j, k));
                alpha_grad += wb * (gb.ap.sinv(j, k) - gb.am.sinv(j, k));
                alpha_grad +=
                    wc * (gc.ap.g(j, k) * gc.ap.cosv(j, k) -
                          gc.am.g(j, k) * gc.am.cosv(j, k));
            }
        }
    }
    grads.alpha_raw =
        minus_active && !sp.alpha_frozen ? alpha_grad * sigmoid(sp.alpha_raw)
                                         : 0.0;

    if (gen_grads) {
        auto chain_branch = [&](Branch br, Group& g, MatrixXd& cot) {
            PushedBatch& b = br == Branch::Plus ? g.plus : g.minus;
            for (int j = 0; j < m_size; ++j) cot.col(j) *= b.sqrt_t[j];
            const ForwardTrace& trace =
                br == Branch::Plus ? g.trace_plus : g.trace_minus;
            return backward(sp.net(br), trace, cot);
        };
        grads.plus = chain_branch(Branch::Plus, ga, cot_a_p);
        grads.plus.add(chain_branch(Branch::Plus, gc, cot_c_p));
        if (minus_active) {
            grads.minus = chain_branch(Branch::Minus, ga, cot_a_m);
            grads.minus.add(chain_branch(Branch::Minus, gc, cot_c_m));
        }
    }

    est.v_calls = v.call_count() - v_calls0;
    est.v_scalar_calls = v.scalar_call_count() - v_scalar0;
    return {est, grads};
}

ResidualEstimate estimate_residual(const SignedPushforward& sp,
                                   const InitialDecomposition& decomp,
                                   const TestFunctionSet& tfs,
                                   const PotentialOracle& v,
                                   const PhysicalConstants& consts,
                                   const RunConfig& cfg, StreamTable& streams,
                                   const ResidualOptions& opts) {
    return residual_impl(sp, decomp, tfs, v, consts, cfg, streams, opts, false)
        .first;
}

std::pair<ResidualEstimate, LossGradients> loss_and_gradients(
    const SignedPushforward& sp, const InitialDecomposition& decomp,
    const TestFunctionSet& tfs, const PotentialOracle& v,
    const PhysicalConstants& consts, const RunConfig& cfg,
    StreamTable& streams, const ResidualOptions& opts) {
    return residual_impl(sp, decomp, tfs, v, consts, cfg, streams, opts, true);
}

} // namespace wig
