#include "core/trainer.hpp"

#include <cmath>

namespace wig {

namespace {

constexpr double kDivergenceCap = 1e6;

std::optional<FlowMap> frozen_flow_from(const ExperimentConfig& cfg) {
    if (cfg.frozen_flow.empty())
        return std::nullopt;
    std::map<std::string, double> params = cfg.potential_params;
    return analytic_solution(cfg.frozen_flow, params, cfg.consts).flow;
}

} // namespace

ResidualOptions residual_options_from(const ExperimentConfig& cfg) {
    ResidualOptions opts;
    opts.stratified_times = cfg.time_sampling == "stratified";
    opts.variance_corrected = cfg.variance_corrected_loss;
    opts.exact_potential_grad = cfg.exact_potential_grad;
    opts.fd_step = cfg.fd_step;
    opts.flow_override = frozen_flow_from(cfg);
    return opts;
}

double lr_factor(const ExperimentConfig& cfg, uint64_t epoch) {
    if (cfg.lr_schedule != "step" || cfg.run.epochs == 0)
        return 1.0;
    const double frac = static_cast<double>(epoch) / cfg.run.epochs;
    if (frac < 0.6)
        return 1.0;
    return frac < 0.85 ? 0.3 : 0.1;
}

TrainState make_train_state(const ExperimentConfig& cfg) {
    validate_experiment(cfg);
    TrainState st;
    st.streams = StreamTable(cfg.run.seed);
    st.decomp = make_decomposition(cfg.initial_name, cfg.initial_params,
                                   cfg.consts);
    st.sp = make_pushforward(cfg.consts.dim, cfg.d_base_effective(),
                             cfg.hidden_layers, cfg.hidden_width,
                             st.decomp.alpha0, cfg.freeze_alpha, st.streams);
    auto tf_rng = st.streams.use(StreamId::TestInit);
    st.tfs = init_test_set(cfg.run.num_test, cfg.consts.dim, cfg.scale_x,
                           cfg.scale_p, cfg.scale_kappa, tf_rng);
    st.opt_plus = AdamState(net_to_flat(st.sp.net_plus).size());
    st.opt_minus = AdamState(net_to_flat(st.sp.net_minus).size());
    st.opt_alpha = AdamState(1);
    st.opt_eta = AdamState(testset_to_flat(st.tfs).size());
    st.frozen_flow = frozen_flow_from(cfg);
    return st;
}

TrainState state_from_checkpoint(const Checkpoint& ck,
                                 const ExperimentConfig& cfg) {
    if (!ck.trainer)
        throw IoError("checkpoint has no trainer state; cannot resume");
    TrainState st;
    st.sp = ck.sp;
    st.decomp = make_decomposition(ck.decomp_name, ck.decomp_params, ck.consts);
    st.tfs = ck.trainer->tfs;
    st.opt_plus = ck.trainer->opt_plus;
    st.opt_minus = ck.trainer->opt_minus;
    st.opt_alpha = ck.trainer->opt_alpha;
    st.opt_eta = ck.trainer->opt_eta;
    st.streams = ck.trainer->streams;
    st.epoch = ck.trainer->epoch;
    st.frozen_flow = frozen_flow_from(cfg);
    return st;
}

Checkpoint to_checkpoint(const TrainState& state, const ExperimentConfig& cfg) {
    Checkpoint ck;
    ck.sp = state.sp;
    ck.consts = cfg.consts;
    ck.horizon = cfg.run.horizon;
    ck.decomp_name = state.decomp.name;
    ck.decomp_params = state.decomp.params;
    TrainerStateBlob t;
    t.epoch = state.epoch;
    t.opt_plus = state.opt_plus;
    t.opt_minus = state.opt_minus;
    t.opt_alpha = state.opt_alpha;
    t.opt_eta = state.opt_eta;
    t.tfs = state.tfs;
    t.streams = state.streams;
    ck.trainer = std::move(t);
    return ck;
}

void adversary_phase(TrainState& state, const ExperimentConfig& cfg,
                     const PotentialOracle& v, int n_adv) {
    if (n_adv < 0)
        throw ConfigError("n_adv", "must be >= 0");
    ResidualOptions opts = residual_options_from(cfg);
    opts.adversary_grads = true;
    for (int s = 0; s < n_adv; ++s) {
        auto [est, grads] = loss_and_gradients(state.sp, state.decomp,
                                               state.tfs, v, cfg.consts,
                                               cfg.run, state.streams, opts);
        VectorXd eta = testset_to_flat(state.tfs);
        const int n = state.tfs.dim();
        VectorXd g(eta.size());
        Eigen::Index o = 0;
        for (const auto& tg : grads.tf) {
            g.segment(o, n) = tg.w_x;
            g.segment(o + n, n) = tg.w_p;
            g[o + 2 * n] = tg.kappa;
            g[o + 2 * n + 1] = tg.b;
            o += 2 * n + 2;
        }
        adam_step(eta, g, state.opt_eta,
                  cfg.run.lr_adv * lr_factor(cfg, state.epoch),
                  StepDirection::Ascent);
        flat_to_testset(eta, state.tfs);
        clip_to_boxes(state.tfs, cfg.scale_x, cfg.scale_p, cfg.scale_kappa);
    }
}

ResidualEstimate generator_phase(TrainState& state, const ExperimentConfig& cfg,
                                 const PotentialOracle& v) {
    ResidualOptions opts = residual_options_from(cfg);
    if (state.frozen_flow) {
        // frozen exact map: nothing to train, just measure
        return estimate_residual(state.sp, state.decomp, state.tfs, v,
                                 cfg.consts, cfg.run, state.streams, opts);
    }
    opts.generator_grads = true;
    auto [est, grads] = loss_and_gradients(state.sp, state.decomp, state.tfs,
                                           v, cfg.consts, cfg.run,
                                           state.streams, opts);
    const double lr = cfg.run.lr_gen * lr_factor(cfg, state.epoch);
    VectorXd theta = net_to_flat(state.sp.net_plus);
    adam_step(theta, grads_to_flat(grads.plus), state.opt_plus, lr,
              StepDirection::Descent);
    flat_to_net(theta, state.sp.net_plus);
    if (grads.has_minus) {
        theta = net_to_flat(state.sp.net_minus);
        adam_step(theta, grads_to_flat(grads.minus), state.opt_minus, lr,
                  StepDirection::Descent);
        flat_to_net(theta, state.sp.net_minus);
    }
    if (!state.sp.alpha_frozen && state.decomp.has_minus) {
        VectorXd a(1), ga(1);
        a[0] = state.sp.alpha_raw;
        ga[0] = grads.alpha_raw;
        adam_step(a, ga, state.opt_alpha, lr, StepDirection::Descent);
        state.sp.alpha_raw = a[0];
    }
    return est;
}

double heldout_loss(TrainState& state, const ExperimentConfig& cfg,
                    const PotentialOracle& v, int factor) {
    auto rng = state.streams.use(StreamId::HeldoutTest);
    TestFunctionSet fresh =
        init_test_set(factor * cfg.run.num_test, cfg.consts.dim, cfg.scale_x,
                      cfg.scale_p, cfg.scale_kappa, rng);
    ResidualOptions opts = residual_options_from(cfg);
    opts.heldout_streams = true;
    RunConfig rc = cfg.run;
    rc.num_test = fresh.size();
    return estimate_residual(state.sp, state.decomp, fresh, v, cfg.consts, rc,
                             state.streams, opts)
        .loss;
}

void signed_moments(TrainState& state, double t, int n_samples,
                    VectorXd& mean_x, VectorXd& mean_p) {
    const int n = state.sp.dim;
    const VectorXd times = VectorXd::Constant(n_samples, t);
    SignedSample s;
    if (state.frozen_flow) {
        // draw initial points, apply the frozen map
        s.alpha_plus = state.sp.alpha_plus();
        s.alpha_minus = state.sp.alpha_minus();
        auto fill = [&](PushedBatch& b, StreamId init_id, bool minus) {
            auto rng = state.streams.use(init_id);
            b.times = times;
            b.x0 = MatrixXd(n, n_samples);
            b.p0 = MatrixXd(n, n_samples);
            (minus ? state.decomp.sample_minus
                   : state.decomp.sample_plus)(rng, b.x0, b.p0);
            b.x = MatrixXd(n, n_samples);
            b.p = MatrixXd(n, n_samples);
            VectorXd xo(n), po(n);
            for (int j = 0; j < n_samples; ++j) {
                (*state.frozen_flow)(t, b.x0.col(j), b.p0.col(j), xo, po);
                b.x.col(j) = xo;
                b.p.col(j) = po;
            }
        };
        fill(s.plus, StreamId::EvalInitPlus, false);
        if (!state.sp.alpha_frozen && state.decomp.has_minus)
            fill(s.minus, StreamId::EvalInitMinus, true);
    } else {
        s = sample_batch(state.sp, state.decomp, times,
                         state.streams.use(StreamId::EvalInitPlus),
                         state.streams.use(StreamId::EvalInitMinus),
                         state.streams.use(StreamId::EvalNoisePlus),
                         state.streams.use(StreamId::EvalNoiseMinus));
    }
    mean_x = VectorXd::Zero(n);
    mean_p = VectorXd::Zero(n);
    for (int j = 0; j < n_samples; ++j) {
        mean_x += s.alpha_plus * s.plus.x.col(j);
        mean_p += s.alpha_plus * s.plus.p.col(j);
        if (!s.minus.empty()) {
            mean_x -= s.alpha_minus * s.minus.x.col(j);
            mean_p -= s.alpha_minus * s.minus.p.col(j);
        }
    }
    mean_x /= n_samples;
    mean_p /= n_samples;
}

void train_loop(TrainState& state, const ExperimentConfig& cfg,
                const PotentialOracle& v, const EpochCallback& on_epoch) {
    const uint64_t target = static_cast<uint64_t>(cfg.run.epochs);
    double last_heldout = NAN;
    while (state.epoch < target) {
        adversary_phase(state, cfg, v, cfg.run.n_adv);
        const ResidualEstimate est = generator_phase(state, cfg, v);
        state.epoch += 1;

        if (!std::isfinite(est.loss) || est.loss > kDivergenceCap)
            throw NumericError("training diverged at epoch " +
                               std::to_string(state.epoch) + " (loss " +
                               std::to_string(est.loss) + ")");

        EpochInfo info;
        info.epoch = state.epoch;
        info.estimate = est;
        info.alpha = state.sp.alpha();
        // cadence is purely epoch-indexed so that a resumed run consumes
        // exactly the same stream positions as an uninterrupted one
        const bool eval_heldout =
            state.epoch % static_cast<uint64_t>(cfg.heldout_every) == 0;
        if (eval_heldout) {
            last_heldout = heldout_loss(state, cfg, v);
            info.heldout_evaluated = true;
        }
        info.heldout_loss = last_heldout;
        signed_moments(state, cfg.run.horizon,
                       std::min(cfg.run.batch_size, 1024), info.mean_x,
                       info.mean_p);
        if (on_epoch && !on_epoch(state, info))
            break;
    }
}

} // namespace wig
