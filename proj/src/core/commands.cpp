#include "core/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "core/checkpoint.hpp"
#include "core/oracle.hpp"
#include "core/trainer.hpp"

namespace wig {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string timestamp_line() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return std::string("# generated: ") + buf + "\n";
}

fs::path ensure_outdir(const ExperimentConfig& cfg) {
    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_csv(const fs::path& p, bool append = false) {
    std::ofstream os(p, append ? std::ios::app : std::ios::trunc);
    if (!os)
        throw IoError("cannot open '" + p.string() + "' for writing");
    return os;
}

// least-squares slope of log(err) against log(h)
double loglog_slope(const std::vector<double>& hs,
                    const std::vector<double>& errs) {
    const int n = static_cast<int>(hs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(hs[i]);
        const double y = std::log(std::max(errs[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct CheckResult {
    std::string name;
    double value;      // measured metric
    double threshold;  // pass iff value <= threshold (or within range below)
    bool pass;
};

} // namespace

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

CommandStatus cmd_verify(const ExperimentConfig& cfg) {
    try {
        validate_experiment(cfg);
        const fs::path out = ensure_outdir(cfg);
        const PhysicalConstants c1{cfg.consts.hbar, cfg.consts.mass, 1};
        RandomStream rng(cfg.run.seed, StreamId::Scratch);
        std::vector<CheckResult> results;
        auto check = [&](const std::string& name, double value,
                         double threshold) {
            results.push_back({name, value, threshold, value <= threshold});
        };
        auto check_range = [&](const std::string& name, double value,
                               double lo, double hi) {
            results.push_back({name, value, hi, value >= lo && value <= hi});
        };

        const auto harmonic = make_potential("harmonic", {{"omega", 1.0}}, 1, 1.0);
        const auto quartic =
            make_potential("quartic", {{"omega", 1.0}, {"lambda", 0.1}}, 1, 1.0);
        const auto dwell =
            make_potential("double_well", {{"a", 0.25}, {"c", 1.0}}, 1, 1.0);
        const auto cosine =
            make_potential("cosine", {{"V0", 1.0}, {"k0", 1.0}}, 1, 1.0);

        // 1. quadratic potentials: shifted difference equals the force term
        {
            double worst = 0.0;
            for (int i = 0; i < 200; ++i) {
                VectorXd x(1), w(1);
                x[0] = rng.uniform(-4, 4);
                w[0] = rng.uniform(-4, 4);
                const double hb = rng.uniform(0.05, 10.0);
                worst = std::max(worst,
                                 std::abs(potential_difference(harmonic, x, w, hb) -
                                          classical_force_term(harmonic, x, w)));
            }
            check("potential-quadratic-exactness", worst, 1e-9);
        }
        // 2. antisymmetry in w_p
        {
            double worst = 0.0;
            for (int i = 0; i < 200; ++i) {
                VectorXd x(1), w(1);
                x[0] = rng.uniform(-3, 3);
                w[0] = rng.uniform(-4, 4);
                worst = std::max(
                    worst, std::abs(potential_difference(quartic, x, w, 1.0) +
                                    potential_difference(quartic, x, -w, 1.0)));
            }
            check("potential-antisymmetry", worst, 0.0);
        }
        // 3. separable fast path vs generic path
        {
            double worst = 0.0;
            const auto q3 = make_potential(
                "quartic", {{"omega", 1.0}, {"lambda", 0.1}}, 3, 1.0);
            for (int i = 0; i < 200; ++i) {
                VectorXd x(3), w(3);
                for (int k = 0; k < 3; ++k) {
                    x[k] = rng.uniform(-3, 3);
                    w[k] = rng.uniform(-3, 3);
                }
                worst = std::max(
                    worst, std::abs(potential_difference(q3, x, w, 1.0) -
                                    potential_difference(q3.as_generic(), x, w,
                                                         1.0)));
            }
            check("potential-separable-fastpath", worst, 1e-12);
        }
        // 4. truncated series terminates for degree <= 4
        {
            double worst = 0.0;
            for (int i = 0; i < 100; ++i) {
                VectorXd x(1), w(1);
                x[0] = rng.uniform(-2, 2);
                w[0] = rng.uniform(-2, 2);
                const double pd = potential_difference(quartic, x, w, 1.0);
                const double m3 = moyal_truncated_term(quartic, x, w, 1.0, 3);
                worst = std::max(worst,
                                 std::abs(pd - m3) / std::max(1.0, std::abs(pd)));
            }
            check("moyal-termination-deg4", worst, 1e-8);
        }
        // 5. cubic: order-3 series is exact
        {
            const auto cubic = PotentialOracle::separable(
                1, [](double x) { return x * x * x; });
            VectorXd x(1), w(1);
            x[0] = 0.0;
            w[0] = 1.0;
            const double pd = potential_difference(cubic, x, w, 2.0);
            const double m3 = moyal_truncated_term(cubic, x, w, 2.0, 3);
            check("moyal-cubic-exact", std::abs(pd - m3), 1e-8);
        }
        // 6. classical limit: O(hbar^2) convergence for the cosine lattice
        {
            std::vector<double> hs = {1e-1, 1e-2, 1e-3}, errs;
            VectorXd x(1), w(1);
            x[0] = 0.7;
            w[0] = 1.3;
            for (double hb : hs)
                errs.push_back(std::abs(potential_difference(cosine, x, w, hb) -
                                        classical_force_term(cosine, x, w)));
            check_range("classical-limit-slope", loglog_slope(hs, errs), 1.9,
                        2.1);
        }
        // 7. null potentials: operator vanishes identically
        {
            GridField grid =
                make_grid(cfg.x_min, cfg.x_max, cfg.grid_n, cfg.p_min,
                          cfg.p_max, cfg.grid_n);
            GridField f = gaussian_wigner(grid, 1.0, 1.0, 1.0, 0.3, -0.2);
            const auto vfree = make_potential("free", {}, 1, 1.0);
            const auto vconst =
                PotentialOracle::separable(1, [](double) { return 2.5; });
            const double worst =
                std::max(theta_apply(vfree, f, 1.0).values.cwiseAbs().maxCoeff(),
                         theta_apply(vconst, f, 1.0).values.cwiseAbs().maxCoeff());
            check("theta-null-potentials", worst, 1e-14);
        }
        // 8. harmonic theta equals the classical force term: 2 x p f
        {
            GridField grid =
                make_grid(cfg.x_min, cfg.x_max, cfg.grid_n, cfg.p_min,
                          cfg.p_max, cfg.grid_n);
            GridField f = gaussian_wigner(grid, 1.0, 1.0, 1.0, 0.0, 0.0);
            GridField th = theta_apply(harmonic, f, 1.0);
            // closed form for this state: Theta f = -dV/dx df/dp = 2 x p f
            double num = 0.0, den = 0.0;
            for (int i = 0; i < f.nx(); ++i)
                for (int j = 0; j < f.np(); ++j) {
                    const double ref = 2.0 * f.xs[i] * f.ps[j] * f.values(i, j);
                    const double d = th.values(i, j) - ref;
                    num += d * d;
                    den += ref * ref;
                }
            check("theta-harmonic-classical", std::sqrt(num / std::max(den, 1e-300)),
                  1e-8);
        }
        // 9. reduction identity, quick sweep at hbar = 1
        {
            GridField grid = make_grid(-10, 10, 256, -10, 10, 256);
            std::vector<std::pair<std::string, const PotentialOracle*>> pots = {
                {"harmonic", &harmonic},
                {"quartic", &quartic},
                {"double_well", &dwell},
                {"cosine", &cosine}};
            std::vector<GridField> states = {
                gaussian_wigner(grid, 1.0, 1.0, 1.0, 0.0, 0.0),
                excited1_wigner(grid, 1.0, 1.0, 1.0)};
            double worst = 0.0;
            for (auto& [name, pv] : pots)
                for (auto& f : states)
                    for (int k = 0; k < 5; ++k) {
                        TestFunction tf;
                        tf.w_x = VectorXd(1);
                        tf.w_p = VectorXd(1);
                        tf.w_x[0] = rng.uniform(-2, 2);
                        tf.w_p[0] = rng.uniform(-2, 2);
                        tf.b = rng.uniform(0, 2 * M_PI);
                        const double lhs =
                            weak_integral_quadrature(*pv, f, tf, 1.0);
                        const double rhs = reduced_integral(*pv, f, tf, 1.0);
                        const double scale =
                            std::max({std::abs(lhs), std::abs(rhs), 1e-6});
                        worst = std::max(worst, std::abs(lhs - rhs) / scale);
                    }
            check("reduction-identity-quick", worst, 1e-6);
        }
        // 10. Wigner transform marginals and normalization
        {
            VectorXd xs = VectorXd::LinSpaced(256, -8.0, 8.0 - 16.0 / 256);
            const auto psi = coherent_state(xs, 1.0, 1.0, 1.0, 0.4, 0.3);
            const VectorXd pg = conjugate_momentum_grid(xs, 1.0);
            GridField f = wigner_transform(psi, 1.0, pg);
            double worst_x = 0.0;
            for (int i = 0; i < f.nx(); ++i) {
                const double marg = f.values.row(i).sum() * f.dp();
                worst_x = std::max(worst_x,
                                   std::abs(marg - std::norm(psi.psi[i])));
            }
            const VectorXd pdens = momentum_density(psi, 1.0, pg);
            double worst_p = 0.0;
            for (int j = 0; j < f.np(); ++j) {
                const double marg = f.values.col(j).sum() * f.dx();
                worst_p = std::max(worst_p, std::abs(marg - pdens[j]));
            }
            check("wigner-marginal-x", worst_x, 1e-8);
            check("wigner-marginal-p", worst_p, 1e-8);
            check("wigner-normalization", std::abs(grid_quadrature(f) - 1.0),
                  1e-8);
        }
        // 11. negative volume of the first excited state, two resolutions
        {
            auto nv = [&](int n) {
                VectorXd xs = VectorXd::LinSpaced(n, -8.0, 8.0 - 16.0 / n);
                const auto psi = excited1_state(xs, 1.0, 1.0, 1.0);
                return negative_volume(
                    wigner_transform(psi, 1.0, conjugate_momentum_grid(xs, 1.0)));
            };
            const double nv1 = nv(256), nv2 = nv(512);
            const double exact = 2.0 * std::exp(-0.5) - 1.0;
            check("negative-volume-grid-agreement", std::abs(nv1 - nv2), 1e-3);
            check("negative-volume-value", std::abs(nv1 - exact), 1e-3);
        }
        // 12. free-packet spreading matches the closed form
        {
            VectorXd xs = VectorXd::LinSpaced(512, -12.0, 12.0 - 24.0 / 512);
            const auto psi0 = coherent_state(xs, 1.0, 1.0, 1.0, 0.0, 0.0);
            const auto vfree = make_potential("free", {}, 1, 1.0);
            const auto psi1 = split_step_evolve(psi0, vfree, 1.0, 1.0, 1e-3, 1000);
            const VectorXd w = [&] {
                VectorXd ww = VectorXd::Constant(512, psi1.dx());
                ww[0] *= 0.5;
                ww[511] *= 0.5;
                return ww;
            }();
            double m1 = 0, m2 = 0;
            for (int i = 0; i < 512; ++i) {
                const double d = std::norm(psi1.psi[i]) * w[i];
                m1 += d * xs[i];
                m2 += d * xs[i] * xs[i];
            }
            const double sigma02 = 0.5;  // hbar/(2 m omega)
            const double expect = sigma02 + std::pow(1.0 * 1.0 / (2 * 1.0 * std::sqrt(sigma02)), 2);
            check("splitstep-free-spreading", std::abs((m2 - m1 * m1) - expect),
                  1e-8);
        }
        // 13. harmonic evolution returns the coherent center after a period
        {
            VectorXd xs = VectorXd::LinSpaced(256, -8.0, 8.0 - 16.0 / 256);
            const auto psi0 = coherent_state(xs, 1.0, 1.0, 1.0, 1.0, 0.0);
            const int steps = 1 << 16;
            const double dt = 2.0 * M_PI / steps;
            const auto psi1 = split_step_evolve(psi0, harmonic, 1.0, 1.0, dt, steps);
            double mean_x = 0.0;
            for (int i = 0; i < 256; ++i)
                mean_x += std::norm(psi1.psi[i]) * xs[i] * psi1.dx();
            check("splitstep-harmonic-period", std::abs(mean_x - 1.0), 1e-8);
        }
        // 14. network gradients match finite differences
        {
            double worst = 0.0;
            for (int layers = 1; layers <= 3; ++layers)
                for (int rep = 0; rep < 2; ++rep) {
                    auto net = make_mlp(3, 2, layers - 1, 6,
                                        rep ? Activation::Tanh
                                            : Activation::Identity,
                                        rng, false);
                    MatrixXd in(3, 4), cot(2, 4);
                    for (int i = 0; i < 12; ++i) in(i % 3, i / 3) = rng.uniform(-1, 1);
                    for (int i = 0; i < 8; ++i) cot(i % 2, i / 2) = rng.uniform(-1, 1);
                    ForwardTrace tr;
                    forward(net, in, tr);
                    const VectorXd g = grads_to_flat(backward(net, tr, cot));
                    VectorXd theta = net_to_flat(net);
                    const double eps = 1e-5;
                    for (Eigen::Index i = 0; i < theta.size(); ++i) {
                        VectorXd tp = theta, tm = theta;
                        tp[i] += eps;
                        tm[i] -= eps;
                        flat_to_net(tp, net);
                        const double lp = (cot.array() * forward(net, in).array()).sum();
                        flat_to_net(tm, net);
                        const double lm = (cot.array() * forward(net, in).array()).sum();
                        flat_to_net(theta, net);
                        const double fd = (lp - lm) / (2 * eps);
                        worst = std::max(worst, std::abs(fd - g[i]) /
                                                    std::max(1.0, std::abs(fd)));
                    }
                }
            check("net-gradient-fd", worst, 1e-5);
        }
        // 15. pushforward identity at t = 0, bit-exact
        {
            StreamTable st(cfg.run.seed);
            auto sp = make_pushforward(2, 4, 2, 8, 0.0, true, st);
            VectorXd flat = net_to_flat(sp.net_plus);
            for (Eigen::Index i = 0; i < flat.size(); ++i)
                flat[i] = rng.uniform(-1, 1);
            flat_to_net(flat, sp.net_plus);
            double worst = 0.0;
            for (int i = 0; i < 1000; ++i) {
                VectorXd x(2), p(2), z(4);
                for (int k = 0; k < 2; ++k) {
                    x[k] = rng.uniform(-3, 3);
                    p[k] = rng.uniform(-3, 3);
                }
                for (int k = 0; k < 4; ++k) z[k] = rng.normal();
                const PhasePoint init(x, p);
                const PhasePoint out = push(sp, Branch::Plus, 0.0, init, z);
                worst = std::max(worst, (out.x() - x).cwiseAbs().maxCoeff());
                worst = std::max(worst, (out.p() - p).cwiseAbs().maxCoeff());
            }
            check("push-identity-t0", worst, 0.0);
        }
        // 16. signed normalization for every alpha_raw
        {
            StreamTable st(cfg.run.seed + 1);
            auto sp = make_pushforward(1, 2, 1, 4, 0.2, false, st);
            const auto decomp = make_decomposition("harmonic-excited-1",
                                                   {{"omega", 1.0}}, c1);
            double worst = 0.0;
            for (double raw : {-30.0, -1.0, 0.0, 2.0, 35.0}) {
                sp.alpha_raw = raw;
                const VectorXd times = VectorXd::Constant(64, 0.5);
                auto s = sample_batch(sp, decomp, times,
                                      st.use(StreamId::InitPlus),
                                      st.use(StreamId::InitMinus),
                                      st.use(StreamId::NoisePlus),
                                      st.use(StreamId::NoiseMinus));
                const double one = signed_expectation(
                    s, [](double, const VectorXd&, const VectorXd&) {
                        return 1.0;
                    });
                worst = std::max(worst, std::abs(one - 1.0));
            }
            check("signed-normalization", worst, 1e-12);
        }
        // 17. static residual vanishes exactly
        {
            StreamTable st(cfg.run.seed + 2);
            auto sp = make_pushforward(1, 2, 2, 8, 0.0, true, st);
            const auto decomp = make_decomposition(
                "gaussian-coherent", {{"x0", 0.5}, {"omega", 1.0}}, c1);
            TestFunctionSet tfs;
            TestFunction tf;
            tf.w_x = VectorXd::Zero(1);
            tf.w_p = VectorXd::Zero(1);
            tf.b = 0.7;
            tfs.members.push_back(tf);
            RunConfig rc;
            rc.horizon = 1.0;
            rc.batch_size = 64;
            rc.num_test = 1;
            const auto vfree = make_potential("free", {}, 1, 1.0);
            const auto est = estimate_residual(sp, decomp, tfs, vfree, c1, rc, st);
            check("residual-static-zero", std::abs(est.per_test[0]), 0.0);
        }
        // 18. checkpoint round trip is bit-exact
        {
            ExperimentConfig tiny = cfg;
            tiny.consts.dim = 1;
            tiny.run.batch_size = 8;
            tiny.run.num_test = 2;
            tiny.hidden_layers = 1;
            tiny.hidden_width = 4;
            tiny.initial_name = "gaussian-coherent";
            tiny.initial_params = {{"x0", 1.0}, {"omega", 1.0}};
            tiny.potential_name = "harmonic";
            tiny.potential_params = {{"omega", 1.0}};
            tiny.freeze_alpha = true;
            TrainState ts = make_train_state(tiny);
            const fs::path p = out / "verify_ck.bin";
            save_checkpoint(p.string(), to_checkpoint(ts, tiny));
            const Checkpoint ck = load_checkpoint(p.string());
            const double diff =
                (net_to_flat(ck.sp.net_plus) - net_to_flat(ts.sp.net_plus))
                    .cwiseAbs()
                    .maxCoeff();
            fs::remove(p);
            check("checkpoint-roundtrip", diff, 0.0);
        }

        auto report = open_csv(out / "verify_report.csv");
        report << "check,value,threshold,status\n";
        bool all_pass = true;
        std::string first_fail;
        for (const auto& r : results) {
            report << r.name << "," << fmt17(r.value) << ","
                   << fmt17(r.threshold) << "," << (r.pass ? "pass" : "fail")
                   << "\n";
            if (!r.pass && all_pass) {
                all_pass = false;
                first_fail = r.name;
            }
        }
        std::cout << "verify: " << results.size() << " checks, "
                  << (all_pass ? "all passed" : "FAILED at " + first_fail)
                  << "\n";
        if (!all_pass) {
            std::cerr << "verification failed: " << first_fail << "\n";
            return CommandStatus::VerifyFailed;
        }
        return CommandStatus::Ok;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::BadConfig;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::Error;
    }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

CommandStatus cmd_train(const ExperimentConfig& cfg,
                        const std::function<bool()>& interrupted) {
    try {
        validate_experiment(cfg);
        const fs::path out = ensure_outdir(cfg);
        const fs::path ck_path = out / "checkpoint.bin";
        const auto v = make_potential(cfg.potential_name, cfg.potential_params,
                                      cfg.consts.dim, cfg.consts.mass);

        TrainState state;
        bool resumed = false;
        if (cfg.resume && fs::exists(ck_path)) {
            state = state_from_checkpoint(load_checkpoint(ck_path.string()), cfg);
            resumed = true;
        } else {
            state = make_train_state(cfg);
        }

        auto metrics = open_csv(out / "metrics.csv", resumed);
        if (!resumed) {
            metrics << timestamp_line();
            metrics << "epoch,loss,heldout_loss,alpha";
            for (int i = 0; i < cfg.consts.dim; ++i) metrics << ",mean_x" << i;
            for (int i = 0; i < cfg.consts.dim; ++i) metrics << ",mean_p" << i;
            metrics << ",wallclock_s\n";
        }

        const auto t0 = std::chrono::steady_clock::now();
        const auto on_epoch = [&](const TrainState& st, const EpochInfo& info) {
            metrics << info.epoch << "," << fmt17(info.estimate.loss) << ","
                    << fmt17(info.heldout_loss) << "," << fmt17(info.alpha);
            for (int i = 0; i < cfg.consts.dim; ++i)
                metrics << "," << fmt17(info.mean_x[i]);
            for (int i = 0; i < cfg.consts.dim; ++i)
                metrics << "," << fmt17(info.mean_p[i]);
            double wall = 0.0;
            if (cfg.metrics_wallclock)
                wall = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
            metrics << "," << fmt17(wall) << "\n";
            metrics.flush();

            if (info.heldout_evaluated)
                std::cout << "epoch " << info.epoch << "  loss "
                          << info.estimate.loss << "  heldout "
                          << info.heldout_loss << "  alpha " << info.alpha
                          << "\n";
            if (info.epoch % static_cast<uint64_t>(cfg.checkpoint_every) == 0)
                save_checkpoint(ck_path.string(), to_checkpoint(st, cfg));
            return !(interrupted && interrupted());
        };

        train_loop(state, cfg, v, on_epoch);
        save_checkpoint(ck_path.string(), to_checkpoint(state, cfg));
        std::cout << "training stopped at epoch " << state.epoch
                  << "; checkpoint at " << ck_path.string() << "\n";
        return CommandStatus::Ok;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::BadConfig;
    } catch (const NumericError& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::Diverged;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::Error;
    }
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

CommandStatus cmd_evaluate(const ExperimentConfig& cfg,
                           const std::string& checkpoint_path,
                           const std::vector<double>& times, int n_samples) {
    try {
        if (n_samples < 1)
            throw ConfigError("n_samples", "must be >= 1");
        const fs::path out = ensure_outdir(cfg);
        const Checkpoint ck = load_checkpoint(checkpoint_path);
        for (double t : times)
            if (t < 0.0 || t > ck.horizon)
                throw ConfigError("times",
                                  "time " + std::to_string(t) +
                                      " outside [0, T] with T = " +
                                      std::to_string(ck.horizon));
        const auto decomp =
            make_decomposition(ck.decomp_name, ck.decomp_params, ck.consts);
        const int n = ck.sp.dim;
        StreamTable streams(cfg.run.seed);

        auto samples_csv = open_csv(out / "samples.csv");
        samples_csv << "t,branch,weight";
        for (int i = 0; i < n; ++i) samples_csv << ",x" << i;
        for (int i = 0; i < n; ++i) samples_csv << ",p" << i;
        samples_csv << "\n";

        auto hist_csv = open_csv(out / "marginals.csv");
        hist_csv << "t,axis,bin_center,density,stderr,flagged\n";
        auto neg_csv = open_csv(out / "negativity.csv");
        neg_csv << "t,axis,bins,flagged,fraction\n";
        auto mom_csv = open_csv(out / "moments.csv");
        mom_csv << "t";
        for (int i = 0; i < n; ++i) mom_csv << ",mean_x" << i;
        for (int i = 0; i < n; ++i) mom_csv << ",mean_p" << i;
        for (int i = 0; i < 2 * n; ++i)
            for (int j = i; j < 2 * n; ++j) mom_csv << ",cov_" << i << "_" << j;
        mom_csv << "\n";

        const int bins = cfg.hist_bins;
        const double range = cfg.hist_range;
        const double h = 2.0 * range / bins;
        uint64_t total_flagged = 0;

        for (double t : times) {
            const VectorXd tvec = VectorXd::Constant(n_samples, t);
            const SignedSample s = sample_batch(
                ck.sp, decomp, tvec, streams.use(StreamId::EvalInitPlus),
                streams.use(StreamId::EvalInitMinus),
                streams.use(StreamId::EvalNoisePlus),
                streams.use(StreamId::EvalNoiseMinus));

            auto dump = [&](const PushedBatch& b, int branch, double weight) {
                for (int m = 0; m < b.size(); ++m) {
                    samples_csv << fmt17(t) << "," << branch << ","
                                << fmt17(weight);
                    for (int i = 0; i < n; ++i)
                        samples_csv << "," << fmt17(b.x(i, m));
                    for (int i = 0; i < n; ++i)
                        samples_csv << "," << fmt17(b.p(i, m));
                    samples_csv << "\n";
                }
            };
            dump(s.plus, +1, s.alpha_plus);
            if (!s.minus.empty()) dump(s.minus, -1, -s.alpha_minus);

            // signed histogram per axis with per-bin standard errors
            // per-sample signed bin values y_m = a+ 1{plus in bin}/h
            //                                     - a- 1{minus in bin}/h
            auto marginal = [&](const std::string& axis, int coord, bool is_x) {
                VectorXd sum = VectorXd::Zero(bins);
                VectorXd sumsq = VectorXd::Zero(bins);
                auto bin_of = [&](const PushedBatch& b, int m) {
                    const double val = is_x ? b.x(coord, m) : b.p(coord, m);
                    const int bi =
                        static_cast<int>(std::floor((val + range) / h));
                    return (bi < 0 || bi >= bins) ? -1 : bi;
                };
                for (int m = 0; m < n_samples; ++m) {
                    const int bp = bin_of(s.plus, m);
                    const int bm = s.minus.empty() ? -1 : bin_of(s.minus, m);
                    if (bp >= 0) {
                        const double y = s.alpha_plus / h -
                                         (bm == bp ? s.alpha_minus / h : 0.0);
                        sum[bp] += y;
                        sumsq[bp] += y * y;
                    }
                    if (bm >= 0 && bm != bp) {
                        const double y = -s.alpha_minus / h;
                        sum[bm] += y;
                        sumsq[bm] += y * y;
                    }
                }
                int flagged = 0;
                for (int bi = 0; bi < bins; ++bi) {
                    const double mean = sum[bi] / n_samples;
                    const double se =
                        n_samples > 1
                            ? std::sqrt(std::max(
                                  (sumsq[bi] - sum[bi] * sum[bi] / n_samples) /
                                      (n_samples - 1.0) / n_samples,
                                  0.0))
                            : 0.0;
                    const bool flag = se > 0.0 && mean < -3.0 * se;
                    if (flag) ++flagged;
                    hist_csv << fmt17(t) << "," << axis << ","
                             << fmt17(-range + (bi + 0.5) * h) << ","
                             << fmt17(mean) << "," << fmt17(se) << ","
                             << (flag ? 1 : 0) << "\n";
                }
                neg_csv << fmt17(t) << "," << axis << "," << bins << ","
                        << flagged << ","
                        << fmt17(static_cast<double>(flagged) / bins) << "\n";
                total_flagged += flagged;
            };
            for (int i = 0; i < n; ++i) marginal("x" + std::to_string(i), i, true);
            for (int i = 0; i < n; ++i) marginal("p" + std::to_string(i), i, false);

            // signed moments
            VectorXd mu = VectorXd::Zero(2 * n);
            MatrixXd second = MatrixXd::Zero(2 * n, 2 * n);
            auto accumulate = [&](const PushedBatch& b, double wgt) {
                VectorXd zvec(2 * n);
                for (int m = 0; m < b.size(); ++m) {
                    zvec.head(n) = b.x.col(m);
                    zvec.tail(n) = b.p.col(m);
                    mu += wgt * zvec;
                    second += wgt * zvec * zvec.transpose();
                }
            };
            accumulate(s.plus, s.alpha_plus);
            if (!s.minus.empty()) accumulate(s.minus, -s.alpha_minus);
            mu /= n_samples;
            second /= n_samples;
            const MatrixXd cov = second - mu * mu.transpose();
            mom_csv << fmt17(t);
            for (int i = 0; i < 2 * n; ++i) mom_csv << "," << fmt17(mu[i]);
            for (int i = 0; i < 2 * n; ++i)
                for (int j = i; j < 2 * n; ++j)
                    mom_csv << "," << fmt17(cov(i, j));
            mom_csv << "\n";
        }
        std::cout << "evaluate: " << times.size() << " times, " << n_samples
                  << " samples each, " << total_flagged
                  << " marginal bins below -3 standard errors\n";
        return CommandStatus::Ok;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::BadConfig;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::BadConfig;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::Error;
    }
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

namespace {

CommandStatus oracle_equivalence_sweep(const ExperimentConfig& cfg,
                                       const fs::path& out) {
    RandomStream rng(cfg.run.seed, StreamId::Scratch);
    // 20 test functions shared across the sweep, |w| <= 2
    std::vector<TestFunction> tfs;
    for (int k = 0; k < 20; ++k) {
        TestFunction tf;
        tf.w_x = VectorXd(1);
        tf.w_p = VectorXd(1);
        tf.w_x[0] = rng.uniform(-2, 2);
        tf.w_p[0] = rng.uniform(-2, 2);
        tf.b = rng.uniform(0, 2 * M_PI);
        tfs.push_back(tf);
    }
    const double mass = cfg.consts.mass;
    std::vector<std::pair<std::string, PotentialOracle>> pots = {
        {"harmonic", make_potential("harmonic", {{"omega", 1.0}}, 1, mass)},
        {"quartic", make_potential("quartic", {{"omega", 1.0}, {"lambda", 0.1}},
                                   1, mass)},
        {"double_well",
         make_potential("double_well", {{"a", 0.25}, {"c", 1.0}}, 1, mass)},
        {"cosine", make_potential("cosine", {{"V0", 1.0}, {"k0", 1.0}}, 1, mass)}};
    const std::vector<double> hbars = {0.25, 1.0, 4.0};

    auto csv = open_csv(out / "equivalence.csv");
    csv << "potential,hbar,state,tf,lhs,rhs,abs_err,rel_err\n";
    double worst = 0.0;
    for (const auto& [name, v] : pots)
        for (double hb : hbars) {
            GridField grid = make_grid(cfg.x_min, cfg.x_max, cfg.grid_n,
                                       cfg.p_min, cfg.p_max, cfg.grid_n);
            const std::vector<std::pair<std::string, GridField>> states = {
                {"gaussian", gaussian_wigner(grid, hb, mass, 1.0, 0.0, 0.0)},
                {"excited1", excited1_wigner(grid, hb, mass, 1.0)}};
            for (const auto& [sname, f] : states) {
                const GridField th = theta_apply(v, f, hb);
                const VectorXd wx = [&] {
                    VectorXd w = VectorXd::Constant(f.nx(), f.dx());
                    w[0] *= 0.5;
                    w[f.nx() - 1] *= 0.5;
                    return w;
                }();
                const VectorXd wp = [&] {
                    VectorXd w = VectorXd::Constant(f.np(), f.dp());
                    w[0] *= 0.5;
                    w[f.np() - 1] *= 0.5;
                    return w;
                }();
                for (std::size_t k = 0; k < tfs.size(); ++k) {
                    const TestFunction& tf = tfs[k];
                    double lhs = 0.0;
                    for (int i = 0; i < f.nx(); ++i)
                        for (int j = 0; j < f.np(); ++j)
                            lhs += wx[i] * wp[j] * th.values(i, j) *
                                   std::sin(tf.w_x[0] * f.xs[i] +
                                            tf.w_p[0] * f.ps[j] + tf.b);
                    const double rhs = reduced_integral(v, f, tf, hb);
                    const double abs_err = std::abs(lhs - rhs);
                    const double rel =
                        abs_err / std::max({std::abs(lhs), std::abs(rhs), 1e-12});
                    const double err_metric =
                        abs_err <= 1e-12 ? 0.0 : rel;  // absolute floor
                    worst = std::max(worst, err_metric);
                    csv << name << "," << fmt17(hb) << "," << sname << "," << k
                        << "," << fmt17(lhs) << "," << fmt17(rhs) << ","
                        << fmt17(abs_err) << "," << fmt17(rel) << "\n";
                }
            }
        }
    std::cout << "equivalence-sweep: worst relative error " << worst << "\n";
    return worst <= 1e-6 ? CommandStatus::Ok : CommandStatus::VerifyFailed;
}

CommandStatus oracle_evolve(const ExperimentConfig& cfg, const fs::path& out,
                            const std::string& name) {
    const double mass = cfg.consts.mass;
    const double hbar = cfg.consts.hbar;
    auto params = cfg.potential_name == name ? cfg.potential_params
                                             : std::map<std::string, double>{};
    const auto v = make_potential(name, params, 1, mass);
    auto get = [&](const char* key, double dflt) {
        auto it = cfg.initial_params.find(key);
        return it == cfg.initial_params.end() ? dflt : it->second;
    };
    const double omega = get("omega", 1.0);
    const double x0 = get("x0", 1.0), p0 = get("p0", 0.0);

    VectorXd xs = VectorXd::LinSpaced(
        cfg.grid_n, cfg.x_min, cfg.x_max - (cfg.x_max - cfg.x_min) / cfg.grid_n);
    const auto psi0 = coherent_state(xs, hbar, mass, omega, x0, p0);
    const double horizon =
        name == "harmonic" ? 2.0 * M_PI / omega : cfg.run.horizon;
    const int steps = 1 << 15;
    const double dt = horizon / steps;
    const auto psi1 = split_step_evolve(psi0, v, hbar, mass, dt, steps);

    const VectorXd pg = conjugate_momentum_grid(xs, hbar);
    const GridField f0 = wigner_transform(psi0, hbar, pg);
    const GridField f1 = wigner_transform(psi1, hbar, pg);
    save_grid((out / "wigner_initial.bin").string(), f0);
    save_grid((out / "wigner_final.bin").string(), f1);
    export_grid_csv((out / "wigner_initial.csv").string(), f0);
    export_grid_csv((out / "wigner_final.csv").string(), f1);

    double num = 0.0, den = 0.0;
    for (int i = 0; i < f0.nx(); ++i)
        for (int j = 0; j < f0.np(); ++j) {
            const double d = f1.values(i, j) - f0.values(i, j);
            num += d * d;
            den += f0.values(i, j) * f0.values(i, j);
        }
    const double l2 = std::sqrt(num / std::max(den, 1e-300));
    auto csv = open_csv(out / "evolve_summary.csv");
    csv << "potential,horizon,steps,l2_distance,norm_drift\n";
    csv << name << "," << fmt17(horizon) << "," << steps << "," << fmt17(l2)
        << "," << fmt17(std::abs(psi1.norm() - 1.0)) << "\n";
    std::cout << "evolve " << name << ": relative L2(final - initial) = " << l2
              << "\n";
    return CommandStatus::Ok;
}

CommandStatus oracle_wigner(const ExperimentConfig& cfg, const fs::path& out,
                            const std::string& state) {
    const double mass = cfg.consts.mass;
    const double hbar = cfg.consts.hbar;
    auto get = [&](const char* key, double dflt) {
        auto it = cfg.initial_params.find(key);
        return it == cfg.initial_params.end() ? dflt : it->second;
    };
    VectorXd xs = VectorXd::LinSpaced(
        cfg.grid_n, cfg.x_min, cfg.x_max - (cfg.x_max - cfg.x_min) / cfg.grid_n);
    WaveFunctionGrid psi;
    if (state == "coherent")
        psi = coherent_state(xs, hbar, mass, get("omega", 1.0), get("x0", 0.0),
                             get("p0", 0.0));
    else if (state == "excited1")
        psi = excited1_state(xs, hbar, mass, get("omega", 1.0));
    else
        throw ConfigError("oracle", "unknown state '" + state + "'");

    const VectorXd pg = conjugate_momentum_grid(xs, hbar);
    const GridField f = wigner_transform(psi, hbar, pg);
    save_grid((out / ("wigner_" + state + ".bin")).string(), f);
    export_grid_csv((out / ("wigner_" + state + ".csv")).string(), f);

    double worst_x = 0.0;
    for (int i = 0; i < f.nx(); ++i)
        worst_x = std::max(worst_x, std::abs(f.values.row(i).sum() * f.dp() -
                                             std::norm(psi.psi[i])));
    const VectorXd pdens = momentum_density(psi, hbar, pg);
    double worst_p = 0.0;
    for (int j = 0; j < f.np(); ++j)
        worst_p = std::max(worst_p, std::abs(f.values.col(j).sum() * f.dx() -
                                             pdens[j]));
    auto csv = open_csv(out / "wigner_state_report.csv");
    csv << "state,normalization,marginal_x_err,marginal_p_err,negative_volume\n";
    csv << state << "," << fmt17(grid_quadrature(f)) << "," << fmt17(worst_x)
        << "," << fmt17(worst_p) << "," << fmt17(negative_volume(f)) << "\n";
    std::cout << "wigner " << state << ": negative volume "
              << negative_volume(f) << "\n";
    return CommandStatus::Ok;
}

} // namespace

CommandStatus cmd_oracle(const ExperimentConfig& cfg,
                         const std::string& subcommand) {
    try {
        validate_experiment(cfg);
        if (cfg.consts.dim != 1)
            throw ConfigError("dim", "oracle workflows are one-dimensional");
        const fs::path out = ensure_outdir(cfg);
        if (subcommand == "equivalence-sweep")
            return oracle_equivalence_sweep(cfg, out);
        if (subcommand.rfind("evolve ", 0) == 0)
            return oracle_evolve(cfg, out, subcommand.substr(7));
        if (subcommand.rfind("wigner ", 0) == 0)
            return oracle_wigner(cfg, out, subcommand.substr(7));
        throw ConfigError("oracle",
                          "unknown subcommand '" + subcommand +
                              "' (expected equivalence-sweep, evolve <potential> "
                              "or wigner <state>)");
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::BadConfig;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return CommandStatus::Error;
    }
}

} // namespace wig
