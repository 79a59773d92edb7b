#include "core/net.hpp"

#include <cmath>

namespace wig {

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

NetGrads NetGrads::zeros_like(const NetworkParams& params) {
    NetGrads g;
    g.w.reserve(params.layers.size());
    g.b.reserve(params.layers.size());
    for (const auto& l : params.layers) {
        g.w.emplace_back(MatrixXd::Zero(l.w.rows(), l.w.cols()));
        g.b.emplace_back(VectorXd::Zero(l.b.size()));
    }
    return g;
}

void NetGrads::add(const NetGrads& other) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] += other.w[i];
        b[i] += other.b[i];
    }
}

NetworkParams make_mlp(int input_dim, int output_dim, int hidden_layers,
                       int hidden_width, Activation hidden_act,
                       RandomStream& rng, bool zero_output_layer) {
    NetworkParams params;
    int prev = input_dim;
    for (int l = 0; l < hidden_layers; ++l) {
        Layer layer;
        layer.w = MatrixXd(hidden_width, prev);
        const double scale = std::sqrt(1.0 / prev);
        for (Eigen::Index j = 0; j < layer.w.cols(); ++j)
            for (Eigen::Index i = 0; i < layer.w.rows(); ++i)
                layer.w(i, j) = rng.uniform(-scale, scale);
        layer.b = VectorXd::Zero(hidden_width);
        layer.act = hidden_act;
        params.layers.push_back(std::move(layer));
        prev = hidden_width;
    }
    Layer out;
    out.w = MatrixXd(output_dim, prev);
    if (zero_output_layer) {
        out.w.setZero();
    } else {
        const double scale = std::sqrt(1.0 / prev);
        for (Eigen::Index j = 0; j < out.w.cols(); ++j)
            for (Eigen::Index i = 0; i < out.w.rows(); ++i)
                out.w(i, j) = rng.uniform(-scale, scale);
    }
    out.b = VectorXd::Zero(output_dim);
    out.act = Activation::Identity;
    params.layers.push_back(std::move(out));
    return params;
}

namespace {

inline void apply_activation(MatrixXd& z, Activation act) {
    if (act == Activation::Tanh)
        z = z.array().tanh().matrix();
}

} // namespace

MatrixXd forward(const NetworkParams& params, const MatrixXd& input,
                 ForwardTrace& trace) {
    if (input.rows() != params.input_dim())
        throw DimensionError("forward: input width mismatch");
    trace.acts.clear();
    trace.acts.reserve(params.layers.size() + 1);
    trace.acts.push_back(input);
    for (const auto& l : params.layers) {
        MatrixXd z = (l.w * trace.acts.back()).colwise() + l.b;
        apply_activation(z, l.act);
        trace.acts.push_back(std::move(z));
    }
    return trace.acts.back();
}

MatrixXd forward(const NetworkParams& params, const MatrixXd& input) {
    if (input.rows() != params.input_dim())
        throw DimensionError("forward: input width mismatch");
    MatrixXd a = input;
    for (const auto& l : params.layers) {
        MatrixXd z = (l.w * a).colwise() + l.b;
        apply_activation(z, l.act);
        a = std::move(z);
    }
    return a;
}

VectorXd forward(const NetworkParams& params, const VectorXd& input) {
    return forward(params, MatrixXd(input)).col(0);
}

NetGrads backward(const NetworkParams& params, const ForwardTrace& trace,
                  const MatrixXd& cotangent) {
    const auto n_layers = params.layers.size();
    if (trace.acts.size() != n_layers + 1)
        throw DimensionError("backward: trace does not match network");
    if (cotangent.rows() != params.output_dim() ||
        cotangent.cols() != trace.acts.front().cols())
        throw DimensionError("backward: cotangent shape mismatch");

    NetGrads grads;
    grads.w.resize(n_layers);
    grads.b.resize(n_layers);

    // delta starts as d/d(output); walking backwards, convert through each
    // layer's activation then its affine map.
    MatrixXd delta = cotangent;
    for (std::size_t li = n_layers; li-- > 0;) {
        const Layer& l = params.layers[li];
        if (l.act == Activation::Tanh) {
            const MatrixXd& a = trace.acts[li + 1];
            delta = delta.cwiseProduct(
                (1.0 - a.array().square()).matrix());
        }
        grads.w[li] = delta * trace.acts[li].transpose();
        grads.b[li] = delta.rowwise().sum();
        if (li > 0)
            delta = l.w.transpose() * delta;
    }
    return grads;
}

VectorXd net_to_flat(const NetworkParams& params) {
    VectorXd flat(params.parameter_count());
    Eigen::Index o = 0;
    for (const auto& l : params.layers) {
        for (Eigen::Index j = 0; j < l.w.cols(); ++j)
            for (Eigen::Index i = 0; i < l.w.rows(); ++i) flat[o++] = l.w(i, j);
        for (Eigen::Index i = 0; i < l.b.size(); ++i) flat[o++] = l.b[i];
    }
    return flat;
}

void flat_to_net(const VectorXd& flat, NetworkParams& params) {
    if (static_cast<std::size_t>(flat.size()) != params.parameter_count())
        throw DimensionError("flat_to_net: size mismatch");
    Eigen::Index o = 0;
    for (auto& l : params.layers) {
        for (Eigen::Index j = 0; j < l.w.cols(); ++j)
            for (Eigen::Index i = 0; i < l.w.rows(); ++i) l.w(i, j) = flat[o++];
        for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] = flat[o++];
    }
}

VectorXd grads_to_flat(const NetGrads& grads) {
    Eigen::Index n = 0;
    for (std::size_t i = 0; i < grads.w.size(); ++i)
        n += grads.w[i].size() + grads.b[i].size();
    VectorXd flat(n);
    Eigen::Index o = 0;
    for (std::size_t li = 0; li < grads.w.size(); ++li) {
        const auto& w = grads.w[li];
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) flat[o++] = w(i, j);
        for (Eigen::Index i = 0; i < grads.b[li].size(); ++i)
            flat[o++] = grads.b[li][i];
    }
    return flat;
}

void adam_step(VectorXd& params, const VectorXd& grads, AdamState& state,
               double lr, StepDirection dir) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw DimensionError("adam_step: shape mismatch");
    state.step += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
    state.v = state.beta2 * state.v.array().matrix() +
              (1.0 - state.beta2) * grads.array().square().matrix();
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const double sign = (dir == StepDirection::Descent) ? -1.0 : 1.0;
    params.array() += sign * lr * (state.m.array() / c1) /
                      ((state.v.array() / c2).sqrt() + state.eps);
}

} // namespace wig
