#ifndef WIGSOLVE_CORE_NET_HPP
#define WIGSOLVE_CORE_NET_HPP

#include <vector>

#include "core/rng.hpp"
#include "core/types.hpp"

namespace wig {

enum class Activation : uint32_t { Identity = 0, Tanh = 1 };

struct Layer {
    MatrixXd w;      // rows = layer width, cols = previous width
    VectorXd b;
    Activation act = Activation::Identity;
};

/// Feed-forward network parameters: affine layers with per-layer activation.
struct NetworkParams {
    std::vector<Layer> layers;

    int input_dim() const {
        return layers.empty() ? 0 : static_cast<int>(layers.front().w.cols());
    }
    int output_dim() const {
        return layers.empty() ? 0 : static_cast<int>(layers.back().w.rows());
    }
    std::size_t parameter_count() const;
};

/// Post-activation values per layer, kept for the backward pass.
/// acts[0] is the input batch; acts[l] the output of layer l-1.
struct ForwardTrace {
    std::vector<MatrixXd> acts;
};

/// Gradient arrays congruent in shape to NetworkParams.
struct NetGrads {
    std::vector<MatrixXd> w;
    std::vector<VectorXd> b;

    static NetGrads zeros_like(const NetworkParams& params);
    void add(const NetGrads& other);
};

/// Hidden layers fan-in-scaled uniform; the output layer starts at zero so
/// the raw map is identically zero at initialization.
NetworkParams make_mlp(int input_dim, int output_dim, int hidden_layers,
                       int hidden_width, Activation hidden_act,
                       RandomStream& rng, bool zero_output_layer = true);

/// Batched forward pass: columns of `input` are samples.
MatrixXd forward(const NetworkParams& params, const MatrixXd& input);
MatrixXd forward(const NetworkParams& params, const MatrixXd& input,
                 ForwardTrace& trace);
VectorXd forward(const NetworkParams& params, const VectorXd& input);

/// Exact reverse-mode gradients of sum_m <cotangent_m, output_m> with
/// respect to every parameter. `cotangent` shape-matches the forward output.
NetGrads backward(const NetworkParams& params, const ForwardTrace& trace,
                  const MatrixXd& cotangent);

// --- flat-vector views (optimizer and finite-difference checks) ------------

VectorXd net_to_flat(const NetworkParams& params);
void flat_to_net(const VectorXd& flat, NetworkParams& params);
VectorXd grads_to_flat(const NetGrads& grads);

// --- adaptive-moment optimizer ---------------------------------------------

enum class StepDirection { Descent, Ascent };

/// Bias-corrected first/second moment accumulators over one flat parameter
/// group. One independent state per group.
struct AdamState {
    VectorXd m;
    VectorXd v;
    int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(Eigen::Index n = 0)
        : m(VectorXd::Zero(n)), v(VectorXd::Zero(n)) {}
};

/// One adaptive-moment update of `params` in the chosen direction.
void adam_step(VectorXd& params, const VectorXd& grads, AdamState& state,
               double lr, StepDirection dir);

} // namespace wig

#endif
