#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gntk/graph.hpp"

namespace gntk {

enum class Activation { relu, tanh, linear };

double activate(Activation a, double x);
double activate_grad(Activation a, double x);  // ReLU derivative at 0 is 0

/// Per-layer, per-tap convolution weights H_{l,k} of shape F_{l-1} x F_l.
/// The last layer is always linear.
struct GnnWeights {
    std::vector<std::vector<Matrix>> taps;  // taps[l][k], l = 0..L-1
    Activation activation = Activation::tanh;

    int layers() const { return static_cast<int>(taps.size()); }
    int tap_count() const { return taps.empty() ? 0 : static_cast<int>(taps[0].size()); }
    int tap_count(int l) const { return static_cast<int>(taps[l].size()); }
    std::vector<int> widths() const;  // F_0 .. F_L
    bool single_feature() const;

    Activation layer_activation(int l) const {
        return l == layers() - 1 ? Activation::linear : activation;
    }

    void validate() const;
    int parameter_count() const;

    /// Gaussian init with std 1/sqrt(K_l * F_{l-1}) per tap matrix.
    static GnnWeights random(const std::vector<int>& widths, int K, Activation act,
                             std::uint64_t seed);
    /// Same, with a tap count per layer.
    static GnnWeights random_per_layer(const std::vector<int>& widths,
                                       const std::vector<int>& tap_counts, Activation act,
                                       std::uint64_t seed);
    /// Perceptron architecture: one width-F hidden layer with K taps followed
    /// by a single-tap linear readout.
    static GnnWeights random_perceptron(int F, int K, Activation act, std::uint64_t seed);
    /// All-scalar chain: widths 1,...,1 with L layers, K taps each.
    static GnnWeights random_single_feature(int L, int K, Activation act, std::uint64_t seed);
    static GnnWeights zeros_like(const GnnWeights& w);
};

struct TrainConfig {
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double weight_decay = 5e-3;
    enum class Optimizer { adam, sgd } optimizer = Optimizer::adam;
    std::uint64_t seed = 0;

    void validate() const;
};

/// y = sum_k A^k x H_k, computed by iterated products (A^k never formed).
GraphSignal graph_convolution(const Graph& g, const GraphSignal& x,
                              const std::vector<Matrix>& taps);

/// Per-layer preactivations U_l and activations X_l (act[0] is the input).
struct ForwardTrace {
    std::vector<Matrix> pre;
    std::vector<Matrix> act;
};

GraphSignal gnn_forward(const Graph& g, const GraphSignal& x, const GnnWeights& w,
                        ForwardTrace* trace = nullptr);

/// Exact gradients of <upstream, f(x)> w.r.t. every H_{l,k}.
GnnWeights gnn_backprop(const Graph& g, const GraphSignal& x, const GnnWeights& w,
                        const GraphSignal& upstream);

using Dataset = std::vector<std::pair<GraphSignal, GraphSignal>>;

struct TrainResult {
    GnnWeights weights;
    std::vector<double> loss_history;  // per-epoch training MSE
};

TrainResult gnn_train(const Graph& g, const Dataset& data, const GnnWeights& w0,
                      const TrainConfig& cfg);

/// |H| x n Jacobian of the scalar-output GNN, one column per node.
Matrix gnn_jacobian(const Graph& g, const GnnWeights& w, const GraphSignal& x);

/// J(x)^T J(x2) for scalar output width (F_L = 1).
Matrix empirical_ntk(const Graph& g, const GnnWeights& w, const GraphSignal& x,
                     const GraphSignal& x2);

/// p-th eigenvector of adj (descending eigenvalue order, 1-based), sign fixed
/// so the first entry with |v_i| > 1e-12 is positive.
Vector adjacency_eigenvector(const Graph& g, int which);

/// v_p^T x for each signal (signals must be single-feature).
std::vector<double> eig_projection(const Graph& g, const std::vector<GraphSignal>& signals,
                                   int which);

}  // namespace gntk
