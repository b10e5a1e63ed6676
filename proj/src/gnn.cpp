#include "gntk/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace gntk {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::tanh: return std::tanh(x);
        case Activation::linear: return x;
    }
    return x;
}

double activate_grad(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::linear: return 1.0;
    }
    return 1.0;
}

namespace {

Matrix apply_activation(Activation a, const Matrix& u) {
    if (a == Activation::linear) return u;
    return u.unaryExpr([a](double v) { return activate(a, v); });
}

Matrix activation_grad_matrix(Activation a, const Matrix& u) {
    return u.unaryExpr([a](double v) { return activate_grad(a, v); });
}

}  // namespace

std::vector<int> GnnWeights::widths() const {
    std::vector<int> w;
    if (taps.empty()) return w;
    w.push_back(static_cast<int>(taps[0][0].rows()));
    for (const auto& layer : taps) w.push_back(static_cast<int>(layer[0].cols()));
    return w;
}

bool GnnWeights::single_feature() const {
    for (const auto& layer : taps)
        for (const auto& h : layer)
            if (h.rows() != 1 || h.cols() != 1) return false;
    return true;
}

void GnnWeights::validate() const {
    if (taps.empty()) throw std::invalid_argument("GnnWeights: no layers");
    int prev = static_cast<int>(taps[0][0].rows());
    for (std::size_t l = 0; l < taps.size(); ++l) {
        if (taps[l].empty())
            throw std::invalid_argument("GnnWeights: layer without taps at layer " +
                                        std::to_string(l + 1));
        for (const auto& h : taps[l]) {
            if (h.rows() != prev || h.cols() != taps[l][0].cols())
                throw std::invalid_argument("GnnWeights: tap shapes do not chain at layer " +
                                            std::to_string(l + 1));
            if (!h.allFinite())
                throw std::invalid_argument("GnnWeights: non-finite weight at layer " +
                                            std::to_string(l + 1));
        }
        prev = static_cast<int>(taps[l][0].cols());
    }
}

int GnnWeights::parameter_count() const {
    int count = 0;
    for (const auto& layer : taps)
        for (const auto& h : layer) count += static_cast<int>(h.size());
    return count;
}

GnnWeights GnnWeights::random(const std::vector<int>& widths, int K, Activation act,
                              std::uint64_t seed) {
    if (widths.size() < 2) throw std::invalid_argument("GnnWeights::random: need at least 2 widths");
    return random_per_layer(widths, std::vector<int>(widths.size() - 1, K), act, seed);
}

GnnWeights GnnWeights::random_per_layer(const std::vector<int>& widths,
                                        const std::vector<int>& tap_counts, Activation act,
                                        std::uint64_t seed) {
    if (widths.size() < 2 || tap_counts.size() != widths.size() - 1)
        throw std::invalid_argument("GnnWeights::random_per_layer: width/tap shape mismatch");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    GnnWeights w;
    w.activation = act;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int K = tap_counts[l];
        if (K < 1) throw std::invalid_argument("GnnWeights::random_per_layer: K must be >= 1");
        const double sd = 1.0 / std::sqrt(static_cast<double>(K) * widths[l]);
        std::vector<Matrix> layer;
        for (int k = 0; k < K; ++k) {
            Matrix h(widths[l], widths[l + 1]);
            for (int i = 0; i < h.rows(); ++i)
                for (int j = 0; j < h.cols(); ++j) h(i, j) = sd * gauss(rng);
            layer.push_back(std::move(h));
        }
        w.taps.push_back(std::move(layer));
    }
    return w;
}

GnnWeights GnnWeights::random_perceptron(int F, int K, Activation act, std::uint64_t seed) {
    return random_per_layer({1, F, 1}, {K, 1}, act, seed);
}

GnnWeights GnnWeights::random_single_feature(int L, int K, Activation act, std::uint64_t seed) {
    return random(std::vector<int>(L + 1, 1), K, act, seed);
}

GnnWeights GnnWeights::zeros_like(const GnnWeights& w) {
    GnnWeights z = w;
    for (auto& layer : z.taps)
        for (auto& h : layer) h.setZero();
    return z;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (learning_rate < 0.0) throw std::invalid_argument("TrainConfig: negative learning rate");
    if (weight_decay < 0.0) throw std::invalid_argument("TrainConfig: negative weight decay");
}

GraphSignal graph_convolution(const Graph& g, const GraphSignal& x,
                              const std::vector<Matrix>& taps) {
    if (taps.empty()) throw std::invalid_argument("graph_convolution: no taps");
    if (x.n() != g.n) throw std::invalid_argument("graph_convolution: signal size mismatch");
    if (!x.values.allFinite()) throw std::invalid_argument("graph_convolution: non-finite input");
    for (const auto& h : taps)
        if (h.rows() != x.features())
            throw std::invalid_argument("graph_convolution: tap shape does not match features");
    Matrix power = x.values;  // A^k x, built iteratively
    Matrix y = power * taps[0];
    for (std::size_t k = 1; k < taps.size(); ++k) {
        power = g.adj * power;
        y.noalias() += power * taps[k];
    }
    return GraphSignal(std::move(y));
}

GraphSignal gnn_forward(const Graph& g, const GraphSignal& x, const GnnWeights& w,
                        ForwardTrace* trace) {
    w.validate();
    if (x.features() != w.widths().front())
        throw std::invalid_argument("gnn_forward: input width does not match F_0");
    if (trace) {
        trace->pre.clear();
        trace->act.clear();
        trace->act.push_back(x.values);
    }
    GraphSignal cur = x;
    for (int l = 0; l < w.layers(); ++l) {
        GraphSignal u = graph_convolution(g, cur, w.taps[l]);
        if (!u.values.allFinite())
            throw std::runtime_error("gnn_forward: non-finite preactivation at layer " +
                                     std::to_string(l + 1));
        Matrix act = apply_activation(w.layer_activation(l), u.values);
        if (trace) {
            trace->pre.push_back(u.values);
            trace->act.push_back(act);
        }
        cur = GraphSignal(std::move(act));
    }
    return cur;
}

GnnWeights gnn_backprop(const Graph& g, const GraphSignal& x, const GnnWeights& w,
                        const GraphSignal& upstream) {
    ForwardTrace trace;
    gnn_forward(g, x, w, &trace);
    const int L = w.layers();
    if (upstream.values.rows() != g.n ||
        upstream.values.cols() != trace.act.back().cols())
        throw std::invalid_argument("gnn_backprop: upstream shape mismatch");

    GnnWeights grad = GnnWeights::zeros_like(w);
    // dJ/dU_l; last layer is linear so it starts as the upstream itself.
    Matrix gu = upstream.values;
    for (int l = L - 1; l >= 0; --l) {
        Matrix power = trace.act[l];  // A^k X_{l-1}
        for (int k = 0; k < w.tap_count(l); ++k) {
            if (k > 0) power = g.adj * power;
            grad.taps[l][k].noalias() = power.transpose() * gu;
        }
        if (l > 0) {
            Matrix gx = Matrix::Zero(g.n, static_cast<int>(w.taps[l][0].rows()));
            Matrix gpow = gu;  // A^k gu, A symmetric
            for (int k = 0; k < w.tap_count(l); ++k) {
                if (k > 0) gpow = g.adj * gpow;
                gx.noalias() += gpow * w.taps[l][k].transpose();
            }
            gu = activation_grad_matrix(w.layer_activation(l - 1), trace.pre[l - 1])
                     .cwiseProduct(gx);
        }
    }
    return grad;
}

namespace {

double dataset_mse(const Graph& g, const Dataset& data, const GnnWeights& w) {
    double total = 0.0;
    for (const auto& [input, target] : data) {
        GraphSignal out = gnn_forward(g, input, w);
        total += (out.values - target.values).squaredNorm() /
                 static_cast<double>(target.values.size());
    }
    return total / static_cast<double>(data.size());
}

}  // namespace

TrainResult gnn_train(const Graph& g, const Dataset& data, const GnnWeights& w0,
                      const TrainConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("gnn_train: empty dataset");
    for (const auto& [input, target] : data) {
        input.validate(g);
        target.validate(g);
    }

    GnnWeights w = w0;
    GnnWeights m = GnnWeights::zeros_like(w0);
    GnnWeights v = GnnWeights::zeros_like(w0);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    std::mt19937_64 rng(cfg.seed);
    std::vector<int> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> history;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const double batch = static_cast<double>(stop - start);
            GnnWeights grad = GnnWeights::zeros_like(w);
            for (std::size_t s = start; s < stop; ++s) {
                const auto& [input, target] = data[order[s]];
                GraphSignal out = gnn_forward(g, input, w);
                Matrix up = 2.0 * (out.values - target.values) /
                            (static_cast<double>(target.values.size()) * batch);
                GnnWeights sample_grad = gnn_backprop(g, input, w, GraphSignal(std::move(up)));
                for (int l = 0; l < w.layers(); ++l)
                    for (int k = 0; k < w.tap_count(l); ++k)
                        grad.taps[l][k] += sample_grad.taps[l][k];
            }
            ++step;
            for (int l = 0; l < w.layers(); ++l) {
                for (int k = 0; k < w.tap_count(l); ++k) {
                    Matrix& h = w.taps[l][k];
                    const Matrix& dh = grad.taps[l][k];
                    if (cfg.optimizer == TrainConfig::Optimizer::adam) {
                        Matrix& mh = m.taps[l][k];
                        Matrix& vh = v.taps[l][k];
                        mh = beta1 * mh + (1.0 - beta1) * dh;
                        vh = beta2 * vh + (1.0 - beta2) * dh.cwiseProduct(dh);
                        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
                        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
                        Matrix update = (mh / bc1).cwiseQuotient(
                            ((vh / bc2).cwiseSqrt().array() + eps).matrix());
                        h -= cfg.learning_rate * update;
                    } else {
                        h -= cfg.learning_rate * dh;
                    }
                    // decoupled weight decay
                    h -= cfg.learning_rate * cfg.weight_decay * h;
                }
            }
        }
        const double mse = dataset_mse(g, data, w);
        if (!std::isfinite(mse))
            throw std::runtime_error("gnn_train: loss diverged at epoch " +
                                     std::to_string(epoch + 1));
        history.push_back(mse);
    }
    return TrainResult{std::move(w), std::move(history)};
}

Matrix gnn_jacobian(const Graph& g, const GnnWeights& w, const GraphSignal& x) {
    if (w.widths().back() != 1)
        throw std::invalid_argument("gnn_jacobian: output width must be 1");
    const int params = w.parameter_count();
    Matrix jac(params, g.n);
    for (int i = 0; i < g.n; ++i) {
        Matrix e = Matrix::Zero(g.n, 1);
        e(i, 0) = 1.0;
        GnnWeights grad = gnn_backprop(g, x, w, GraphSignal(std::move(e)));
        int row = 0;
        for (const auto& layer : grad.taps) {
            for (const auto& h : layer) {
                for (int c = 0; c < h.cols(); ++c)
                    for (int r = 0; r < h.rows(); ++r) jac(row++, i) = h(r, c);
            }
        }
    }
    return jac;
}

Matrix empirical_ntk(const Graph& g, const GnnWeights& w, const GraphSignal& x,
                     const GraphSignal& x2) {
    Matrix j1 = gnn_jacobian(g, w, x);
    Matrix j2 = (&x == &x2 || x.values == x2.values) ? j1 : gnn_jacobian(g, w, x2);
    return j1.transpose() * j2;
}

Vector adjacency_eigenvector(const Graph& g, int which) {
    if (which < 1 || which > g.n)
        throw std::invalid_argument("adjacency_eigenvector: index out of range");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(g.adj);
    // solver sorts ascending; p-th by descending eigenvalue
    Vector v = solver.eigenvectors().col(g.n - which);
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) < 0.0) v = -v;
            break;
        }
    }
    return v;
}

std::vector<double> eig_projection(const Graph& g, const std::vector<GraphSignal>& signals,
                                   int which) {
    Vector v = adjacency_eigenvector(g, which);
    std::vector<double> out;
    out.reserve(signals.size());
    for (const auto& s : signals) {
        if (s.features() != 1)
            throw std::invalid_argument("eig_projection: signals must be single-feature");
        if (s.n() != g.n) throw std::invalid_argument("eig_projection: signal size mismatch");
        out.push_back(v.dot(s.values.col(0)));
    }
    return out;
}

}  // namespace gntk
