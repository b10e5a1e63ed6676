#include "gntk/kernel.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gntk/linalg.hpp"
#include "json.hpp"

namespace gntk {

const Matrix& KernelBlock::dense() {
    if (values.size() == 0 && has_factors()) values = (*left) * right->transpose();
    return values;
}

Matrix BlockKernel::full() const {
    if (factors) return (*factors) * factors->transpose();
    Matrix out(dim(), dim());
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) out.block(i * n, j * n, n, n) = block(i, j);
    return out;
}

Matrix gntk_factors(const Graph& g, const GnnWeights& w, const GraphSignal& x) {
    if (!w.single_feature())
        throw std::invalid_argument(
            "gntk_factors: analytic kernel requires a single-feature chain; "
            "use empirical_ntk for wide networks");
    if (x.features() != 1) throw std::invalid_argument("gntk_factors: signal must be single-feature");
    ForwardTrace trace;
    gnn_forward(g, x, w, &trace);

    const int L = w.layers();
    const int n = g.n;

    // Derivative columns are accumulated outward: at stage j, append the tap
    // inputs A^k X_j, scale rows by sigma'(U_j), then push everything through
    // the next layer's filter sum_k h_{j+1,k} A^k.
    Matrix acc(n, 0);
    for (int j = 0; j < L; ++j) {
        const int K = w.tap_count(j);
        Matrix grown(n, acc.cols() + K);
        grown.leftCols(acc.cols()) = acc;
        Matrix power = trace.act[j];
        for (int k = 0; k < K; ++k) {
            if (k > 0) power = g.adj * power;
            grown.col(acc.cols() + k) = power.col(0);
        }
        acc = std::move(grown);
        const Activation a = w.layer_activation(j);
        if (a != Activation::linear) {
            Vector d = trace.pre[j].col(0).unaryExpr(
                [a](double v) { return activate_grad(a, v); });
            acc = d.asDiagonal() * acc;
        }
        if (j + 1 < L) {
            Matrix filtered = w.taps[j + 1][0](0, 0) * acc;
            Matrix apow = acc;
            for (int k = 1; k < w.tap_count(j + 1); ++k) {
                apow = g.adj * apow;
                filtered.noalias() += w.taps[j + 1][k](0, 0) * apow;
            }
            acc = std::move(filtered);
        }
    }
    return acc;
}

KernelBlock gntk(const Graph& g, const GnnWeights& w, const GraphSignal& x,
                 const GraphSignal& x2) {
    KernelBlock block;
    block.n = g.n;
    block.left = gntk_factors(g, w, x);
    block.right = (&x == &x2 || x.values == x2.values) ? *block.left : gntk_factors(g, w, x2);
    block.values = (*block.left) * block.right->transpose();
    return block;
}

Matrix gntk_cross(const Graph& g, const GnnWeights& w, const GraphSignal& x,
                  const GraphSignal& x2, const std::vector<int>& rows,
                  const std::vector<int>& cols) {
    for (int r : rows)
        if (r < 0 || r >= g.n) throw std::invalid_argument("gntk_cross: row index out of range");
    for (int c : cols)
        if (c < 0 || c >= g.n) throw std::invalid_argument("gntk_cross: column index out of range");
    Matrix f1 = gntk_factors(g, w, x);
    Matrix f2 = (&x == &x2 || x.values == x2.values) ? f1 : gntk_factors(g, w, x2);
    Matrix sub1(static_cast<int>(rows.size()), f1.cols());
    Matrix sub2(static_cast<int>(cols.size()), f2.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) sub1.row(static_cast<int>(i)) = f1.row(rows[i]);
    for (std::size_t j = 0; j < cols.size(); ++j) sub2.row(static_cast<int>(j)) = f2.row(cols[j]);
    return sub1 * sub2.transpose();
}

Graph graphon_template_graph(const Graphon& w, int m) {
    if (m < 1) throw std::invalid_argument("graphon_template_graph: resolution must be >= 1");
    Graph g;
    g.n = m;
    g.adj = w.discretize(m) / static_cast<double>(m);
    g.latent.resize(m);
    for (int i = 0; i < m; ++i) g.latent[i] = (i + 0.5) / m;
    return g;
}

KernelBlock wntk_reference(const Graphon& w, const GnnWeights& weights,
                           const GraphonSignal& X, const GraphonSignal& X2, int m) {
    Graph grid = graphon_template_graph(w, m);
    GraphSignal x(X.discretize(m));
    GraphSignal x2(X2.discretize(m));
    return gntk(grid, weights, x, x2);
}

BlockKernel assemble_block_kernel(const Graph& g, const GnnWeights& w,
                                  const std::vector<GraphSignal>& signals,
                                  bool materialize) {
    if (signals.empty()) throw std::invalid_argument("assemble_block_kernel: empty signal list");
    BlockKernel bk;
    bk.n = g.n;
    bk.M = static_cast<int>(signals.size());
    std::vector<Matrix> factors;
    factors.reserve(signals.size());
    for (const auto& s : signals) factors.push_back(gntk_factors(g, w, s));

    const int r = static_cast<int>(factors[0].cols());
    Matrix stack(bk.dim(), r);
    for (int i = 0; i < bk.M; ++i) stack.middleRows(i * bk.n, bk.n) = factors[i];
    bk.factors = std::move(stack);

    if (materialize) {
        bk.blocks.resize(static_cast<std::size_t>(bk.M) * bk.M);
        for (int i = 0; i < bk.M; ++i) {
            for (int j = i; j < bk.M; ++j) {
                bk.blocks[i * bk.M + j] = factors[i] * factors[j].transpose();
                if (j != i) bk.blocks[j * bk.M + i] = bk.blocks[i * bk.M + j].transpose();
            }
        }
    }
    return bk;
}

double operator_norm_diff(KernelBlock& a, KernelBlock& b) {
    if (a.n != b.n) throw std::invalid_argument("operator_norm_diff: resolution mismatch");
    if (a.has_factors() && b.has_factors() &&
        a.n >= a.left->cols() + b.left->cols()) {
        // diff = [La  Lb] [Ra  -Rb]^T; sigma_max from the thin QR factors
        const int ra = static_cast<int>(a.left->cols());
        const int rb = static_cast<int>(b.left->cols());
        Matrix lcat(a.n, ra + rb), rcat(a.n, ra + rb);
        lcat << *a.left, *b.left;
        rcat << *a.right, -(*b.right);
        Eigen::HouseholderQR<Matrix> ql(lcat), qr(rcat);
        Matrix rl = ql.matrixQR().topRows(ra + rb).triangularView<Eigen::Upper>();
        Matrix rr = qr.matrixQR().topRows(ra + rb).triangularView<Eigen::Upper>();
        return spectral_norm(rl * rr.transpose()) / a.n;
    }
    return spectral_norm(a.dense() - b.dense()) / a.n;
}

KernelBlock upsample_block(const KernelBlock& a, int m) {
    if (m < a.n || m % a.n != 0)
        throw std::invalid_argument("upsample_block: target resolution must be a multiple of n");
    const int f = m / a.n;
    KernelBlock out;
    out.n = m;
    out.meta = a.meta;
    auto replicate_rows = [f, m](const Matrix& src) {
        Matrix dst(m, src.cols());
        for (int i = 0; i < src.rows(); ++i)
            for (int r = 0; r < f; ++r) dst.row(i * f + r) = src.row(i);
        return dst;
    };
    if (a.has_factors()) {
        out.left = replicate_rows(*a.left);
        out.right = replicate_rows(*a.right);
        if (a.values.size() != 0) out.values = (*out.left) * out.right->transpose();
    } else {
        Matrix dst(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) dst(i, j) = a.values(i / f, j / f);
        out.values = std::move(dst);
    }
    return out;
}

double bound_evaluate(double C, int K, int L, double dW, double dX) {
    if (C < 0.0 || dW < 0.0 || dX < 0.0)
        throw std::invalid_argument("bound_evaluate: inputs must be nonnegative");
    const double k = static_cast<double>(K);
    return C * (std::pow(k, 4.0 + L) * dW + std::pow(k, 2.0 + L) * dX);
}

void save_kernel_csv(KernelBlock& block, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_kernel_csv: cannot open " + path);
    out.precision(17);
    const Matrix& v = block.dense();
    out << block.n << '\n';
    for (int i = 0; i < block.n; ++i) {
        for (int j = 0; j < block.n; ++j) {
            if (j) out << ',';
            out << v(i, j);
        }
        out << '\n';
    }
    nlohmann::json meta = {{"signal_a", block.meta.signal_a},
                           {"signal_b", block.meta.signal_b},
                           {"graph_id", block.meta.graph_id},
                           {"weights_id", block.meta.weights_id},
                           {"n", block.n}};
    std::ofstream side(path + ".meta.json");
    side << meta.dump(2) << '\n';
}

KernelBlock load_kernel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_kernel_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_kernel_csv: empty file");
    KernelBlock block;
    block.n = std::stoi(line);
    block.values.resize(block.n, block.n);
    for (int i = 0; i < block.n; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("load_kernel_csv: truncated at row " + std::to_string(i + 1));
        std::stringstream ss(line);
        std::string cell;
        for (int j = 0; j < block.n; ++j) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("load_kernel_csv: short row " + std::to_string(i + 1));
            block.values(i, j) = std::stod(cell);
        }
    }
    std::ifstream side(path + ".meta.json");
    if (side) {
        nlohmann::json meta = nlohmann::json::parse(side, nullptr, false);
        if (!meta.is_discarded()) {
            block.meta.signal_a = meta.value("signal_a", "");
            block.meta.signal_b = meta.value("signal_b", "");
            block.meta.graph_id = meta.value("graph_id", "");
            block.meta.weights_id = meta.value("weights_id", "");
        }
    }
    return block;
}

}  // namespace gntk
