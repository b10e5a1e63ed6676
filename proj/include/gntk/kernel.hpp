#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gntk/gnn.hpp"
#include "gntk/graphon.hpp"

namespace gntk {

/// n x n tangent-kernel matrix for one signal pair.
///
/// Single-feature kernels factor as values = left * right^T with rank at most
/// L*K; when present, the factors are used for fast norms and spectra.
struct KernelBlock {
    Matrix values;
    int n = 0;
    struct Meta {
        std::string signal_a, signal_b, graph_id, weights_id;
    } meta;
    std::optional<Matrix> left, right;

    bool has_factors() const { return left.has_value() && right.has_value(); }
    const Matrix& dense();  // materializes values from factors if needed
};

/// M x M grid of kernel blocks sharing n; the full matrix is (Mn) x (Mn).
struct BlockKernel {
    int n = 0;
    int M = 0;
    std::vector<Matrix> blocks;        // row-major, may be empty if factors-only
    std::optional<Matrix> factors;     // (Mn) x r stack; full = factors * factors^T

    const Matrix& block(int i, int j) const { return blocks[i * M + j]; }
    Matrix full() const;
    int dim() const { return n * M; }
};

/// Factor matrix of the analytic single-feature GNTK: column (l,k) holds the
/// derivative of the output w.r.t. h_{l,k}, so the kernel for a signal pair is
/// factors(x) * factors(x2)^T.
Matrix gntk_factors(const Graph& g, const GnnWeights& w, const GraphSignal& x);

KernelBlock gntk(const Graph& g, const GnnWeights& w, const GraphSignal& x,
                 const GraphSignal& x2);

Matrix gntk_cross(const Graph& g, const GnnWeights& w, const GraphSignal& x,
                  const GraphSignal& x2, const std::vector<int>& rows,
                  const std::vector<int>& cols);

/// Template grid graph of the graphon at resolution m: weights W(u_i,u_j)/m
/// with midpoint latent positions (diagonal kept, no sampling noise).
Graph graphon_template_graph(const Graphon& w, int m);

/// Discretizes the graphon into a template grid graph and runs the analytic
/// gntk on it; one code path for graphs and the limit object.
KernelBlock wntk_reference(const Graphon& w, const GnnWeights& weights,
                           const GraphonSignal& X, const GraphonSignal& X2, int m);

BlockKernel assemble_block_kernel(const Graph& g, const GnnWeights& w,
                                  const std::vector<GraphSignal>& signals,
                                  bool materialize = true);

/// L2([0,1]) operator norm of the step-kernel difference:
/// sigma_max(a.values - b.values) / n.
double operator_norm_diff(KernelBlock& a, KernelBlock& b);

/// Block-constant replication to resolution m (n must divide m); the operator
/// norm is preserved exactly.
KernelBlock upsample_block(const KernelBlock& a, int m);

/// C * (K^(4+L) * dW + K^(2+L) * dX).
double bound_evaluate(double C, int K, int L, double dW, double dX);

void save_kernel_csv(KernelBlock& block, const std::string& path);
KernelBlock load_kernel_csv(const std::string& path);

}  // namespace gntk
