#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace gntk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected graph with size-normalized adjacency: [adj]_ij = w(i,j)/n.
/// Latent positions, when present, are the sampling coordinates u_i in [0,1],
/// sorted ascending.
struct Graph {
    int n = 0;
    Matrix adj;
    std::vector<double> latent;
    std::vector<int> labels;

    bool has_latent() const { return !latent.empty(); }

    /// Checks symmetry (1e-12), entry range [0, 1/n], and latent range.
    /// Throws std::invalid_argument on violation.
    void validate() const;

    /// Unnormalized weight w(i,j) = n * adj(i,j).
    double weight(int i, int j) const { return adj(i, j) * n; }
};

/// Node data: n x F matrix, one row per node.
struct GraphSignal {
    Matrix values;

    GraphSignal() = default;
    explicit GraphSignal(Matrix v) : values(std::move(v)) {}

    int n() const { return static_cast<int>(values.rows()); }
    int features() const { return static_cast<int>(values.cols()); }

    void validate(const Graph& g) const;
};

/// Builds a graph from dense symmetric unnormalized weights.
Graph graph_from_weights(const Matrix& weights);

}  // namespace gntk
