#include "gntk/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace gntk {

void Graph::validate() const {
    if (n <= 0) throw std::invalid_argument("Graph: node count must be positive");
    if (adj.rows() != n || adj.cols() != n)
        throw std::invalid_argument("Graph: adjacency shape does not match n");
    const double bound = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = adj(i, j);
            if (!std::isfinite(a)) throw std::invalid_argument("Graph: non-finite adjacency entry");
            if (a < -1e-15 || a > bound + 1e-12)
                throw std::invalid_argument("Graph: adjacency entry outside [0, 1/n]");
            if (std::abs(a - adj(j, i)) > 1e-12)
                throw std::invalid_argument("Graph: adjacency not symmetric");
        }
    }
    if (!latent.empty()) {
        if (static_cast<int>(latent.size()) != n)
            throw std::invalid_argument("Graph: latent position count does not match n");
        for (double u : latent)
            if (u < 0.0 || u > 1.0)
                throw std::invalid_argument("Graph: latent position outside [0,1]");
    }
}

void GraphSignal::validate(const Graph& g) const {
    if (n() != g.n) throw std::invalid_argument("GraphSignal: row count does not match graph size");
    if (!values.allFinite()) throw std::invalid_argument("GraphSignal: non-finite entry");
}

Graph graph_from_weights(const Matrix& weights) {
    if (weights.rows() != weights.cols())
        throw std::invalid_argument("graph_from_weights: matrix must be square");
    if (weights.rows() > 0 && !weights.allFinite())
        throw std::invalid_argument("graph_from_weights: non-finite weight entry");
    if (weights.rows() > 0) {
        if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("graph_from_weights: weight matrix must be symmetric");
        if (weights.minCoeff() < -1e-15)
            throw std::invalid_argument("graph_from_weights: weights must be nonnegative");
    }
    Graph g;
    g.n = static_cast<int>(weights.rows());
    g.adj = weights / static_cast<double>(g.n);
    return g;
}

}  // namespace gntk
