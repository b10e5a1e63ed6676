#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gntk/graph.hpp"

namespace gntk {

/// Symmetric kernel model on [0,1]^2 with values in [0,1].
///
/// Induced graphons carry the UNnormalized graph weights w(i,j), so that the
/// discretized operator at native resolution reproduces the size-normalized
/// graph convolution exactly.
class Graphon {
public:
    enum class Kind { constant, sbm, grid, induced };

    static Graphon constant(double p);
    /// boundaries: ascending upper block edges, last must be 1.
    static Graphon sbm(std::vector<double> boundaries, Matrix block_values);
    static Graphon grid(Matrix values);
    static Graphon induced(const Graph& g);

    double operator()(double u, double v) const;
    Kind kind() const { return kind_; }
    /// Grid resolution for grid/induced graphons, 0 otherwise.
    int native_resolution() const;

    /// Midpoint-rule evaluation matrix W(u_i, u_j), u_i = (i - 1/2)/m.
    Matrix discretize(int m) const;

private:
    Kind kind_ = Kind::constant;
    double value_ = 0.0;
    std::vector<double> boundaries_;
    Matrix values_;
};

/// Graphon signal X : [0,1] -> R^F, either a named analytic function or a
/// step function on the uniform intervals I_i = [(i-1)/n, i/n).
class GraphonSignal {
public:
    static GraphonSignal analytic(std::function<double(double)> f);
    static GraphonSignal analytic_multi(std::function<Vector(double)> f, int features);
    static GraphonSignal step(Matrix values);  // m x F

    Vector operator()(double u) const;
    int features() const { return features_; }
    /// Step resolution, 0 for analytic signals.
    int native_resolution() const;
    bool is_step() const { return analytic_ == nullptr; }

    Matrix discretize(int m) const;  // m x F at interval midpoints

private:
    std::function<Vector(double)> analytic_;
    Matrix values_;
    int features_ = 1;
};

enum class SampleMode { stochastic, weighted, template_grid };

/// Samples an n-node graph from the graphon. Latent positions are i.i.d.
/// uniform (deterministic midpoints in template mode) and sorted ascending;
/// the diagonal is zero unless bernoulli_diagonal is set in stochastic mode.
Graph sample_graph(const Graphon& w, int n, SampleMode mode, std::uint64_t seed,
                   bool bernoulli_diagonal = false);

Graphon induce_graphon(const Graph& g);
GraphonSignal induce_signal(const GraphSignal& x);
GraphSignal sample_signal(const GraphonSignal& X, const std::vector<double>& latent);

/// k-fold application of the discretized integral operator
/// (T_W X)_i = (1/m) sum_j W(u_i,u_j) X_j; k = 0 returns X discretized.
GraphonSignal apply_operator(const Graphon& w, const GraphonSignal& X, int k, int m);

/// Midpoint-rule L2([0,1]^2) distance between two graphons.
double graphon_l2_distance(const Graphon& a, const Graphon& b, int m);

/// Midpoint-rule L2([0,1]) distance between two graphon signals.
double signal_l2_distance(const GraphonSignal& a, const GraphonSignal& b, int m);

/// L2 operator norm of T_{W1}^(k) - T_{W2}^(k) at resolution m.
double operator_iterate_norm_diff(const Graphon& a, const Graphon& b, int k, int m);

void save_grid_csv(const Graphon& w, int m, const std::string& path);
Graphon load_grid_csv(const std::string& path);

}  // namespace gntk
