#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gntk/regression.hpp"
#include "gntk/spectral.hpp"

namespace gntk {

/// Bounded-confidence opinion update parameters.
struct OpinionConfig {
    double epsilon = 0.3;
    double c = 0.1;
    int t_max = 1000;
    double init_mean = 0.0;
    double init_variance = 2.0;
    bool include_self = true;
    bool normalize_by_set_size = false;
    double fixed_point_tol = 1e-9;

    void validate() const;
};

struct OpinionResult {
    GraphSignal opinions;
    int steps_used = 0;
};

/// Iterates x_i <- sum over neighbors within epsilon of c * x_j; the neighbor
/// test uses positive unnormalized edge weight, not the size-normalized value.
OpinionResult opinion_dynamics(const Graph& g, const GraphSignal& x0, const OpinionConfig& cfg);

std::pair<Graph, Graphon> make_sbm(int n, int blocks, double p, double q, std::uint64_t seed);

/// Uniform points in a square, OR-symmetrized kNN, unit weights.
Graph make_geometric_knn(int n, double square_side, int k, std::uint64_t seed);

struct LoadedGraph {
    Graph graph;
    std::vector<std::string> ids;  // dense index -> original id
    int duplicate_edges = 0;       // duplicates resolved by keeping the max weight
};

LoadedGraph load_edge_list(const std::string& path);
void save_edge_list(const Graph& g, const std::string& path);

struct LoadedNodeTable {
    GraphSignal signal;
    std::vector<int> labels;  // empty when the table has no label column
    std::vector<std::string> ids;
};

/// CSV of id,f_1..f_F[,label]; a header row starting with "id" may name a
/// trailing "label" column.
LoadedNodeTable load_node_table(const std::string& path);

/// Uniform node subset without replacement; indices sorted ascending so
/// latent positions stay ordered. Weights are re-normalized by n.
std::pair<Graph, std::vector<int>> subsample_nodes(const Graph& large, int n,
                                                   std::uint64_t seed);

struct BoundInputs {
    double C = 1.0, A_w = 0.0, A_x = 0.0;
    int n = 1, K = 1, L = 1;
};

/// Sampled-graph bound: C * (K^(4+L) * 2 A_w / n + K^(2+L) * A_x / n).
double sampled_bound(const BoundInputs& b);

/// Mirrors the config JSON field-for-field.
struct ExperimentConfig {
    std::string kind;  // convergence | width | eigen

    struct GraphSpec {
        std::string type = "sbm";  // sbm | geometric | er | edge_list
        int blocks = 2;
        double p = 0.1, q = 0.05;
        double side = 50.0;
        double knn_fraction = 0.1;
        double er_p = 0.1;
        std::string path;
    } graph;

    std::vector<int> sizes;
    int reference_size = 300;  // N
    int seeds = 5;
    std::uint64_t base_seed = 0;

    struct WeightsSpec {
        int L = 2;
        int K = 2;
        int width = 1;  // 1 selects the analytic single-feature chain
        std::string activation = "relu";
    } weights;

    struct RegressionSpec {
        std::string task = "mse-ridge";
        double lambda = -1.0;  // negative selects 1e-3 * trace / dim
    } regression;

    OpinionConfig opinion;
    int train_samples = 50;
    int test_samples = 10;

    std::vector<int> width_list = {10, 50, 250};
    int initializations = 5;
    int eig_index = 1;
    int signal_count = 4;  // M for eigenvalue experiments
    TrainConfig train;

    std::string out_dir = ".";
    int threads = 1;

    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_string(const std::string& text);
    std::string to_json_string() const;
};

Activation parse_activation(const std::string& name);

struct ConvergenceRow {
    int n = 0;
    std::uint64_t seed = 0;
    double err_small = 0.0, err_large = 0.0, rel_diff = 0.0;
};

struct OperatorNormRow {
    int n = 0;
    std::uint64_t seed = 0;
    double norm_diff = 0.0;
};

struct ConvergenceOutput {
    std::vector<ConvergenceRow> rows;
    std::vector<OperatorNormRow> norms;
};

ConvergenceOutput run_convergence_experiment(const ExperimentConfig& cfg);

struct WidthRow {
    int F = 0;
    std::uint64_t init_seed = 0;
    int node_rank = 0;
    double proj_input = 0.0, proj_gnn = 0.0, proj_gntk = 0.0, proj_target = 0.0;
};

std::vector<WidthRow> run_width_experiment(const ExperimentConfig& cfg);

std::vector<SpectrumRow> run_eigen_experiment(const ExperimentConfig& cfg);

/// Writes the CSV outputs plus a run-manifest JSON; returns the CSV paths.
std::vector<std::string> write_convergence_output(const ConvergenceOutput& out,
                                                  const ExperimentConfig& cfg);
std::vector<std::string> write_width_output(const std::vector<WidthRow>& rows,
                                            const ExperimentConfig& cfg);
std::vector<std::string> write_eigen_output(const std::vector<SpectrumRow>& rows,
                                            const ExperimentConfig& cfg);

}  // namespace gntk
