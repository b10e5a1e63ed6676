#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gntk/kernel.hpp"

namespace gntk {

enum class Task { mse_ridge, ce_logistic };

/// Fitted dual coefficients bound to (sample id, node id) training coordinates.
struct RegressionModel {
    Matrix alpha;  // train_count x C (C = 1 for ridge)
    std::vector<std::pair<int, int>> train_index;
    double lambda = 0.0;
    Task task = Task::mse_ridge;
    int classes = 1;
    bool jittered = false;  // lambda = 0 needed a jitter fallback
};

/// Solves (K + lambda I) alpha = y; residual checked to 1e-8 * ||y||.
RegressionModel fit_ridge(const Matrix& K, const Vector& y, double lambda);

/// Same normal equations for a factored kernel K = G G^T, solved through the
/// r x r inner system (lambda must be positive).
Vector ridge_solve_factors(const Matrix& G, const Vector& y, double lambda);

/// One-vs-rest dual logistic regression, damped Newton on the regularized
/// cross-entropy objective.
RegressionModel fit_logistic(const Matrix& K, const std::vector<int>& labels, double lambda,
                             int max_iter = 100, double tol = 1e-8);

/// Ridge: K_cross * alpha. Logistic: per-class scores (softmax them for
/// probabilities).
Matrix predict(const RegressionModel& model, const Matrix& K_cross);

std::vector<int> predict_labels(const RegressionModel& model, const Matrix& K_cross);

void save_model_json(const RegressionModel& model, const std::string& path);
RegressionModel load_model_json(const std::string& path);

/// Signals living on the large graph; targets are class ids for logistic.
struct TransferData {
    std::vector<GraphSignal> inputs;
    std::vector<GraphSignal> targets;
};

struct TransferResult {
    double err_small = 0.0;
    double err_large = 0.0;
    double rel_diff = 0.0;
};

/// Fits the kernel regression on the small graph's training coordinates, then
/// evaluates the same dual coefficients on the small graph's test coordinates
/// and, via the large-graph cross-kernel, on the large graph.
TransferResult transfer_evaluate(const Graph& small, const std::vector<int>& node_map,
                                 const Graph& large, const GnnWeights& w,
                                 const TransferData& data,
                                 const std::vector<int>& train_samples,
                                 const std::vector<int>& test_samples, Task task,
                                 double lambda);

}  // namespace gntk
