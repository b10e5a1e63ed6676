#include "gntk/regression.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace gntk {

namespace {

void default_index(RegressionModel& m, int count) {
    m.train_index.clear();
    m.train_index.reserve(count);
    for (int i = 0; i < count; ++i) m.train_index.emplace_back(0, i);
}

}  // namespace

RegressionModel fit_ridge(const Matrix& K, const Vector& y, double lambda) {
    if (K.rows() != K.cols()) throw std::invalid_argument("fit_ridge: kernel must be square");
    if (y.size() != K.rows()) throw std::invalid_argument("fit_ridge: target length mismatch");
    if (lambda < 0.0) throw std::invalid_argument("fit_ridge: negative lambda");
    if (!K.allFinite() || !y.allFinite()) throw std::invalid_argument("fit_ridge: non-finite input");

    const int dim = static_cast<int>(K.rows());
    RegressionModel model;
    model.task = Task::mse_ridge;
    model.lambda = lambda;
    default_index(model, dim);

    Matrix system = K + lambda * Matrix::Identity(dim, dim);
    Eigen::LLT<Matrix> llt(system);
    Vector alpha;
    if (llt.info() == Eigen::Success) {
        alpha = llt.solve(y);
    } else {
        const double jitter = 1e-10 * std::max(system.trace() / dim, 1.0);
        system += jitter * Matrix::Identity(dim, dim);
        model.jittered = true;
        Eigen::LDLT<Matrix> ldlt(system);
        alpha = ldlt.solve(y);
    }
    // one refinement pass keeps the normal-equation residual tight
    Vector residual = y - system * alpha;
    if (residual.norm() > 1e-10 * std::max(y.norm(), 1.0)) {
        if (llt.info() == Eigen::Success)
            alpha += llt.solve(residual);
        residual = y - system * alpha;
    }
    if (residual.norm() > 1e-8 * std::max(y.norm(), 1e-300))
        throw std::runtime_error("fit_ridge: solve residual above tolerance");

    model.alpha = alpha;
    return model;
}

namespace {

double logistic_objective(const Matrix& K, const Vector& alpha, const Vector& targets,
                          double lambda) {
    Vector f = K * alpha;
    double obj = 0.5 * lambda * alpha.dot(f);
    for (int i = 0; i < f.size(); ++i) {
        // log(1 + e^f) - t*f, stabilized
        const double z = f(i);
        obj += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - targets(i) * z;
    }
    return obj;
}

}  // namespace

RegressionModel fit_logistic(const Matrix& K, const std::vector<int>& labels, double lambda,
                             int max_iter, double tol) {
    if (K.rows() != K.cols()) throw std::invalid_argument("fit_logistic: kernel must be square");
    if (static_cast<int>(labels.size()) != K.rows())
        throw std::invalid_argument("fit_logistic: label count mismatch");
    if (lambda < 0.0) throw std::invalid_argument("fit_logistic: negative lambda");
    const int dim = static_cast<int>(K.rows());
    const int classes = 1 + *std::max_element(labels.begin(), labels.end());
    if (*std::min_element(labels.begin(), labels.end()) < 0)
        throw std::invalid_argument("fit_logistic: negative class id");

    RegressionModel model;
    model.task = Task::ce_logistic;
    model.lambda = lambda;
    model.classes = classes;
    model.alpha = Matrix::Zero(dim, classes);
    default_index(model, dim);

    const double jitter = 1e-10 * std::max(K.trace() / dim, 1.0);
    for (int c = 0; c < classes; ++c) {
        Vector targets(dim);
        for (int i = 0; i < dim; ++i) targets(i) = labels[i] == c ? 1.0 : 0.0;
        Vector alpha = Vector::Zero(dim);
        double grad_norm = 0.0;
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            Vector f = K * alpha;
            Vector p = f.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
            Vector grad = K * (p - targets + lambda * alpha);
            grad_norm = grad.norm();
            if (grad_norm <= tol) {
                converged = true;
                break;
            }
            Vector s = p.cwiseProduct(Vector::Ones(dim) - p);
            Matrix hess = K * s.asDiagonal() * K + lambda * K;
            hess += jitter * Matrix::Identity(dim, dim);
            Vector direction = Eigen::LDLT<Matrix>(hess).solve(-grad);
            // damping: halve until the objective does not increase
            const double base = logistic_objective(K, alpha, targets, lambda);
            double step = 1.0;
            while (step > 1e-12 &&
                   logistic_objective(K, alpha + step * direction, targets, lambda) > base)
                step *= 0.5;
            alpha += step * direction;
        }
        if (!converged) {
            Vector f = K * alpha;
            Vector p = f.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
            grad_norm = (K * (p - targets + lambda * alpha)).norm();
            if (grad_norm > tol)
                throw std::runtime_error("fit_logistic: no convergence, gradient norm " +
                                         std::to_string(grad_norm));
        }
        model.alpha.col(c) = alpha;
    }
    return model;
}

Matrix predict(const RegressionModel& model, const Matrix& K_cross) {
    if (K_cross.cols() != model.alpha.rows())
        throw std::invalid_argument("predict: cross-kernel width does not match alpha length");
    return K_cross * model.alpha;
}

std::vector<int> predict_labels(const RegressionModel& model, const Matrix& K_cross) {
    Matrix scores = predict(model, K_cross);
    std::vector<int> out(scores.rows());
    for (int i = 0; i < scores.rows(); ++i) {
        int best = 0;
        scores.row(i).maxCoeff(&best);
        out[i] = best;
    }
    return out;
}

void save_model_json(const RegressionModel& model, const std::string& path) {
    nlohmann::json j;
    j["task"] = model.task == Task::mse_ridge ? "mse-ridge" : "ce-logistic";
    j["lambda"] = model.lambda;
    j["classes"] = model.classes;
    j["jittered"] = model.jittered;
    auto& idx = j["train_index"] = nlohmann::json::array();
    for (const auto& [sample, node] : model.train_index) idx.push_back({sample, node});
    auto& alpha = j["alpha"] = nlohmann::json::array();
    for (int c = 0; c < model.alpha.cols(); ++c) {
        nlohmann::json col = nlohmann::json::array();
        for (int i = 0; i < model.alpha.rows(); ++i) col.push_back(model.alpha(i, c));
        alpha.push_back(std::move(col));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model_json: cannot open " + path);
    out << j.dump(2) << '\n';
}

RegressionModel load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model_json: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    RegressionModel model;
    model.task = j.at("task") == "mse-ridge" ? Task::mse_ridge : Task::ce_logistic;
    model.lambda = j.at("lambda");
    model.classes = j.value("classes", 1);
    model.jittered = j.value("jittered", false);
    for (const auto& pair : j.at("train_index"))
        model.train_index.emplace_back(pair.at(0), pair.at(1));
    const auto& alpha = j.at("alpha");
    const int cols = static_cast<int>(alpha.size());
    const int rows = static_cast<int>(alpha.at(0).size());
    model.alpha.resize(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int i = 0; i < rows; ++i) model.alpha(i, c) = alpha.at(c).at(i);
    return model;
}

Vector ridge_solve_factors(const Matrix& G, const Vector& y, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("ridge_solve_factors: lambda must be positive");
    const int r = static_cast<int>(G.cols());
    Matrix inner = lambda * Matrix::Identity(r, r) + G.transpose() * G;
    Vector t = Eigen::LLT<Matrix>(inner).solve(G.transpose() * y);
    return (y - G * t) / lambda;
}

namespace {

Matrix restrict_rows(const Matrix& values, const std::vector<int>& nodes) {
    Matrix out(static_cast<int>(nodes.size()), values.cols());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        out.row(static_cast<int>(i)) = values.row(nodes[i]);
    return out;
}

double mse(const Vector& pred, const Vector& truth) {
    return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

}  // namespace

TransferResult transfer_evaluate(const Graph& small, const std::vector<int>& node_map,
                                 const Graph& large, const GnnWeights& w,
                                 const TransferData& data,
                                 const std::vector<int>& train_samples,
                                 const std::vector<int>& test_samples, Task task,
                                 double lambda) {
    if (static_cast<int>(node_map.size()) != small.n)
        throw std::invalid_argument("transfer_evaluate: node map size mismatch");
    if (train_samples.empty() || test_samples.empty())
        throw std::invalid_argument("transfer_evaluate: empty split");
    for (int i = 0; i < small.n; ++i) {
        for (int j = 0; j < small.n; ++j) {
            const double ws = small.adj(i, j) * small.n;
            const double wl = large.adj(node_map[i], node_map[j]) * large.n;
            if (std::abs(ws - wl) > 1e-9)
                throw std::invalid_argument(
                    "transfer_evaluate: small graph is not the induced subgraph under the node map");
        }
    }

    const int n = small.n;
    const int Mtrain = static_cast<int>(train_samples.size());

    // factor stacks on the small graph for training samples
    std::vector<Matrix> train_factors_small(Mtrain);
    for (int i = 0; i < Mtrain; ++i) {
        GraphSignal xs(restrict_rows(data.inputs[train_samples[i]].values, node_map));
        train_factors_small[i] = gntk_factors(small, w, xs);
    }
    const int r = static_cast<int>(train_factors_small[0].cols());
    Matrix G(Mtrain * n, r);
    for (int i = 0; i < Mtrain; ++i) G.middleRows(i * n, n) = train_factors_small[i];

    Vector y_train(Mtrain * n);
    for (int i = 0; i < Mtrain; ++i)
        y_train.segment(i * n, n) =
            restrict_rows(data.targets[train_samples[i]].values, node_map).col(0);

    RegressionModel model;
    if (task == Task::mse_ridge) {
        model.task = Task::mse_ridge;
        model.lambda = lambda;
        if (lambda > 0.0) {
            model.alpha = ridge_solve_factors(G, y_train, lambda);
        } else {
            model = fit_ridge(G * G.transpose(), y_train, lambda);
        }
    } else {
        std::vector<int> labels(Mtrain * n);
        for (int i = 0; i < Mtrain * n; ++i) labels[i] = static_cast<int>(std::lround(y_train(i)));
        model = fit_logistic(G * G.transpose(), labels, lambda);
    }
    model.train_index.clear();
    for (int i = 0; i < Mtrain; ++i)
        for (int v = 0; v < n; ++v) model.train_index.emplace_back(train_samples[i], v);

    // cross-kernels: rows are query coordinates, columns the training ones
    auto evaluate = [&](const Graph& graph, const std::vector<int>& query_nodes,
                        bool on_large) {
        const int q = static_cast<int>(query_nodes.size());
        double total_err = 0.0;
        Matrix cross(q, Mtrain * n);
        std::vector<Matrix> train_factors(Mtrain);
        if (on_large) {
            for (int i = 0; i < Mtrain; ++i)
                train_factors[i] =
                    restrict_rows(gntk_factors(graph, w, data.inputs[train_samples[i]]), node_map);
        } else {
            train_factors = train_factors_small;
        }
        std::vector<double> errs;
        for (int t : test_samples) {
            Matrix f_test;
            Vector truth;
            if (on_large) {
                f_test = gntk_factors(graph, w, data.inputs[t]);
                truth = data.targets[t].values.col(0);
            } else {
                GraphSignal xs(restrict_rows(data.inputs[t].values, node_map));
                f_test = gntk_factors(graph, w, xs);
                truth = restrict_rows(data.targets[t].values, node_map).col(0);
            }
            Matrix f_query = restrict_rows(f_test, query_nodes);
            for (int i = 0; i < Mtrain; ++i)
                cross.middleCols(i * n, n) = f_query * train_factors[i].transpose();
            if (task == Task::mse_ridge) {
                Vector pred = predict(model, cross).col(0);
                Vector truth_q(q);
                for (int i = 0; i < q; ++i) truth_q(i) = truth(query_nodes[i]);
                errs.push_back(mse(pred, truth_q));
            } else {
                Matrix scores = predict(model, cross);
                double ce = 0.0;
                for (int i = 0; i < q; ++i) {
                    Eigen::RowVectorXd row = scores.row(i);
                    const double mx = row.maxCoeff();
                    const double lse = mx + std::log((row.array() - mx).exp().sum());
                    const int cls = static_cast<int>(std::lround(truth(query_nodes[i])));
                    ce += lse - row(std::min(cls, model.classes - 1));
                }
                errs.push_back(ce / q);
            }
        }
        for (double e : errs) total_err += e;
        return total_err / errs.size();
    };

    std::vector<int> small_nodes(n), large_nodes(large.n);
    for (int i = 0; i < n; ++i) small_nodes[i] = i;
    for (int i = 0; i < large.n; ++i) large_nodes[i] = i;

    TransferResult result;
    result.err_small = evaluate(small, small_nodes, false);
    result.err_large = evaluate(large, large_nodes, true);
    result.rel_diff = std::abs(result.err_small - result.err_large) /
                      std::max(result.err_large, 1e-300);
    return result;
}

}  // namespace gntk
