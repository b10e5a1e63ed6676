#include "gntk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace gntk {

void OpinionConfig::validate() const {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("OpinionConfig: epsilon must be in [0,1]");
    if (c <= 0.0) throw std::invalid_argument("OpinionConfig: c must be positive");
    if (t_max < 1) throw std::invalid_argument("OpinionConfig: t_max must be >= 1");
}

OpinionResult opinion_dynamics(const Graph& g, const GraphSignal& x0, const OpinionConfig& cfg) {
    cfg.validate();
    if (x0.n() != g.n) throw std::invalid_argument("opinion_dynamics: signal size mismatch");
    if (x0.features() != 1)
        throw std::invalid_argument("opinion_dynamics: opinions must be single-feature");

    Vector x = x0.values.col(0);
    Vector next(g.n);
    int steps = 0;
    for (; steps < cfg.t_max; ++steps) {
        for (int i = 0; i < g.n; ++i) {
            double sum = 0.0;
            int count = 0;
            for (int j = 0; j < g.n; ++j) {
                const bool neighbor = (j == i) ? cfg.include_self : g.adj(i, j) > 0.0;
                if (neighbor && std::abs(x(j) - x(i)) <= cfg.epsilon) {
                    sum += x(j);
                    ++count;
                }
            }
            if (cfg.normalize_by_set_size && count > 0) sum /= count;
            next(i) = cfg.c * sum;
        }
        const double change = (next - x).cwiseAbs().maxCoeff();
        x = next;
        if (change < cfg.fixed_point_tol) {
            ++steps;
            break;
        }
    }
    return OpinionResult{GraphSignal(x), steps};
}

std::pair<Graph, Graphon> make_sbm(int n, int blocks, double p, double q, std::uint64_t seed) {
    if (blocks < 1 || n < blocks) throw std::invalid_argument("make_sbm: need n >= blocks >= 1");
    std::vector<double> boundaries(blocks);
    for (int b = 0; b < blocks; ++b) boundaries[b] = static_cast<double>(b + 1) / blocks;
    Matrix values = Matrix::Constant(blocks, blocks, q);
    values.diagonal().setConstant(p);
    Graphon w = Graphon::sbm(std::move(boundaries), std::move(values));
    return {sample_graph(w, n, SampleMode::stochastic, seed), w};
}

Graph make_geometric_knn(int n, double square_side, int k, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("make_geometric_knn: need n >= 2");
    if (k < 1 || k >= n) throw std::invalid_argument("make_geometric_knn: need 1 <= k < n");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, square_side);
    std::vector<std::pair<double, double>> points(n);
    for (auto& [px, py] : points) {
        px = unif(rng);
        py = unif(rng);
    }
    Matrix weights = Matrix::Zero(n, n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = std::hypot(points[a].first - points[i].first,
                                         points[a].second - points[i].second);
            const double db = std::hypot(points[b].first - points[i].first,
                                         points[b].second - points[i].second);
            return da != db ? da < db : a < b;
        });
        int taken = 0;
        for (int j : order) {
            if (j == i) continue;
            weights(i, j) = 1.0;
            weights(j, i) = 1.0;  // OR symmetrization
            if (++taken == k) break;
        }
    }
    return graph_from_weights(weights);
}

LoadedGraph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_edge_list: cannot open " + path);
    LoadedGraph result;
    std::unordered_map<std::string, int> id_map;
    auto intern = [&](const std::string& id) {
        auto [it, inserted] = id_map.emplace(id, static_cast<int>(result.ids.size()));
        if (inserted) result.ids.push_back(id);
        return it->second;
    };
    struct Edge {
        int a, b;
        double w;
    };
    std::vector<Edge> edges;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string src, dst, wfield;
        if (!std::getline(ss, src, ',') || !std::getline(ss, dst, ','))
            throw std::runtime_error("load_edge_list: malformed line " + std::to_string(lineno));
        double weight = 1.0;
        if (std::getline(ss, wfield, ',')) {
            try {
                weight = std::stod(wfield);
            } catch (const std::exception&) {
                throw std::runtime_error("load_edge_list: bad weight at line " +
                                         std::to_string(lineno));
            }
        }
        edges.push_back(Edge{intern(src), intern(dst), weight});
    }
    const int n = static_cast<int>(result.ids.size());
    Matrix weights = Matrix::Zero(std::max(n, 1), std::max(n, 1));
    for (const auto& e : edges) {
        if (weights(e.a, e.b) > 0.0) ++result.duplicate_edges;
        const double w = std::max(weights(e.a, e.b), e.w);
        weights(e.a, e.b) = w;
        weights(e.b, e.a) = w;
    }
    result.graph = graph_from_weights(weights);
    if (n == 0) result.graph.n = 0;
    return result;
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_edge_list: cannot open " + path);
    out.precision(17);
    for (int i = 0; i < g.n; ++i)
        for (int j = i; j < g.n; ++j)
            if (g.adj(i, j) > 0.0) out << i << ',' << j << ',' << g.weight(i, j) << '\n';
}

LoadedNodeTable load_node_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_node_table: cannot open " + path);
    LoadedNodeTable result;
    std::string line;
    int lineno = 0;
    bool has_label = false;
    bool header_seen = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<std::string> fields;
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (lineno == 1 && !fields.empty() && fields[0] == "id") {
            header_seen = true;
            has_label = fields.back() == "label";
            continue;
        }
        if (fields.size() < 2)
            throw std::runtime_error("load_node_table: malformed line " + std::to_string(lineno));
        result.ids.push_back(fields[0]);
        std::vector<double> values;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            try {
                values.push_back(std::stod(fields[i]));
            } catch (const std::exception&) {
                throw std::runtime_error("load_node_table: parse error at line " +
                                         std::to_string(lineno));
            }
        }
        rows.push_back(std::move(values));
    }
    (void)header_seen;
    if (rows.empty()) throw std::runtime_error("load_node_table: empty table");
    const int features = static_cast<int>(rows[0].size()) - (has_label ? 1 : 0);
    if (features < 1) throw std::runtime_error("load_node_table: no feature columns");
    Matrix values(static_cast<int>(rows.size()), features);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) != features + (has_label ? 1 : 0))
            throw std::runtime_error("load_node_table: ragged row " + std::to_string(i + 1));
        for (int f = 0; f < features; ++f) values(static_cast<int>(i), f) = rows[i][f];
        if (has_label) result.labels.push_back(static_cast<int>(std::lround(rows[i].back())));
    }
    result.signal = GraphSignal(std::move(values));
    return result;
}

std::pair<Graph, std::vector<int>> subsample_nodes(const Graph& large, int n,
                                                   std::uint64_t seed) {
    if (n < 1 || n > large.n)
        throw std::invalid_argument("subsample_nodes: n must be in [1, N]");
    std::vector<int> all(large.n);
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(seed);
    std::vector<int> chosen;
    std::sample(all.begin(), all.end(), std::back_inserter(chosen), n, rng);
    std::sort(chosen.begin(), chosen.end());

    Graph small;
    small.n = n;
    small.adj.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            small.adj(i, j) = large.weight(chosen[i], chosen[j]) / n;
    if (large.has_latent()) {
        small.latent.resize(n);
        for (int i = 0; i < n; ++i) small.latent[i] = large.latent[chosen[i]];
    }
    if (!large.labels.empty()) {
        small.labels.resize(n);
        for (int i = 0; i < n; ++i) small.labels[i] = large.labels[chosen[i]];
    }
    return {std::move(small), std::move(chosen)};
}

double sampled_bound(const BoundInputs& b) {
    if (b.n < 1) throw std::invalid_argument("sampled_bound: n must be >= 1");
    return bound_evaluate(b.C, b.K, b.L, 2.0 * b.A_w / b.n, b.A_x / b.n);
}

Activation parse_activation(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "linear") return Activation::linear;
    throw std::invalid_argument("unknown activation: " + name);
}

namespace {

using nlohmann::json;

void read_if(const json& j, const char* key, auto& target) {
    if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig cfg;
    read_if(j, "kind", cfg.kind);
    if (j.contains("graph")) {
        const auto& g = j.at("graph");
        read_if(g, "type", cfg.graph.type);
        read_if(g, "blocks", cfg.graph.blocks);
        read_if(g, "p", cfg.graph.p);
        read_if(g, "q", cfg.graph.q);
        read_if(g, "side", cfg.graph.side);
        read_if(g, "knn_fraction", cfg.graph.knn_fraction);
        read_if(g, "er_p", cfg.graph.er_p);
        read_if(g, "path", cfg.graph.path);
    }
    read_if(j, "sizes", cfg.sizes);
    read_if(j, "reference_size", cfg.reference_size);
    read_if(j, "seeds", cfg.seeds);
    read_if(j, "base_seed", cfg.base_seed);
    if (j.contains("weights")) {
        const auto& w = j.at("weights");
        read_if(w, "L", cfg.weights.L);
        read_if(w, "K", cfg.weights.K);
        read_if(w, "width", cfg.weights.width);
        read_if(w, "activation", cfg.weights.activation);
    }
    if (j.contains("regression")) {
        const auto& r = j.at("regression");
        read_if(r, "task", cfg.regression.task);
        read_if(r, "lambda", cfg.regression.lambda);
    }
    if (j.contains("opinion")) {
        const auto& o = j.at("opinion");
        read_if(o, "epsilon", cfg.opinion.epsilon);
        read_if(o, "c", cfg.opinion.c);
        read_if(o, "t_max", cfg.opinion.t_max);
        read_if(o, "init_variance", cfg.opinion.init_variance);
        read_if(o, "include_self", cfg.opinion.include_self);
        read_if(o, "normalize_by_set_size", cfg.opinion.normalize_by_set_size);
    }
    read_if(j, "train_samples", cfg.train_samples);
    read_if(j, "test_samples", cfg.test_samples);
    read_if(j, "width_list", cfg.width_list);
    read_if(j, "initializations", cfg.initializations);
    read_if(j, "eig_index", cfg.eig_index);
    read_if(j, "signal_count", cfg.signal_count);
    if (j.contains("train")) {
        const auto& t = j.at("train");
        read_if(t, "epochs", cfg.train.epochs);
        read_if(t, "batch_size", cfg.train.batch_size);
        read_if(t, "learning_rate", cfg.train.learning_rate);
        read_if(t, "weight_decay", cfg.train.weight_decay);
    }
    read_if(j, "out", cfg.out_dir);
    read_if(j, "threads", cfg.threads);
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ExperimentConfig: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

std::string ExperimentConfig::to_json_string() const {
    json j;
    j["kind"] = kind;
    j["graph"] = {{"type", graph.type},       {"blocks", graph.blocks},
                  {"p", graph.p},             {"q", graph.q},
                  {"side", graph.side},       {"knn_fraction", graph.knn_fraction},
                  {"er_p", graph.er_p},       {"path", graph.path}};
    j["sizes"] = sizes;
    j["reference_size"] = reference_size;
    j["seeds"] = seeds;
    j["base_seed"] = base_seed;
    j["weights"] = {{"L", weights.L},
                    {"K", weights.K},
                    {"width", weights.width},
                    {"activation", weights.activation}};
    j["regression"] = {{"task", regression.task}, {"lambda", regression.lambda}};
    j["opinion"] = {{"epsilon", opinion.epsilon},
                    {"c", opinion.c},
                    {"t_max", opinion.t_max},
                    {"init_variance", opinion.init_variance},
                    {"include_self", opinion.include_self},
                    {"normalize_by_set_size", opinion.normalize_by_set_size}};
    j["train_samples"] = train_samples;
    j["test_samples"] = test_samples;
    j["width_list"] = width_list;
    j["initializations"] = initializations;
    j["eig_index"] = eig_index;
    j["signal_count"] = signal_count;
    j["train"] = {{"epochs", train.epochs},
                  {"batch_size", train.batch_size},
                  {"learning_rate", train.learning_rate},
                  {"weight_decay", train.weight_decay}};
    j["out"] = out_dir;
    j["threads"] = threads;
    return j.dump(2);
}

namespace {

// FNV-1a over the canonical config dump
std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = cfg.to_json_string();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& outputs) {
    nlohmann::json manifest;
    manifest["config"] = nlohmann::json::parse(cfg.to_json_string());
    manifest["config_hash"] = config_hash(cfg);
    manifest["base_seed"] = cfg.base_seed;
    manifest["seeds"] = cfg.seeds;
    manifest["outputs"] = outputs;
    manifest["version"] = "0.1.0";
    std::ofstream out(std::filesystem::path(cfg.out_dir) / "manifest.json");
    out << manifest.dump(2) << '\n';
}

Graph build_reference_graph(const ExperimentConfig& cfg, Graphon* graphon_out) {
    const int N = cfg.reference_size;
    if (cfg.graph.type == "sbm") {
        auto [g, w] = make_sbm(N, cfg.graph.blocks, cfg.graph.p, cfg.graph.q, cfg.base_seed);
        if (graphon_out) *graphon_out = w;
        return g;
    }
    if (cfg.graph.type == "er") {
        Graphon w = Graphon::constant(cfg.graph.er_p);
        if (graphon_out) *graphon_out = w;
        return sample_graph(w, N, SampleMode::stochastic, cfg.base_seed);
    }
    if (cfg.graph.type == "geometric") {
        const int k = std::max(1, static_cast<int>(std::lround(N * cfg.graph.knn_fraction)));
        return make_geometric_knn(N, cfg.graph.side, k, cfg.base_seed);
    }
    if (cfg.graph.type == "edge_list") return load_edge_list(cfg.graph.path).graph;
    throw std::invalid_argument("unknown graph type: " + cfg.graph.type);
}

GnnWeights make_single_feature_weights(const ExperimentConfig& cfg, std::uint64_t seed) {
    const int L = std::max(1, cfg.weights.L);
    std::vector<int> taps(L, cfg.weights.K);
    if (L > 1) taps.back() = 1;  // linear single-tap readout
    return GnnWeights::random_per_layer(std::vector<int>(L + 1, 1), taps,
                                        parse_activation(cfg.weights.activation), seed);
}

TransferData make_opinion_dataset(const Graph& g, const ExperimentConfig& cfg, int count,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(cfg.opinion.init_mean,
                                           std::sqrt(cfg.opinion.init_variance));
    TransferData data;
    for (int s = 0; s < count; ++s) {
        Matrix x0(g.n, 1);
        for (int i = 0; i < g.n; ++i) x0(i, 0) = gauss(rng);
        GraphSignal input(std::move(x0));
        data.targets.push_back(opinion_dynamics(g, input, cfg.opinion).opinions);
        data.inputs.push_back(std::move(input));
    }
    return data;
}

double effective_lambda(const ExperimentConfig& cfg, const Matrix& factor_stack) {
    if (cfg.regression.lambda >= 0.0) return cfg.regression.lambda;
    const double trace = factor_stack.squaredNorm();
    return 1e-3 * trace / factor_stack.rows();
}

Matrix restrict_rows(const Matrix& values, const std::vector<int>& nodes) {
    Matrix out(static_cast<int>(nodes.size()), values.cols());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        out.row(static_cast<int>(i)) = values.row(nodes[i]);
    return out;
}

}  // namespace

ConvergenceOutput run_convergence_experiment(const ExperimentConfig& cfg) {
    if (cfg.sizes.empty()) throw std::invalid_argument("convergence: sizes must be nonempty");
    for (int n : cfg.sizes)
        if (n > cfg.reference_size)
            throw std::invalid_argument("convergence: sizes must not exceed reference_size");

    Graph large = build_reference_graph(cfg, nullptr);
    const int total = cfg.train_samples + cfg.test_samples;
    TransferData data = make_opinion_dataset(large, cfg, total, cfg.base_seed + 1);
    std::vector<int> train(cfg.train_samples), test(cfg.test_samples);
    std::iota(train.begin(), train.end(), 0);
    std::iota(test.begin(), test.end(), cfg.train_samples);

    GnnWeights w = make_single_feature_weights(cfg, cfg.base_seed + 2);
    const Task task = cfg.regression.task == "ce-logistic" ? Task::ce_logistic : Task::mse_ridge;

    // lambda pinned on the full-size factor stack so all sizes share one value
    Matrix f_ref = gntk_factors(large, w, data.inputs[0]);
    const double lambda = effective_lambda(cfg, f_ref);

    ConvergenceOutput out;
    for (int n : cfg.sizes) {
        for (int s = 0; s < cfg.seeds; ++s) {
            const std::uint64_t seed = cfg.base_seed + 1000 * (s + 1) + n;
            auto [small, node_map] = subsample_nodes(large, n, seed);
            TransferResult r =
                transfer_evaluate(small, node_map, large, w, data, train, test, task, lambda);
            out.rows.push_back(ConvergenceRow{n, seed, r.err_small, r.err_large, r.rel_diff});

            GraphSignal x_small(restrict_rows(data.inputs[0].values, node_map));
            KernelBlock ks = gntk(small, w, x_small, x_small);
            KernelBlock kl = gntk(large, w, data.inputs[0], data.inputs[0]);
            const int common = std::lcm(n, large.n);
            KernelBlock ks_up = upsample_block(ks, common);
            KernelBlock kl_up = upsample_block(kl, common);
            out.norms.push_back(OperatorNormRow{n, seed, operator_norm_diff(ks_up, kl_up)});
        }
    }
    return out;
}

std::vector<WidthRow> run_width_experiment(const ExperimentConfig& cfg) {
    const int n = cfg.sizes.empty() ? 80 : cfg.sizes[0];
    Graph g;
    if (cfg.graph.type == "geometric") {
        const int k = std::max(1, static_cast<int>(std::lround(n * cfg.graph.knn_fraction)));
        g = make_geometric_knn(n, cfg.graph.side, k, cfg.base_seed);
    } else {
        g = make_sbm(n, cfg.graph.blocks, cfg.graph.p, cfg.graph.q, cfg.base_seed).first;
    }

    const int total = cfg.train_samples + cfg.test_samples;
    TransferData data = make_opinion_dataset(g, cfg, total, cfg.base_seed + 1);
    Dataset train_set;
    for (int i = 0; i < cfg.train_samples; ++i)
        train_set.emplace_back(data.inputs[i], data.targets[i]);

    const int proj_index = std::min(cfg.eig_index < 1 ? 2 : cfg.eig_index, g.n);
    Vector v = adjacency_eigenvector(g, proj_index);

    // test-sample ranks by input projection, shared across widths and inits
    std::vector<double> proj_inputs(cfg.test_samples);
    for (int t = 0; t < cfg.test_samples; ++t)
        proj_inputs[t] = v.dot(data.inputs[cfg.train_samples + t].values.col(0));
    std::vector<int> rank_of(cfg.test_samples);
    {
        std::vector<int> order(cfg.test_samples);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return proj_inputs[a] < proj_inputs[b]; });
        for (int r = 0; r < cfg.test_samples; ++r) rank_of[order[r]] = r;
    }

    std::vector<WidthRow> rows;
    for (int F : cfg.width_list) {
        for (int init = 0; init < cfg.initializations; ++init) {
            const std::uint64_t init_seed = cfg.base_seed + 10 * (init + 1);
            GnnWeights w0 = GnnWeights::random_perceptron(
                F, cfg.weights.K, parse_activation(cfg.weights.activation), init_seed + F);

            // NTK at initialization, factored as per-sample Jacobian transposes
            std::vector<Matrix> factors(total);
            for (int i = 0; i < total; ++i)
                factors[i] = gnn_jacobian(g, w0, data.inputs[i]).transpose();
            const int params = static_cast<int>(factors[0].cols());
            Matrix G(cfg.train_samples * g.n, params);
            Vector y(cfg.train_samples * g.n);
            for (int i = 0; i < cfg.train_samples; ++i) {
                G.middleRows(i * g.n, g.n) = factors[i];
                y.segment(i * g.n, g.n) = data.targets[i].values.col(0);
            }
            const double lambda = effective_lambda(cfg, G);
            Vector alpha = ridge_solve_factors(G, y, lambda);

            TrainConfig tc = cfg.train;
            tc.seed = init_seed;
            GnnWeights trained = gnn_train(g, train_set, w0, tc).weights;

            for (int t = 0; t < cfg.test_samples; ++t) {
                const int sample = cfg.train_samples + t;
                Vector gnn_out = gnn_forward(g, data.inputs[sample], trained).values.col(0);
                Vector ntk_pred = factors[sample] * (G.transpose() * alpha);
                rows.push_back(WidthRow{F, init_seed, rank_of[t], proj_inputs[t],
                                        v.dot(gnn_out), v.dot(ntk_pred),
                                        v.dot(data.targets[sample].values.col(0))});
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const WidthRow& a, const WidthRow& b) {
        return std::tie(a.F, a.init_seed, a.node_rank) < std::tie(b.F, b.init_seed, b.node_rank);
    });
    return rows;
}

std::vector<SpectrumRow> run_eigen_experiment(const ExperimentConfig& cfg) {
    if (cfg.sizes.empty()) throw std::invalid_argument("eigen: sizes must be nonempty");
    Graph parent = build_reference_graph(cfg, nullptr);
    GnnWeights w = make_single_feature_weights(cfg, cfg.base_seed + 2);

    // fixed parent signals; subsampled graphs restrict them through the node map
    const int M = std::max(1, cfg.signal_count);
    Matrix parent_signals(parent.n, M);
    if (parent.has_latent()) {
        for (int i = 0; i < parent.n; ++i) {
            const double u = parent.latent[i];
            for (int s = 0; s < M; ++s) {
                const int wave = (s + 1) / 2;
                parent_signals(i, s) = s == 0 ? 1.0
                                      : (s % 2 ? std::cos(2.0 * M_PI * wave * u)
                                               : std::sin(2.0 * M_PI * wave * u));
            }
        }
    } else {
        std::mt19937_64 rng(cfg.base_seed + 3);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < parent.n; ++i)
            for (int s = 0; s < M; ++s) parent_signals(i, s) = gauss(rng);
    }
    auto signals_for = [&](const std::vector<int>& node_map) {
        std::vector<GraphSignal> out;
        for (int s = 0; s < M; ++s) {
            Matrix col(static_cast<int>(node_map.size()), 1);
            for (std::size_t i = 0; i < node_map.size(); ++i)
                col(static_cast<int>(i), 0) = parent_signals(node_map[i], s);
            out.emplace_back(std::move(col));
        }
        return out;
    };

    const int p = std::max(1, cfg.eig_index);
    std::vector<SpectrumRow> rows;
    for (int n : cfg.sizes) {
        std::vector<double> lambdas;
        std::vector<std::uint64_t> used;
        for (int s = 0; s < cfg.seeds; ++s) {
            const std::uint64_t seed = cfg.base_seed + 1000 * (s + 1) + n;
            auto [small, node_map] = subsample_nodes(parent, n, seed);
            BlockKernel bk = assemble_block_kernel(small, w, signals_for(node_map), false);
            lambdas.push_back(kernel_spectrum(bk, p).eigenvalues[p - 1]);
            used.push_back(seed);
        }
        const auto [lo, hi] = std::minmax_element(lambdas.begin(), lambdas.end());
        for (std::size_t s = 0; s < used.size(); ++s)
            rows.push_back(SpectrumRow{n, used[s], p, lambdas[s], *hi - *lo});
    }
    // reference row on the full parent graph
    std::vector<int> identity(parent.n);
    std::iota(identity.begin(), identity.end(), 0);
    BlockKernel ref = assemble_block_kernel(parent, w, signals_for(identity), false);
    rows.push_back(SpectrumRow{parent.n, cfg.base_seed, p,
                               kernel_spectrum(ref, p).eigenvalues[p - 1], 0.0});
    return rows;
}

std::vector<std::string> write_convergence_output(const ConvergenceOutput& out,
                                                  const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto dir = std::filesystem::path(cfg.out_dir);
    const std::string main_csv = (dir / "convergence.csv").string();
    {
        std::ofstream f(main_csv);
        f.precision(17);
        f << "n,seed,err_small,err_large,rel_diff\n";
        for (const auto& r : out.rows)
            f << r.n << ',' << r.seed << ',' << r.err_small << ',' << r.err_large << ','
              << r.rel_diff << '\n';
    }
    const std::string norm_csv = (dir / "operator_norm.csv").string();
    {
        std::ofstream f(norm_csv);
        f.precision(17);
        f << "n,seed,norm_diff\n";
        for (const auto& r : out.norms)
            f << r.n << ',' << r.seed << ',' << r.norm_diff << '\n';
    }
    write_manifest(cfg, {main_csv, norm_csv});
    return {main_csv, norm_csv};
}

std::vector<std::string> write_width_output(const std::vector<WidthRow>& rows,
                                            const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string csv = (std::filesystem::path(cfg.out_dir) / "width.csv").string();
    std::ofstream f(csv);
    f.precision(17);
    f << "F,init_seed,node_rank,proj_input,proj_gnn,proj_gntk,proj_target\n";
    for (const auto& r : rows)
        f << r.F << ',' << r.init_seed << ',' << r.node_rank << ',' << r.proj_input << ','
          << r.proj_gnn << ',' << r.proj_gntk << ',' << r.proj_target << '\n';
    write_manifest(cfg, {csv});
    return {csv};
}

std::vector<std::string> write_eigen_output(const std::vector<SpectrumRow>& rows,
                                            const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string csv = (std::filesystem::path(cfg.out_dir) / "spectrum.csv").string();
    save_spectrum_csv(rows, csv);
    write_manifest(cfg, {csv});
    return {csv};
}

}  // namespace gntk
