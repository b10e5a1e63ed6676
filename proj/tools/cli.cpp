// command line front end: every subcommand reads the shared config JSON and
// writes CSV plus a manifest into --out
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "gntk/experiments.hpp"
#include "gntk/kernel.hpp"
#include "gntk/spectral.hpp"

namespace fs = std::filesystem;
using namespace gntk;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::int64_t seed = -1;
    std::string out_dir;
    int threads = 1;
};

ExperimentConfig load_config(const GlobalOpts& g) {
    ExperimentConfig cfg;
    if (!g.config_path.empty()) cfg = ExperimentConfig::from_json_file(g.config_path);
    if (g.seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(g.seed);
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    cfg.threads = g.threads;
    fs::create_directories(cfg.out_dir);
    return cfg;
}

Graph make_graph(const ExperimentConfig& cfg, int n) {
    if (cfg.graph.type == "geometric") {
        const int k = std::max(1, static_cast<int>(std::lround(n * cfg.graph.knn_fraction)));
        return make_geometric_knn(n, cfg.graph.side, k, cfg.base_seed);
    }
    if (cfg.graph.type == "er") {
        return sample_graph(Graphon::constant(cfg.graph.er_p), n, SampleMode::stochastic,
                            cfg.base_seed);
    }
    if (cfg.graph.type == "edge_list") return load_edge_list(cfg.graph.path).graph;
    return make_sbm(n, cfg.graph.blocks, cfg.graph.p, cfg.graph.q, cfg.base_seed).first;
}

void write_signal_csv(const GraphSignal& s, const std::string& path) {
    std::ofstream out(path);
    out.precision(17);
    for (int i = 0; i < s.n(); ++i) {
        for (int f = 0; f < s.features(); ++f) {
            if (f) out << ',';
            out << s.values(i, f);
        }
        out << '\n';
    }
}

GraphSignal read_signal_csv(const std::string& path) {
    LoadedNodeTable t = load_node_table(path);
    return t.signal;
}

GnnWeights config_weights(const ExperimentConfig& cfg) {
    const Activation act = parse_activation(cfg.weights.activation);
    if (cfg.weights.width <= 1) {
        std::vector<int> taps(std::max(1, cfg.weights.L), cfg.weights.K);
        if (taps.size() > 1) taps.back() = 1;
        return GnnWeights::random_per_layer(std::vector<int>(taps.size() + 1, 1), taps, act,
                                            cfg.base_seed);
    }
    return GnnWeights::random_perceptron(cfg.weights.width, cfg.weights.K, act, cfg.base_seed);
}

int run_sample(const GlobalOpts& g, int n) {
    ExperimentConfig cfg = load_config(g);
    Graph graph = make_graph(cfg, n);
    const fs::path dir(cfg.out_dir);
    save_edge_list(graph, (dir / "graph.csv").string());
    if (graph.has_latent()) {
        std::ofstream lat(dir / "latent.csv");
        lat.precision(17);
        for (double u : graph.latent) lat << u << '\n';
    }
    std::cout << "wrote " << (dir / "graph.csv").string() << " (" << graph.n << " nodes)\n";
    return 0;
}

int run_opinion(const GlobalOpts& g, int n, const std::string& init_path) {
    ExperimentConfig cfg = load_config(g);
    Graph graph = make_graph(cfg, n);
    GraphSignal x0;
    if (!init_path.empty()) {
        x0 = read_signal_csv(init_path);
    } else {
        std::mt19937_64 rng(cfg.base_seed + 1);
        std::normal_distribution<double> gauss(cfg.opinion.init_mean,
                                               std::sqrt(cfg.opinion.init_variance));
        Matrix v(graph.n, 1);
        for (int i = 0; i < graph.n; ++i) v(i, 0) = gauss(rng);
        x0 = GraphSignal(std::move(v));
    }
    OpinionResult r = opinion_dynamics(graph, x0, cfg.opinion);
    const fs::path out = fs::path(cfg.out_dir) / "opinions.csv";
    write_signal_csv(r.opinions, out.string());
    std::cout << "converged in " << r.steps_used << " steps, wrote " << out.string() << '\n';
    return 0;
}

int run_gntk(const GlobalOpts& g, int n, const std::string& signal_path) {
    ExperimentConfig cfg = load_config(g);
    Graph graph = make_graph(cfg, n);
    GraphSignal x;
    if (!signal_path.empty()) {
        x = read_signal_csv(signal_path);
    } else {
        std::mt19937_64 rng(cfg.base_seed + 1);
        std::normal_distribution<double> gauss;
        Matrix v(graph.n, 1);
        for (int i = 0; i < graph.n; ++i) v(i, 0) = gauss(rng);
        x = GraphSignal(std::move(v));
    }
    GnnWeights w = config_weights(cfg);
    KernelBlock block = gntk::gntk(graph, w, x, x);
    block.meta.graph_id = cfg.graph.type;
    block.meta.signal_a = signal_path.empty() ? "gaussian" : signal_path;
    block.meta.signal_b = block.meta.signal_a;
    const fs::path out = fs::path(cfg.out_dir) / "kernel.csv";
    save_kernel_csv(block, out.string());
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

int run_fit(const GlobalOpts& g, const std::string& kernel_path,
            const std::string& target_path) {
    ExperimentConfig cfg = load_config(g);
    KernelBlock block = load_kernel_csv(kernel_path);
    LoadedNodeTable targets = load_node_table(target_path);
    double lambda = cfg.regression.lambda;
    if (lambda < 0.0) lambda = 1e-3 * block.dense().trace() / block.n;
    RegressionModel model;
    if (cfg.regression.task == "ce-logistic") {
        if (targets.labels.empty())
            throw std::runtime_error("fit: logistic task needs a label column");
        model = fit_logistic(block.dense(), targets.labels, lambda);
    } else {
        model = fit_ridge(block.dense(), targets.signal.values.col(0), lambda);
    }
    const fs::path out = fs::path(cfg.out_dir) / "model.json";
    save_model_json(model, out.string());
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

int run_transfer(const GlobalOpts& g, int n) {
    ExperimentConfig cfg = load_config(g);
    cfg.kind = "convergence";
    if (cfg.sizes.empty()) cfg.sizes = {n};
    ConvergenceOutput out = run_convergence_experiment(cfg);
    auto paths = write_convergence_output(out, cfg);
    for (const auto& p : paths) std::cout << "wrote " << p << '\n';
    return 0;
}

int run_spectrum(const GlobalOpts& g) {
    ExperimentConfig cfg = load_config(g);
    cfg.kind = "eigen";
    auto rows = run_eigen_experiment(cfg);
    auto paths = write_eigen_output(rows, cfg);
    for (const auto& p : paths) std::cout << "wrote " << p << '\n';
    return 0;
}

int run_experiment(const GlobalOpts& g, const std::string& kind) {
    ExperimentConfig cfg = load_config(g);
    cfg.kind = kind;
    std::vector<std::string> paths;
    if (kind == "convergence") {
        paths = write_convergence_output(run_convergence_experiment(cfg), cfg);
    } else if (kind == "width") {
        paths = write_width_output(run_width_experiment(cfg), cfg);
    } else {
        paths = write_eigen_output(run_eigen_experiment(cfg), cfg);
    }
    for (const auto& p : paths) std::cout << "wrote " << p << '\n';
    return 0;
}

int run_bound(const GlobalOpts& g, BoundInputs b) {
    ExperimentConfig cfg = load_config(g);
    const double value = sampled_bound(b);
    const fs::path out = fs::path(cfg.out_dir) / "bound.csv";
    std::ofstream f(out);
    f.precision(17);
    f << "C,A_w,A_x,n,K,L,bound\n"
      << b.C << ',' << b.A_w << ',' << b.A_x << ',' << b.n << ',' << b.K << ',' << b.L << ','
      << value << '\n';
    std::cout << value << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph neural tangent kernel toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "experiment config JSON");
    app.add_option("--seed", g.seed, "override base seed");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--threads", g.threads, "worker threads (1 = deterministic)");

    int n = 100;
    std::string signal_path, kernel_path, target_path;

    auto* sample = app.add_subcommand("sample", "sample a graph and write its edge list");
    sample->add_option("-n,--nodes", n, "graph size");

    auto* opinion = app.add_subcommand("opinion", "run bounded-confidence opinion dynamics");
    opinion->add_option("-n,--nodes", n, "graph size");
    opinion->add_option("--init", signal_path, "initial opinions CSV (id,value)");

    auto* kern = app.add_subcommand("gntk", "compute the analytic kernel for one signal");
    kern->add_option("-n,--nodes", n, "graph size");
    kern->add_option("--signal", signal_path, "signal CSV (id,value)");

    auto* fit = app.add_subcommand("fit", "fit a kernel regression model");
    fit->add_option("--kernel", kernel_path, "kernel CSV")->required();
    fit->add_option("--targets", target_path, "targets CSV (id,value[,label])")->required();

    auto* transfer = app.add_subcommand("transfer", "small-to-large transfer evaluation");
    transfer->add_option("-n,--nodes", n, "small graph size");

    auto* spectrum = app.add_subcommand("spectrum", "kernel eigenvalue convergence curve");

    auto* experiment = app.add_subcommand("experiment", "run a full experiment driver");
    experiment->require_subcommand(1);
    auto* exp_conv = experiment->add_subcommand("convergence", "transfer error vs graph size");
    auto* exp_width = experiment->add_subcommand("width", "GNN vs NTK across widths");
    auto* exp_eigen = experiment->add_subcommand("eigen", "leading eigenvalue vs graph size");

    BoundInputs b;
    auto* bound = app.add_subcommand("bound", "evaluate the sampled-graph kernel bound");
    bound->add_option("--C", b.C, "constant factor");
    bound->add_option("--Aw", b.A_w, "graphon Lipschitz constant");
    bound->add_option("--Ax", b.A_x, "signal Lipschitz constant");
    bound->add_option("-n,--nodes", b.n, "graph size");
    bound->add_option("--K", b.K, "filter taps");
    bound->add_option("--L", b.L, "layers");

    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
        for (auto* nested : sub->get_subcommands({})) nested->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sample) return run_sample(g, n);
        if (*opinion) return run_opinion(g, n, signal_path);
        if (*kern) return run_gntk(g, n, signal_path);
        if (*fit) return run_fit(g, kernel_path, target_path);
        if (*transfer) return run_transfer(g, n);
        if (*spectrum) return run_spectrum(g);
        if (*experiment) {
            if (*exp_conv) return run_experiment(g, "convergence");
            if (*exp_width) return run_experiment(g, "width");
            if (*exp_eigen) return run_experiment(g, "eigen");
        }
        if (*bound) return run_bound(g, b);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
