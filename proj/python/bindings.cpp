#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gntk/experiments.hpp"
#include "gntk/kernel.hpp"
#include "gntk/spectral.hpp"

namespace py = pybind11;
using namespace gntk;

namespace {

std::vector<GraphSignal> to_signals(const std::vector<Matrix>& values) {
    std::vector<GraphSignal> out;
    out.reserve(values.size());
    for (const auto& v : values) out.emplace_back(v);
    return out;
}

}  // namespace

PYBIND11_MODULE(_gntk, m) {
    m.doc() = "graph neural tangent kernels, graphon limits, and transfer experiments";

    py::class_<Graph>(m, "Graph")
        .def(py::init<>())
        .def_readwrite("n", &Graph::n)
        .def_readwrite("adj", &Graph::adj)
        .def_readwrite("latent", &Graph::latent)
        .def_readwrite("labels", &Graph::labels)
        .def("validate", &Graph::validate)
        .def("weight", &Graph::weight);

    m.def("graph_from_weights", &graph_from_weights, py::arg("weights"));

    py::enum_<Activation>(m, "Activation")
        .value("relu", Activation::relu)
        .value("tanh", Activation::tanh)
        .value("linear", Activation::linear);

    py::class_<GnnWeights>(m, "GnnWeights")
        .def_readwrite("taps", &GnnWeights::taps)
        .def_readwrite("activation", &GnnWeights::activation)
        .def("layers", &GnnWeights::layers)
        .def("parameter_count", &GnnWeights::parameter_count)
        .def_static("random", &GnnWeights::random, py::arg("widths"), py::arg("K"),
                    py::arg("activation"), py::arg("seed"))
        .def_static("random_perceptron", &GnnWeights::random_perceptron, py::arg("F"),
                    py::arg("K"), py::arg("activation"), py::arg("seed"))
        .def_static("random_single_feature", &GnnWeights::random_single_feature, py::arg("L"),
                    py::arg("K"), py::arg("activation"), py::arg("seed"));

    py::enum_<SampleMode>(m, "SampleMode")
        .value("stochastic", SampleMode::stochastic)
        .value("weighted", SampleMode::weighted)
        .value("template_grid", SampleMode::template_grid);

    py::class_<Graphon>(m, "Graphon")
        .def_static("constant", &Graphon::constant, py::arg("p"))
        .def_static("sbm", &Graphon::sbm, py::arg("boundaries"), py::arg("values"))
        .def("__call__", &Graphon::operator(), py::arg("u"), py::arg("v"))
        .def("discretize", &Graphon::discretize, py::arg("m"));

    m.def("sample_graph", &sample_graph, py::arg("w"), py::arg("n"),
          py::arg("mode") = SampleMode::stochastic, py::arg("seed") = 0,
          py::arg("bernoulli_diagonal") = false);
    m.def("graphon_l2_distance", &graphon_l2_distance, py::arg("a"), py::arg("b"),
          py::arg("m"));

    m.def(
        "gnn_forward",
        [](const Graph& g, const Matrix& x, const GnnWeights& w) {
            return gnn_forward(g, GraphSignal(x), w).values;
        },
        py::arg("graph"), py::arg("signal"), py::arg("weights"));

    m.def(
        "gntk",
        [](const Graph& g, const GnnWeights& w, const Matrix& x, const Matrix& x2) {
            GraphSignal a(x), b(x2);
            KernelBlock block = gntk::gntk(g, w, a, b);
            return block.dense();
        },
        py::arg("graph"), py::arg("weights"), py::arg("signal_a"), py::arg("signal_b"));

    m.def(
        "empirical_ntk",
        [](const Graph& g, const GnnWeights& w, const Matrix& x, const Matrix& x2) {
            return empirical_ntk(g, w, GraphSignal(x), GraphSignal(x2));
        },
        py::arg("graph"), py::arg("weights"), py::arg("signal_a"), py::arg("signal_b"));

    m.def(
        "kernel_spectrum",
        [](const Graph& g, const GnnWeights& w, const std::vector<Matrix>& signals, int top) {
            BlockKernel bk = assemble_block_kernel(g, w, to_signals(signals), false);
            return kernel_spectrum(bk, top).eigenvalues;
        },
        py::arg("graph"), py::arg("weights"), py::arg("signals"), py::arg("top"));

    m.def(
        "fit_ridge",
        [](const Matrix& K, const Vector& y, double lam) {
            return fit_ridge(K, y, lam).alpha;
        },
        py::arg("kernel"), py::arg("targets"), py::arg("lambda"));

    m.def("bound_evaluate", &bound_evaluate, py::arg("C"), py::arg("K"), py::arg("L"),
          py::arg("dW"), py::arg("dX"));

    py::class_<OpinionConfig>(m, "OpinionConfig")
        .def(py::init<>())
        .def_readwrite("epsilon", &OpinionConfig::epsilon)
        .def_readwrite("c", &OpinionConfig::c)
        .def_readwrite("t_max", &OpinionConfig::t_max)
        .def_readwrite("include_self", &OpinionConfig::include_self)
        .def_readwrite("normalize_by_set_size", &OpinionConfig::normalize_by_set_size);

    m.def(
        "opinion_dynamics",
        [](const Graph& g, const Matrix& x0, const OpinionConfig& cfg) {
            OpinionResult r = opinion_dynamics(g, GraphSignal(x0), cfg);
            return py::make_tuple(r.opinions.values, r.steps_used);
        },
        py::arg("graph"), py::arg("x0"), py::arg("config") = OpinionConfig{});

    m.def(
        "make_sbm",
        [](int n, int blocks, double p, double q, std::uint64_t seed) {
            return make_sbm(n, blocks, p, q, seed).first;
        },
        py::arg("n"), py::arg("blocks"), py::arg("p"), py::arg("q"), py::arg("seed"));
    m.def("make_geometric_knn", &make_geometric_knn, py::arg("n"), py::arg("square_side"),
          py::arg("k"), py::arg("seed"));
    m.def("subsample_nodes", &subsample_nodes, py::arg("graph"), py::arg("n"), py::arg("seed"));
    m.def(
        "sampled_bound",
        [](double C, double A_w, double A_x, int n, int K, int L) {
            return sampled_bound(BoundInputs{C, A_w, A_x, n, K, L});
        },
        py::arg("C"), py::arg("A_w"), py::arg("A_x"), py::arg("n"), py::arg("K"), py::arg("L"));
}
