#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <random>

#include "doctest.h"
#include "gntk/kernel.hpp"
#include "gntk/linalg.hpp"

using namespace gntk;

namespace {

Graph random_graph(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) w(i, j) = w(j, i) = unif(rng);
    return graph_from_weights(w);
}

GraphSignal random_signal(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Matrix m(n, 1);
    for (int i = 0; i < n; ++i) m(i, 0) = gauss(rng);
    return GraphSignal(std::move(m));
}

double rel_frob(const Matrix& a, const Matrix& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-30);
}

}  // namespace

TEST_CASE("gntk single linear layer is the outer product") {
    Graph g = random_graph(5, 1);
    GnnWeights w;
    w.activation = Activation::linear;
    w.taps = {{Matrix::Constant(1, 1, 0.7)}};
    GraphSignal x = random_signal(5, 2), x2 = random_signal(5, 3);
    KernelBlock k = gntk::gntk(g, w, x, x2);
    Matrix expected = x.values * x2.values.transpose();
    CHECK(rel_frob(k.dense(), expected) < 1e-12);
}

TEST_CASE("gntk on the empty graph ignores higher taps") {
    Graph g;
    g.n = 4;
    g.adj = Matrix::Zero(4, 4);
    GnnWeights w = GnnWeights::random_single_feature(1, 3, Activation::linear, 4);
    GraphSignal x = random_signal(4, 5), x2 = random_signal(4, 6);
    KernelBlock k = gntk::gntk(g, w, x, x2);
    // only the k = 0 column survives: A^k x vanishes for k >= 1
    Matrix expected = x.values * x2.values.transpose();
    CHECK(rel_frob(k.dense(), expected) < 1e-12);
}

TEST_CASE("gntk matches the Jacobian Gram kernel") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 5);
        const int L = 1 + static_cast<int>(rng() % 3);
        const int K = 1 + static_cast<int>(rng() % 3);
        Graph g = random_graph(n, rng());
        GnnWeights w = GnnWeights::random_single_feature(L, K, Activation::tanh, rng());
        GraphSignal x = random_signal(n, rng());
        GraphSignal x2 = random_signal(n, rng());
        KernelBlock k = gntk::gntk(g, w, x, x2);
        Matrix ref = empirical_ntk(g, w, x, x2);
        CHECK(rel_frob(k.dense(), ref) < 1e-8);
    }
}

TEST_CASE("gntk is symmetric PSD and transposes across argument swap") {
    Graph g = random_graph(8, 8);
    GnnWeights w = GnnWeights::random_single_feature(2, 2, Activation::relu, 9);
    GraphSignal x = random_signal(8, 10), x2 = random_signal(8, 11);
    KernelBlock kxx = gntk::gntk(g, w, x, x);
    CHECK((kxx.dense() - kxx.dense().transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(kxx.dense());
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * kxx.dense().trace());
    KernelBlock kab = gntk::gntk(g, w, x, x2);
    KernelBlock kba = gntk::gntk(g, w, x2, x);
    CHECK(rel_frob(kab.dense(), kba.dense().transpose()) < 1e-12);
}

TEST_CASE("gntk is equivariant under node relabeling") {
    const int n = 6;
    Graph g = random_graph(n, 12);
    GnnWeights w = GnnWeights::random_single_feature(2, 2, Activation::tanh, 13);
    GraphSignal x = random_signal(n, 14), x2 = random_signal(n, 15);
    std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    Graph pg;
    pg.n = n;
    pg.adj.resize(n, n);
    Matrix px(n, 1), px2(n, 1);
    for (int i = 0; i < n; ++i) {
        px(i, 0) = x.values(perm[i], 0);
        px2(i, 0) = x2.values(perm[i], 0);
        for (int j = 0; j < n; ++j) pg.adj(i, j) = g.adj(perm[i], perm[j]);
    }
    Matrix base = gntk::gntk(g, w, x, x2).dense();
    Matrix permuted = gntk::gntk(pg, w, GraphSignal(px), GraphSignal(px2)).dense();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(permuted(i, j) - base(perm[i], perm[j])));
    CHECK(worst < 1e-12);
}

TEST_CASE("gntk rejects multi-feature weights") {
    Graph g = random_graph(4, 16);
    GnnWeights w = GnnWeights::random({1, 3, 1}, 2, Activation::tanh, 17);
    GraphSignal x = random_signal(4, 18);
    CHECK_THROWS(gntk::gntk(g, w, x, x));
}

TEST_CASE("gntk_cross equals slices of the full kernel") {
    Graph g = random_graph(10, 19);
    GnnWeights w = GnnWeights::random_single_feature(2, 2, Activation::tanh, 20);
    GraphSignal x = random_signal(10, 21), x2 = random_signal(10, 22);
    Matrix full = gntk::gntk(g, w, x, x2).dense();

    std::vector<int> all(10);
    std::iota(all.begin(), all.end(), 0);
    CHECK(rel_frob(gntk_cross(g, w, x, x2, all, all), full) < 1e-14);

    Matrix single = gntk_cross(g, w, x, x2, {7}, {2});
    CHECK(single(0, 0) == doctest::Approx(full(7, 2)).epsilon(1e-12));

    std::vector<int> rows = {1, 4, 8}, cols = {0, 3, 5, 9};
    Matrix sub = gntk_cross(g, w, x, x2, rows, cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            CHECK(sub(i, j) == doctest::Approx(full(rows[i], cols[j])).epsilon(1e-12));

    CHECK_THROWS(gntk_cross(g, w, x, x2, {10}, {0}));
}

TEST_CASE("wntk_reference zero graphon with linear weights") {
    GnnWeights w;
    w.activation = Activation::linear;
    w.taps = {{Matrix::Constant(1, 1, 1.0)}};
    GraphonSignal X = GraphonSignal::analytic([](double u) { return u; });
    GraphonSignal X2 = GraphonSignal::analytic([](double u) { return 1.0 - u; });
    const int m = 6;
    KernelBlock k = wntk_reference(Graphon::constant(0.0), w, X, X2, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double u = (i + 0.5) / m, v = (j + 0.5) / m;
            CHECK(k.dense()(i, j) == doctest::Approx(u * (1.0 - v)).epsilon(1e-12));
        }
}

TEST_CASE("wntk_reference at native resolution is the graph kernel") {
    Graph g = random_graph(7, 23);
    GnnWeights w = GnnWeights::random_single_feature(2, 2, Activation::tanh, 24);
    GraphSignal x = random_signal(7, 25);
    KernelBlock direct = gntk::gntk(g, w, x, x);
    KernelBlock viaw = wntk_reference(induce_graphon(g), w, induce_signal(x),
                                      induce_signal(x), 7);
    CHECK(rel_frob(viaw.dense(), direct.dense()) < 1e-12);
}

TEST_CASE("wntk_reference self-converges as the grid refines") {
    Matrix blocks(2, 2);
    blocks << 0.6, 0.2, 0.2, 0.6;
    Graphon w = Graphon::sbm({0.5, 1.0}, blocks);
    GnnWeights weights = GnnWeights::random_single_feature(2, 2, Activation::tanh, 26);
    GraphonSignal X = GraphonSignal::analytic([](double u) { return std::sin(6.28 * u); });
    std::vector<double> diffs;
    int prev_m = 0;
    KernelBlock prev;
    for (int m : {200, 400, 800}) {
        KernelBlock cur = wntk_reference(w, weights, X, X, m);
        if (prev_m > 0) {
            KernelBlock up = upsample_block(prev, m);
            diffs.push_back(operator_norm_diff(up, cur));
        }
        prev = std::move(cur);
        prev_m = m;
    }
    CHECK(diffs[0] >= 1.5 * diffs[1]);
}

TEST_CASE("assemble_block_kernel matches pairwise kernels") {
    Graph g = random_graph(6, 27);
    GnnWeights w = GnnWeights::random_single_feature(2, 2, Activation::tanh, 28);
    std::vector<GraphSignal> signals = {random_signal(6, 29), random_signal(6, 30),
                                        random_signal(6, 31)};
    BlockKernel bk = assemble_block_kernel(g, w, signals);
    CHECK(bk.M == 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Matrix ref = gntk::gntk(g, w, signals[i], signals[j]).dense();
            CHECK(rel_frob(bk.block(i, j), ref) < 1e-12);
        }
    Matrix full = bk.full();
    CHECK((full - full.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(full);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * full.trace());

    BlockKernel one = assemble_block_kernel(g, w, {signals[0]});
    CHECK(rel_frob(one.block(0, 0), gntk::gntk(g, w, signals[0], signals[0]).dense()) < 1e-12);

    BlockKernel dup = assemble_block_kernel(g, w, {signals[0], signals[0]});
    CHECK(rel_frob(dup.block(0, 1), dup.block(0, 0)) < 1e-12);
    CHECK(rel_frob(dup.block(1, 1), dup.block(0, 0)) < 1e-12);

    CHECK_THROWS(assemble_block_kernel(g, w, {}));
}

TEST_CASE("operator_norm_diff base cases") {
    Graph g = random_graph(5, 32);
    GnnWeights w = GnnWeights::random_single_feature(1, 2, Activation::tanh, 33);
    GraphSignal x = random_signal(5, 34);
    KernelBlock a = gntk::gntk(g, w, x, x);
    KernelBlock b = gntk::gntk(g, w, x, x);
    CHECK(operator_norm_diff(a, b) == doctest::Approx(0.0));

    const int m = 12;
    KernelBlock ca, cb;
    ca.n = cb.n = m;
    ca.values = Matrix::Constant(m, m, 0.8);
    cb.values = Matrix::Constant(m, m, 0.5);
    CHECK(operator_norm_diff(ca, cb) == doctest::Approx(0.3));
}

TEST_CASE("rank-one kernel difference has a product operator norm") {
    const int m = 40;
    std::mt19937_64 rng(35);
    std::normal_distribution<double> gauss;
    Vector p(m), q(m);
    for (int i = 0; i < m; ++i) {
        p(i) = gauss(rng);
        q(i) = gauss(rng);
    }
    KernelBlock a, b;
    a.n = b.n = m;
    a.values = p * q.transpose();
    b.values = Matrix::Zero(m, m);
    const double l2p = p.norm() / std::sqrt(m), l2q = q.norm() / std::sqrt(m);
    CHECK(operator_norm_diff(a, b) == doctest::Approx(l2p * l2q).epsilon(1e-10));
}

TEST_CASE("factored and dense operator norms agree") {
    Graph g = random_graph(30, 36);
    GnnWeights w = GnnWeights::random_single_feature(2, 2, Activation::tanh, 37);
    GraphSignal x = random_signal(30, 38), x2 = random_signal(30, 39);
    KernelBlock a = gntk::gntk(g, w, x, x);
    KernelBlock b = gntk::gntk(g, w, x2, x2);
    const double fast = operator_norm_diff(a, b);
    KernelBlock ad, bd;
    ad.n = bd.n = 30;
    ad.values = a.dense();
    bd.values = b.dense();
    CHECK(fast == doctest::Approx(operator_norm_diff(ad, bd)).epsilon(1e-10));
}

TEST_CASE("upsample_block replication and norm preservation") {
    KernelBlock single;
    single.n = 1;
    single.values = Matrix::Constant(1, 1, 2.0);
    KernelBlock rep = upsample_block(single, 3);
    CHECK(rep.values.rows() == 3);
    CHECK((rep.values.array() - 2.0).abs().maxCoeff() == 0.0);

    Graph g = random_graph(4, 40);
    GnnWeights w = GnnWeights::random_single_feature(2, 2, Activation::tanh, 41);
    GraphSignal x = random_signal(4, 42);
    KernelBlock a = gntk::gntk(g, w, x, x);
    KernelBlock zero4, zero8;
    zero4.n = 4;
    zero4.values = Matrix::Zero(4, 4);
    zero8.n = 8;
    zero8.values = Matrix::Zero(8, 8);
    const double before = operator_norm_diff(a, zero4);
    KernelBlock up = upsample_block(a, 8);
    CHECK(operator_norm_diff(up, zero8) == doctest::Approx(before).epsilon(1e-12));

    KernelBlock same = upsample_block(a, 4);
    CHECK((same.dense() - a.dense()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS(upsample_block(a, 6));
}

TEST_CASE("bound_evaluate arithmetic") {
    CHECK(bound_evaluate(2.0, 3, 2, 0.0, 0.0) == doctest::Approx(0.0));
    CHECK(bound_evaluate(1.0, 2, 1, 0.1, 0.01) == doctest::Approx(3.28));
    CHECK_THROWS(bound_evaluate(-1.0, 2, 1, 0.1, 0.1));
}

TEST_CASE("calibrated bound dominates observed differences as n grows") {
    Matrix blocks(2, 2);
    blocks << 0.6, 0.2, 0.2, 0.6;
    Graphon w = Graphon::sbm({0.5, 1.0}, blocks);
    GnnWeights weights = GnnWeights::random_single_feature(2, 2, Activation::tanh, 43);
    GraphonSignal X = GraphonSignal::step((Matrix(2, 1) << 1.0, -1.0).finished());
    const int m = 240;
    KernelBlock ref = wntk_reference(w, weights, X, X, m);

    auto diff_at = [&](int n) {
        Graph g = sample_graph(w, n, SampleMode::template_grid, 0);
        GraphSignal x(X.discretize(n));
        KernelBlock kn = gntk::gntk(g, weights, x, x);
        KernelBlock up = upsample_block(kn, m);
        return operator_norm_diff(up, ref);
    };
    const double base = diff_at(20);
    // calibrate C on the smallest size (with headroom for the finite-size
    // deviation from the exact 1/n rate), then check the decay structure
    const double C = 1.2 * base / bound_evaluate(1.0, 2, 2, 2.0 / 20, 1.0 / 20);
    for (int n : {40, 60, 80, 120}) {
        CHECK(diff_at(n) <= C * bound_evaluate(1.0, 2, 2, 2.0 / n, 1.0 / n) + 1e-10);
    }
}

TEST_CASE("kernel CSV round trip with sidecar metadata") {
    Graph g = random_graph(5, 44);
    GnnWeights w = GnnWeights::random_single_feature(2, 2, Activation::tanh, 45);
    GraphSignal x = random_signal(5, 46);
    KernelBlock k = gntk::gntk(g, w, x, x);
    k.meta.signal_a = "a";
    k.meta.signal_b = "a";
    k.meta.graph_id = "test-graph";
    const std::string path = "kernel_io_test.csv";
    save_kernel_csv(k, path);
    KernelBlock r = load_kernel_csv(path);
    CHECK(r.n == 5);
    CHECK((r.values - k.dense()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(r.meta.graph_id == "test-graph");
    std::remove(path.c_str());
    std::remove((path + ".meta.json").c_str());
}
