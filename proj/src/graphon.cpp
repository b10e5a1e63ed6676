#include "gntk/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gntk/linalg.hpp"

namespace gntk {

Graphon Graphon::constant(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("Graphon::constant: value outside [0,1]");
    Graphon w;
    w.kind_ = Kind::constant;
    w.value_ = p;
    return w;
}

Graphon Graphon::sbm(std::vector<double> boundaries, Matrix block_values) {
    const int b = static_cast<int>(boundaries.size());
    if (b < 1 || block_values.rows() != b || block_values.cols() != b)
        throw std::invalid_argument("Graphon::sbm: boundary/value shape mismatch");
    if (std::abs(boundaries.back() - 1.0) > 1e-12)
        throw std::invalid_argument("Graphon::sbm: last boundary must be 1");
    for (int i = 1; i < b; ++i)
        if (boundaries[i] <= boundaries[i - 1])
            throw std::invalid_argument("Graphon::sbm: boundaries must be ascending");
    if ((block_values - block_values.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("Graphon::sbm: block values must be symmetric");
    if (block_values.minCoeff() < 0.0 || block_values.maxCoeff() > 1.0)
        throw std::invalid_argument("Graphon::sbm: block values outside [0,1]");
    Graphon w;
    w.kind_ = Kind::sbm;
    w.boundaries_ = std::move(boundaries);
    w.values_ = std::move(block_values);
    return w;
}

Graphon Graphon::grid(Matrix values) {
    if (values.rows() != values.cols() || values.rows() < 1)
        throw std::invalid_argument("Graphon::grid: matrix must be square and nonempty");
    Graphon w;
    w.kind_ = Kind::grid;
    w.values_ = std::move(values);
    return w;
}

Graphon Graphon::induced(const Graph& g) {
    Graphon w;
    w.kind_ = Kind::induced;
    w.values_ = g.adj * static_cast<double>(g.n);  // unnormalized weights
    return w;
}

namespace {

int cell_index(double u, int m) {
    int i = static_cast<int>(u * m);
    return std::clamp(i, 0, m - 1);
}

}  // namespace

double Graphon::operator()(double u, double v) const {
    switch (kind_) {
        case Kind::constant: return value_;
        case Kind::sbm: {
            auto block = [this](double t) {
                auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), t);
                if (it == boundaries_.end()) --it;
                return static_cast<int>(it - boundaries_.begin());
            };
            return values_(block(u), block(v));
        }
        case Kind::grid:
        case Kind::induced: {
            const int m = static_cast<int>(values_.rows());
            return values_(cell_index(u, m), cell_index(v, m));
        }
    }
    return 0.0;
}

int Graphon::native_resolution() const {
    if (kind_ == Kind::grid || kind_ == Kind::induced)
        return static_cast<int>(values_.rows());
    return 0;
}

Matrix Graphon::discretize(int m) const {
    if (m < 1) throw std::invalid_argument("Graphon::discretize: resolution must be >= 1");
    if (m == native_resolution()) return values_;
    Matrix out(m, m);
    for (int i = 0; i < m; ++i) {
        const double ui = (i + 0.5) / m;
        for (int j = i; j < m; ++j) {
            const double v = (*this)(ui, (j + 0.5) / m);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

GraphonSignal GraphonSignal::analytic(std::function<double(double)> f) {
    GraphonSignal s;
    s.analytic_ = [f = std::move(f)](double u) {
        Vector v(1);
        v(0) = f(u);
        return v;
    };
    s.features_ = 1;
    return s;
}

GraphonSignal GraphonSignal::analytic_multi(std::function<Vector(double)> f, int features) {
    if (features < 1) throw std::invalid_argument("GraphonSignal: features must be >= 1");
    GraphonSignal s;
    s.analytic_ = std::move(f);
    s.features_ = features;
    return s;
}

GraphonSignal GraphonSignal::step(Matrix values) {
    if (values.rows() < 1) throw std::invalid_argument("GraphonSignal::step: empty values");
    if (!values.allFinite()) throw std::invalid_argument("GraphonSignal::step: non-finite values");
    GraphonSignal s;
    s.features_ = static_cast<int>(values.cols());
    s.values_ = std::move(values);
    return s;
}

Vector GraphonSignal::operator()(double u) const {
    if (analytic_) return analytic_(u);
    const int m = static_cast<int>(values_.rows());
    return values_.row(cell_index(u, m)).transpose();
}

int GraphonSignal::native_resolution() const {
    return is_step() ? static_cast<int>(values_.rows()) : 0;
}

Matrix GraphonSignal::discretize(int m) const {
    if (m < 1) throw std::invalid_argument("GraphonSignal::discretize: resolution must be >= 1");
    if (m == native_resolution()) return values_;
    Matrix out(m, features_);
    for (int i = 0; i < m; ++i) out.row(i) = (*this)((i + 0.5) / m).transpose();
    return out;
}

Graph sample_graph(const Graphon& w, int n, SampleMode mode, std::uint64_t seed,
                   bool bernoulli_diagonal) {
    if (n < 1) throw std::invalid_argument("sample_graph: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> u(n);
    if (mode == SampleMode::template_grid) {
        for (int i = 0; i < n; ++i) u[i] = (i + 0.5) / n;
    } else {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int i = 0; i < n; ++i) u[i] = unif(rng);
        std::sort(u.begin(), u.end());
    }
    Matrix weights = Matrix::Zero(n, n);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double p = w(u[i], u[j]);
            double value = p;
            if (mode == SampleMode::stochastic) value = coin(rng) < p ? 1.0 : 0.0;
            weights(i, j) = value;
            weights(j, i) = value;
        }
        if (bernoulli_diagonal && mode == SampleMode::stochastic)
            weights(i, i) = coin(rng) < w(u[i], u[i]) ? 1.0 : 0.0;
    }
    Graph g = graph_from_weights(weights);
    g.latent = std::move(u);
    return g;
}

Graphon induce_graphon(const Graph& g) { return Graphon::induced(g); }

GraphonSignal induce_signal(const GraphSignal& x) { return GraphonSignal::step(x.values); }

GraphSignal sample_signal(const GraphonSignal& X, const std::vector<double>& latent) {
    if (latent.empty()) throw std::invalid_argument("sample_signal: latent positions missing");
    Matrix out(static_cast<int>(latent.size()), X.features());
    for (std::size_t i = 0; i < latent.size(); ++i)
        out.row(static_cast<int>(i)) = X(latent[i]).transpose();
    return GraphSignal(std::move(out));
}

GraphonSignal apply_operator(const Graphon& w, const GraphonSignal& X, int k, int m) {
    if (k < 0) throw std::invalid_argument("apply_operator: k must be >= 0");
    Matrix values = X.discretize(m);
    if (k > 0) {
        const Matrix grid = w.discretize(m) / static_cast<double>(m);
        for (int i = 0; i < k; ++i) values = grid * values;
    }
    return GraphonSignal::step(std::move(values));
}

double graphon_l2_distance(const Graphon& a, const Graphon& b, int m) {
    if (m < 1) throw std::invalid_argument("graphon_l2_distance: resolution must be >= 1");
    return (a.discretize(m) - b.discretize(m)).norm() / m;
}

double signal_l2_distance(const GraphonSignal& a, const GraphonSignal& b, int m) {
    if (m < 1) throw std::invalid_argument("signal_l2_distance: resolution must be >= 1");
    if (a.features() != b.features())
        throw std::invalid_argument("signal_l2_distance: feature mismatch");
    return (a.discretize(m) - b.discretize(m)).norm() / std::sqrt(static_cast<double>(m));
}

double operator_iterate_norm_diff(const Graphon& a, const Graphon& b, int k, int m) {
    if (k < 1) throw std::invalid_argument("operator_iterate_norm_diff: k must be >= 1");
    Matrix ta = a.discretize(m) / static_cast<double>(m);
    Matrix tb = b.discretize(m) / static_cast<double>(m);
    Matrix pa = ta, pb = tb;
    for (int i = 1; i < k; ++i) {
        pa = ta * pa;
        pb = tb * pb;
    }
    return spectral_norm(pa - pb);
}

void save_grid_csv(const Graphon& w, int m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_grid_csv: cannot open " + path);
    const Matrix grid = w.discretize(m);
    out.precision(17);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (j) out << ',';
            out << grid(i, j);
        }
        out << '\n';
    }
}

Graphon load_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_grid_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("load_grid_csv: parse error at line " +
                                         std::to_string(lineno));
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_grid_csv: empty file");
    const int m = static_cast<int>(rows.size());
    Matrix values(m, m);
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(rows[i].size()) != m)
            throw std::runtime_error("load_grid_csv: grid is not square at line " +
                                     std::to_string(i + 1));
        for (int j = 0; j < m; ++j) values(i, j) = rows[i][j];
    }
    return Graphon::grid(std::move(values));
}

}  // namespace gntk
