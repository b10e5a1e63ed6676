#include "gntk/spectral.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "gntk/linalg.hpp"

namespace gntk {

namespace {

// Descending operator eigenvalues (matrix eigenvalues / n). Factor-backed
// kernels use the Gram of the thin factor stack; the rest of the spectrum is
// exactly zero.
std::vector<double> operator_eigenvalues(const BlockKernel& bk) {
    std::vector<double> vals;
    if (bk.factors) {
        Matrix gram = bk.factors->transpose() * (*bk.factors);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
        for (int i = static_cast<int>(gram.rows()) - 1; i >= 0; --i)
            vals.push_back(solver.eigenvalues()(i) / bk.n);
        vals.resize(bk.dim(), 0.0);
        std::sort(vals.begin(), vals.end(), std::greater<>());
    } else {
        Matrix full = bk.full();
        const double scale = std::max(1.0, full.cwiseAbs().maxCoeff());
        if ((full - full.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
            throw std::runtime_error("kernel_spectrum: block kernel is not symmetric");
        Eigen::SelfAdjointEigenSolver<Matrix> solver((full + full.transpose()) / 2.0,
                                                     Eigen::EigenvaluesOnly);
        for (int i = bk.dim() - 1; i >= 0; --i)
            vals.push_back(solver.eigenvalues()(i) / bk.n);
    }
    return vals;
}

// Top-r orthonormal eigenvectors plus eigenvalues through r+1 (when they
// exist) for the gap check.
std::pair<Matrix, std::vector<double>> top_subspace(const BlockKernel& bk, int r) {
    if (bk.factors && bk.factors->cols() >= r) {
        Eigen::BDCSVD<Matrix> svd(*bk.factors, Eigen::ComputeThinU);
        Matrix vecs = svd.matrixU().leftCols(r);
        std::vector<double> vals;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            vals.push_back(svd.singularValues()(i) * svd.singularValues()(i) / bk.n);
        vals.resize(std::max<std::size_t>(vals.size(), r + 1), 0.0);
        return {vecs, vals};
    }
    Matrix full = bk.full();
    auto [evals, evecs] = top_eigenpairs((full + full.transpose()) / 2.0,
                                         std::min(bk.dim(), r + 1));
    std::vector<double> vals;
    for (int i = 0; i < evals.size(); ++i) vals.push_back(evals(i) / bk.n);
    return {evecs.leftCols(r), vals};
}

}  // namespace

SpectrumReport kernel_spectrum(const BlockKernel& bk, int top) {
    if (top < 1 || top > bk.dim())
        throw std::invalid_argument("kernel_spectrum: top out of range");
    SpectrumReport report;
    report.n = bk.n;
    report.M = bk.M;
    report.scaling = 1.0 / bk.n;
    report.eigenvalues = operator_eigenvalues(bk);
    report.eigenvalues.resize(top);
    return report;
}

std::vector<SpectrumRow> spectrum_convergence_curve(
    const Graphon& w, const GnnWeights& weights, const SignalModel& signals,
    const std::vector<int>& sizes, SampleMode mode,
    const std::vector<std::uint64_t>& seeds, int p) {
    if (sizes.empty() || seeds.empty())
        throw std::invalid_argument("spectrum_convergence_curve: empty sizes or seeds");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            throw std::invalid_argument("spectrum_convergence_curve: sizes must be ascending");

    std::vector<SpectrumRow> rows;
    for (int n : sizes) {
        std::vector<double> lambdas;
        for (std::uint64_t seed : seeds) {
            Graph g = sample_graph(w, n, mode, seed);
            BlockKernel bk = assemble_block_kernel(g, weights, signals(g), false);
            lambdas.push_back(kernel_spectrum(bk, p).eigenvalues[p - 1]);
        }
        const auto [lo, hi] = std::minmax_element(lambdas.begin(), lambdas.end());
        const double spread = *hi - *lo;
        for (std::size_t s = 0; s < seeds.size(); ++s)
            rows.push_back(SpectrumRow{n, seeds[s], p, lambdas[s], spread});
    }
    return rows;
}

void save_spectrum_csv(const std::vector<SpectrumRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_spectrum_csv: cannot open " + path);
    out.precision(17);
    out << "n,seed,p,lambda,spread\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.seed << ',' << r.p << ',' << r.lambda << ',' << r.spread << '\n';
}

SubspaceDistance leading_subspace_distance(const BlockKernel& a, const BlockKernel& b, int r) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("leading_subspace_distance: dimension mismatch");
    if (r < 1 || r > a.dim())
        throw std::invalid_argument("leading_subspace_distance: rank out of range");

    auto [qa, vals_a] = top_subspace(a, r);
    auto [qb, vals_b] = top_subspace(b, r);

    SubspaceDistance result;
    auto gap_ok = [r](const std::vector<double>& vals) {
        const double scale = std::max(std::abs(vals[0]), 1e-300);
        const double next = static_cast<int>(vals.size()) > r ? vals[r] : 0.0;
        return (vals[r - 1] - next) / scale >= 1e-10;
    };
    result.ill_conditioned = !gap_ok(vals_a) || !gap_ok(vals_b);

    Eigen::BDCSVD<Matrix> svd(qa.transpose() * qb);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    result.value = std::sqrt(std::max(0.0, 1.0 - std::min(1.0, smin) * std::min(1.0, smin)));
    return result;
}

}  // namespace gntk
