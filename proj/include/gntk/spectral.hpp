#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gntk/kernel.hpp"

namespace gntk {

/// Operator spectrum of a block kernel: matrix eigenvalues divided by n,
/// sorted descending.
struct SpectrumReport {
    std::vector<double> eigenvalues;
    int n = 0;
    int M = 0;
    double scaling = 0.0;  // the 1/n applied to matrix eigenvalues
};

SpectrumReport kernel_spectrum(const BlockKernel& bk, int top);

struct SpectrumRow {
    int n = 0;
    std::uint64_t seed = 0;
    int p = 0;
    double lambda = 0.0;
    double spread = 0.0;  // max - min over seeds, repeated per row for the size
};

/// Builds the M per-sample signals for a sampled graph (evaluated at its
/// latent positions).
using SignalModel = std::function<std::vector<GraphSignal>(const Graph&)>;

/// For each size: sample, assemble the block kernel, report the p-th operator
/// eigenvalue per seed plus the across-seed spread.
std::vector<SpectrumRow> spectrum_convergence_curve(
    const Graphon& w, const GnnWeights& weights, const SignalModel& signals,
    const std::vector<int>& sizes, SampleMode mode,
    const std::vector<std::uint64_t>& seeds, int p);

void save_spectrum_csv(const std::vector<SpectrumRow>& rows, const std::string& path);

struct SubspaceDistance {
    double value = 0.0;       // sine of the largest principal angle, in [0,1]
    bool ill_conditioned = false;  // relative eigengap at rank r below 1e-10
};

SubspaceDistance leading_subspace_distance(const BlockKernel& a, const BlockKernel& b, int r);

}  // namespace gntk
