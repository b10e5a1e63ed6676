#pragma once

#include "gntk/graph.hpp"

namespace gntk {

/// Largest singular value of a dense matrix.
double spectral_norm(const Matrix& a);

/// Top-r eigenpairs of a symmetric matrix, descending. Returns {values, vectors}.
std::pair<Vector, Matrix> top_eigenpairs(const Matrix& sym, int r);

}  // namespace gntk
