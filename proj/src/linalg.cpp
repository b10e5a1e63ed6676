#include "gntk/linalg.hpp"

#include <Eigen/SVD>
#include <stdexcept>

namespace gntk {

double spectral_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::BDCSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

std::pair<Vector, Matrix> top_eigenpairs(const Matrix& sym, int r) {
    if (sym.rows() != sym.cols()) throw std::invalid_argument("top_eigenpairs: matrix not square");
    const int n = static_cast<int>(sym.rows());
    if (r < 1 || r > n) throw std::invalid_argument("top_eigenpairs: rank out of range");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    Vector vals(r);
    Matrix vecs(n, r);
    for (int i = 0; i < r; ++i) {
        vals(i) = solver.eigenvalues()(n - 1 - i);
        vecs.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return {vals, vecs};
}

}  // namespace gntk
