#include "diqkd/cmatrix.hpp"

#include <cmath>
#include <limits>

namespace diqkd {

bool is_hermitian(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const CMatrix& m, double tol) {
    if (!is_hermitian(m, tol)) return false;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

bool is_unitary(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    CMatrix p = m.adjoint() * m;
    return (p - CMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_projector(const CMatrix& m, double tol) {
    if (!is_hermitian(m, tol)) return false;
    return (m * m - m).cwiseAbs().maxCoeff() <= tol;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        return std::numeric_limits<double>::infinity();
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix pauli_x() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

CMatrix pauli_y() {
    CMatrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

CMatrix pauli_z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

CMatrix identity(int d) { return CMatrix::Identity(d, d); }

CMatrix fourier_transform(int d) {
    CMatrix f(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            double phase = 2.0 * M_PI * j * k / d;
            f(j, k) = norm * Complex(std::cos(phase), std::sin(phase));
        }
    return f;
}

}  // namespace diqkd
