#pragma once

#include <Eigen/Dense>
#include <complex>

namespace diqkd {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Tolerance for predicates on analytically constructed matrices.
inline constexpr double kAnalyticTol = 1e-10;
// Tolerance for matrices built from published coefficients rounded to 4 digits.
inline constexpr double kRoundedTol = 1e-6;

bool is_hermitian(const CMatrix& m, double tol = kAnalyticTol);
bool is_psd(const CMatrix& m, double tol = kAnalyticTol);
bool is_unitary(const CMatrix& m, double tol = kAnalyticTol);
bool is_projector(const CMatrix& m, double tol = kAnalyticTol);

// Largest absolute entry of a - b; zero-size mismatch yields infinity.
double max_abs_diff(const CMatrix& a, const CMatrix& b);

CMatrix kron(const CMatrix& a, const CMatrix& b);

CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();
CMatrix identity(int d);

// Discrete Fourier transform, F_{jk} = omega^{jk} / sqrt(d), omega = exp(2*pi*i/d).
CMatrix fourier_transform(int d);

}  // namespace diqkd
