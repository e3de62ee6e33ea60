#include "doctest.h"

#include "diqkd/cmatrix.hpp"

using namespace diqkd;

TEST_CASE("kron identity case") {
    CMatrix r = kron(identity(2), identity(2));
    CHECK(max_abs_diff(r, identity(4)) == 0.0);
}

TEST_CASE("kron of diagonal paulis") {
    CMatrix r = kron(pauli_z(), pauli_z());
    CMatrix expect = CMatrix::Zero(4, 4);
    expect(0, 0) = 1;
    expect(1, 1) = -1;
    expect(2, 2) = -1;
    expect(3, 3) = 1;
    CHECK(max_abs_diff(r, expect) == 0.0);
}

TEST_CASE("kron block placement") {
    // hand expansion of the 2x2 blocks of sigma_x (x) sigma_z
    CMatrix r = kron(pauli_x(), pauli_z());
    CHECK(r(0, 2) == Complex(1, 0));
    CHECK(r(1, 3) == Complex(-1, 0));
    CHECK(r(2, 0) == Complex(1, 0));
    CHECK(r(0, 0) == Complex(0, 0));
    CHECK(r.rows() == 4);
}

TEST_CASE("kron shape for rectangular inputs") {
    CMatrix a(2, 3);
    a.setConstant(Complex(1, 1));
    CMatrix b(3, 2);
    b.setConstant(Complex(2, 0));
    CMatrix r = kron(a, b);
    CHECK(r.rows() == 6);
    CHECK(r.cols() == 6);
    CHECK(r(0, 0) == Complex(2, 2));
}

TEST_CASE("predicates on paulis") {
    CHECK(is_hermitian(pauli_x()));
    CHECK(is_hermitian(pauli_y()));
    CHECK(is_unitary(pauli_y()));
    CHECK(!is_psd(pauli_z()));
    CHECK(is_psd(identity(3)));
    CHECK(is_projector(0.5 * (identity(2) + pauli_x())));
    CHECK(!is_projector(pauli_x()));
}

TEST_CASE("fourier transform is unitary and cyclic") {
    CMatrix f = fourier_transform(4);
    CHECK(is_unitary(f, 1e-12));
    // first column is the uniform vector
    for (int i = 0; i < 4; ++i) CHECK(std::abs(f(i, 0) - Complex(0.5, 0)) < 1e-14);
    // omega = i for d = 4
    CHECK(std::abs(f(1, 1) - Complex(0, 0.5)) < 1e-14);
}
