#include "diqkd/quantum.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace diqkd {

void BipartiteState::validate(double tol) const {
    if (dimA < 1 || dimB < 1) throw std::invalid_argument("state: dimensions must be >= 1");
    if (density.rows() != dimA * dimB || density.cols() != dimA * dimB)
        throw std::invalid_argument("state: density size does not match dimA*dimB");
    if (!is_hermitian(density, tol)) throw std::invalid_argument("state: density not hermitian");
    if (!is_psd(density, tol)) throw std::invalid_argument("state: density not PSD");
    if (std::abs(density.trace().real() - 1.0) > tol || std::abs(density.trace().imag()) > tol)
        throw std::invalid_argument("state: density trace != 1");
}

bool Measurement::is_complete(double tol) const {
    if (effects.empty()) return false;
    CMatrix sum = CMatrix::Zero(effects[0].rows(), effects[0].cols());
    for (const auto& e : effects) {
        if (!is_hermitian(e, tol) || !is_psd(e, tol)) return false;
        sum += e;
    }
    return max_abs_diff(sum, CMatrix::Identity(sum.rows(), sum.cols())) <= tol;
}

bool Measurement::is_projective(double tol) const {
    for (std::size_t i = 0; i < effects.size(); ++i) {
        if (!is_projector(effects[i], tol)) return false;
        for (std::size_t j = i + 1; j < effects.size(); ++j)
            if ((effects[i] * effects[j]).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

Measurement Measurement::transposed() const {
    Measurement out;
    out.effects.reserve(effects.size());
    for (const auto& e : effects) out.effects.push_back(e.transpose());
    return out;
}

void QuantumRealization::validate(double tol) const {
    state.validate(tol);
    if (alice.empty() || bob.empty())
        throw std::invalid_argument("realization: missing measurements");
    auto check_party = [&](const std::vector<Measurement>& ms, int dim, const char* who) {
        int outcomes = ms[0].outcomes();
        for (const auto& m : ms) {
            if (m.outcomes() != outcomes)
                throw std::invalid_argument(std::string("realization: ") + who +
                                            " has mixed outcome counts");
            for (const auto& e : m.effects)
                if (e.rows() != dim || e.cols() != dim)
                    throw std::invalid_argument(std::string("realization: ") + who +
                                                " effect dimension mismatch");
            if (!m.is_complete(tol))
                throw std::invalid_argument(std::string("realization: ") + who +
                                            " measurement not complete");
        }
    };
    check_party(alice, state.dimA, "alice");
    check_party(bob, state.dimB, "bob");
}

Scenario QuantumRealization::scenario() const {
    return Scenario{static_cast<int>(alice.size()), static_cast<int>(bob.size()),
                    alice.empty() ? 0 : alice[0].outcomes(), bob.empty() ? 0 : bob[0].outcomes()};
}

BipartiteState maximally_entangled(int d) {
    if (d < 2) throw std::invalid_argument("maximally_entangled: d must be >= 2");
    CVector psi = CVector::Zero(d * d);
    const double amp = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i) psi(i * d + i) = amp;
    BipartiteState s{d, d, psi * psi.adjoint()};
    return s;
}

Measurement projector_from_coeffs(const std::array<Complex, 4>& c, double normTol) {
    double norm2 = 0.0;
    for (const auto& ci : c) norm2 += std::norm(ci);
    if (std::abs(norm2 - 1.0) > normTol)
        throw std::invalid_argument("projector_from_coeffs: |c|^2 = " + std::to_string(norm2) +
                                    " deviates beyond tolerance");
    CVector v(4);
    const double scale = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < 4; ++i) v(i) = c[i] * scale;
    CMatrix proj = v * v.adjoint();
    Measurement m;
    m.effects = {proj, CMatrix::Identity(4, 4) - proj};
    return m;
}

namespace {

// Published coefficient tables, rounded to four digits in the source; the
// loader renormalizes each vector (residual perturbation <= 5e-4).
constexpr double kQ4422Alice[4][4] = {
    {-0.2816, -0.2816, 0.9159, 0.0499},
    {-0.5438, 0.5438, 0.5625, -0.3035},
    {0.2816, 0.2816, 0.9159, 0.0499},
    {0.5438, -0.5438, 0.5625, -0.3035},
};
constexpr double kQ4422Bob[4][4] = {
    {-0.2816, 0.2816, 0.9159, -0.0499},
    {-0.5438, -0.5438, 0.5625, 0.3035},
    {0.2816, -0.2816, 0.9159, -0.0499},
    {0.5438, 0.5438, 0.5625, 0.3035},
};

// Joint spectral projectors of a commuting pair of +-1 observables,
// ordered (+,+), (+,-), (-,+), (-,-).
Measurement joint_eigenprojectors(const CMatrix& o1, const CMatrix& o2) {
    const CMatrix id = CMatrix::Identity(o1.rows(), o1.cols());
    if ((o1 * o2 - o2 * o1).cwiseAbs().maxCoeff() > kAnalyticTol)
        throw std::invalid_argument("joint_eigenprojectors: observables do not commute");
    Measurement m;
    for (int s : {+1, -1})
        for (int t : {+1, -1})
            m.effects.push_back(0.25 * (id + double(s) * o1) * (id + double(t) * o2));
    return m;
}

}  // namespace

QuantumRealization build_q4422() {
    QuantumRealization q;
    q.state = maximally_entangled(4);
    auto load = [](const double (&row)[4]) {
        return projector_from_coeffs({Complex(row[0]), Complex(row[1]), Complex(row[2]),
                                      Complex(row[3])},
                                     1e-3);
    };
    for (const auto& row : kQ4422Alice) q.alice.push_back(load(row));
    for (const auto& row : kQ4422Bob) q.bob.push_back(load(row));
    return q;
}

QuantumRealization build_q234() {
    const CMatrix Z = pauli_z(), X = pauli_x(), I2 = identity(2);
    QuantumRealization q;
    q.state = maximally_entangled(4);
    // Each ququart is read as a qubit pair (|1>..|4> = |00>,|01>,|10>,|11>).
    // Alice measures the rows of the Peres-Mermin table, Bob the columns.
    q.alice = {
        joint_eigenprojectors(kron(I2, Z), kron(X, I2)),
        joint_eigenprojectors(kron(Z, I2), kron(I2, X)),
        joint_eigenprojectors(kron(Z, Z), kron(X, X)),
    };
    q.bob = {
        joint_eigenprojectors(kron(I2, Z), kron(Z, I2)),
        joint_eigenprojectors(kron(X, I2), kron(I2, X)),
        joint_eigenprojectors(kron(X, Z), kron(Z, X)),
    };
    return q;
}

BipartiteState depolarize(const BipartiteState& state, double v) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("depolarize: v outside [0,1]");
    if (state.dimA != state.dimB)
        throw std::invalid_argument("depolarize: requires equal local dimensions");
    if (v == 1.0) return state;
    const int d2 = state.dimA * state.dimB;
    BipartiteState out = state;
    out.density = v * state.density + ((1.0 - v) / d2) * CMatrix::Identity(d2, d2);
    return out;
}

Behavior behavior_from_realization(const QuantumRealization& q) {
    q.validate(kRoundedTol);
    Scenario sc = q.scenario();
    std::vector<double> table(sc.joint_size());
    std::size_t idx = 0;
    for (int x = 0; x < sc.nA; ++x)
        for (int y = 0; y < sc.nB; ++y)
            for (int a = 0; a < sc.mA; ++a)
                for (int b = 0; b < sc.mB; ++b) {
                    Complex val =
                        (kron(q.alice[x].effects[a], q.bob[y].effects[b]) * q.state.density)
                            .trace();
                    if (std::abs(val.imag()) > 1e-10)
                        throw std::runtime_error("behavior_from_realization: imaginary residue");
                    table[idx++] = val.real();
                }
    return Behavior(sc, std::move(table));
}

namespace {

void write_cmatrix(std::ostream& os, const CMatrix& m) {
    char buf[96];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", m(i, j).real(), m(i, j).imag());
            os << buf << (j + 1 < m.cols() ? " " : "");
        }
        os << '\n';
    }
}

CMatrix read_cmatrix(std::istream& is, int rows, int cols) {
    CMatrix m(rows, cols);
    std::string tok;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            if (!(is >> tok)) throw std::runtime_error("realization parse: truncated matrix");
            double re, im;
            if (std::sscanf(tok.c_str(), "%lg,%lg", &re, &im) != 2)
                throw std::runtime_error("realization parse: bad complex entry '" + tok + "'");
            m(i, j) = Complex(re, im);
        }
    return m;
}

void write_party(std::ostream& os, const char* tag, const std::vector<Measurement>& ms) {
    for (std::size_t i = 0; i < ms.size(); ++i) {
        os << tag << ' ' << i + 1 << ' ' << ms[i].outcomes() << ' ' << ms[i].dim() << '\n';
        for (const auto& e : ms[i].effects) write_cmatrix(os, e);
    }
}

}  // namespace

void write_realization(std::ostream& os, const QuantumRealization& q) {
    os << "realization " << q.state.dimA << ' ' << q.state.dimB << ' ' << q.alice.size() << ' '
       << q.bob.size() << '\n';
    os << "state\n";
    write_cmatrix(os, q.state.density);
    write_party(os, "alice", q.alice);
    write_party(os, "bob", q.bob);
}

QuantumRealization read_realization(std::istream& is) {
    std::string tag;
    QuantumRealization q;
    std::size_t na, nb;
    if (!(is >> tag >> q.state.dimA >> q.state.dimB >> na >> nb) || tag != "realization")
        throw std::runtime_error("realization parse: bad header");
    if (!(is >> tag) || tag != "state") throw std::runtime_error("realization parse: no state");
    const int d2 = q.state.dimA * q.state.dimB;
    q.state.density = read_cmatrix(is, d2, d2);
    auto read_party = [&](const char* want, std::size_t count, int dim) {
        std::vector<Measurement> ms;
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t index;
            int outcomes, mdim;
            if (!(is >> tag >> index >> outcomes >> mdim) || tag != want || index != i + 1 ||
                mdim != dim)
                throw std::runtime_error("realization parse: bad measurement header");
            Measurement m;
            for (int o = 0; o < outcomes; ++o) m.effects.push_back(read_cmatrix(is, dim, dim));
            ms.push_back(std::move(m));
        }
        return ms;
    };
    q.alice = read_party("alice", na, q.state.dimA);
    q.bob = read_party("bob", nb, q.state.dimB);
    return q;
}

}  // namespace diqkd
