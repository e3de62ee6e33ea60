#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "diqkd/behavior.hpp"
#include "diqkd/cmatrix.hpp"

namespace diqkd {

struct BipartiteState {
    int dimA = 0;
    int dimB = 0;
    CMatrix density;  // (dimA*dimB) square

    // Throws unless density is hermitian, PSD and unit trace to tol.
    void validate(double tol = kAnalyticTol) const;
};

// Ordered effects, one per outcome label 1..m (stored 0-based).
struct Measurement {
    std::vector<CMatrix> effects;

    int outcomes() const { return static_cast<int>(effects.size()); }
    int dim() const { return effects.empty() ? 0 : static_cast<int>(effects[0].rows()); }
    const CMatrix& effect(int outcome) const { return effects.at(outcome - 1); }

    bool is_complete(double tol = kAnalyticTol) const;   // effects sum to identity
    bool is_projective(double tol = kAnalyticTol) const; // idempotent, mutually orthogonal
    Measurement transposed() const;
};

struct QuantumRealization {
    BipartiteState state;
    std::vector<Measurement> alice;
    std::vector<Measurement> bob;

    void validate(double tol = kAnalyticTol) const;
    Scenario scenario() const;
};

// Pure state with amplitude 1/sqrt(d) on each |ii>. Rejects d < 2.
BipartiteState maximally_entangled(int d);

// Two-outcome measurement {P, 1-P} with P = sum_ij c_i c_j^* |i><j|.
// Outcome 1 is the eigenvalue-1 subspace of P, outcome 2 its complement.
// The coefficient vector is renormalized; norms off by more than normTol reject.
Measurement projector_from_coeffs(const std::array<Complex, 4>& c, double normTol = 1e-8);

// The I4422 realization: maximally entangled ququart pair, four two-outcome
// projective measurements per party from the published coefficient tables
// (renormalized to unit norm; residual perturbation <= 5e-4).
QuantumRealization build_q4422();

// The (2,3,4) realization: maximally entangled ququart pair, three
// four-outcome measurements per party built as joint eigenprojectors of
// commuting observable pairs (Peres-Mermin rows for Alice, columns for Bob).
// Outcome pairs map as (+,+)->1, (+,-)->2, (-,+)->3, (-,-)->4.
QuantumRealization build_q234();

// rho = v |psi><psi| + (1-v)/d^2 * Id applied to an arbitrary density; requires
// equal local dimensions.
BipartiteState depolarize(const BipartiteState& state, double v);

// p(a,b|x,y) = tr[(M_{a|x} (x) M_{b|y}) rho]; imaginary residues below 1e-10
// are discarded, larger ones reject.
Behavior behavior_from_realization(const QuantumRealization& q);

// Text schema (lossless at 17 significant digits, complex entries as "re,im"):
//   realization <dimA> <dimB> <numAliceMeasurements> <numBobMeasurements>
//   state density entries (row-major), then per-party measurements with an
//   outcome-count header and row-major effect entries.
void write_realization(std::ostream& os, const QuantumRealization& q);
QuantumRealization read_realization(std::istream& is);

}  // namespace diqkd
