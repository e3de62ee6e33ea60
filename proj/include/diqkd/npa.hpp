#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diqkd/behavior.hpp"
#include "diqkd/functional.hpp"
#include "diqkd/sdp.hpp"

namespace diqkd::npa {

enum class Party : std::uint8_t { A = 0, B = 1, E = 2 };

// A/B symbols are measurement projectors P_{outcome|input} (self-adjoint,
// idempotent, orthogonal within an input); E symbols are Eve's V_{j,a}
// operators, non-hermitian, so the adjoint flag matters only for them.
struct Symbol {
    Party party = Party::A;
    int input = 0;    // x for A/B, family index j for E
    int outcome = 0;  // a
    bool adjoint = false;

    auto operator<=>(const Symbol&) const = default;
};

Symbol projector(Party p, int input, int outcome);
Symbol eve_op(int j, int a, bool adjoint = false);

// Word of operator symbols in canonical form: parties sorted A,B,E (cross-
// party symbols commute), projector idempotence and within-input
// orthogonality applied to fixpoint.
struct Monomial {
    std::vector<Symbol> word;
    bool zero = false;

    static Monomial one() { return {}; }
    bool is_identity() const { return !zero && word.empty(); }
    int length() const { return static_cast<int>(word.size()); }
    std::string str() const;

    bool operator==(const Monomial&) const = default;
    // graded order: by length, then lexicographic; used everywhere a
    // deterministic monomial order is needed
    bool operator<(const Monomial& o) const;
};

Monomial reduce(const Monomial& m);
Monomial adjoint(const Monomial& m);
Monomial concat(const Monomial& a, const Monomial& b);  // reduced product

// P_{outcome|input} over retained symbols: the last outcome of each
// measurement is 1 minus the sum of the others.
std::vector<std::pair<double, Monomial>> expand_projector(Party p, int input, int outcome,
                                                          int numOutcomes);

// Relaxation level: base word length, optionally augmented with all A*B
// products ("1+AB", the desk-scale workhorse).
struct Level {
    int base = 1;
    bool plusAB = false;

    static Level parse(const std::string& text);
    std::string str() const;
};

// All canonical words of length <= level over the scenario's A/B projector
// symbols (last outcome of every measurement eliminated via completeness),
// deduplicated, plus extras.
std::vector<Monomial> generate_monomials(const Scenario& sc, Level level,
                                         const std::vector<Monomial>& extras = {});

using LinExpr = std::map<int, double>;  // variable id -> coefficient

// Symbolic moment/localizing-matrix structure over shared real moment
// variables; one variable per adjoint pair {w, w*} (all problem data here are
// real, so moments can be taken real without loss).
struct RelaxationProblem {
    Scenario scenario;
    std::vector<Monomial> basis;  // moment matrix side

    std::vector<Monomial> classRep;       // variable id -> canonical representative
    std::map<Monomial, int> classIndex;   // canonical representative -> variable id
    std::vector<std::vector<int>> momentCell;  // (i,j) -> variable id, -1 if zero
    int identityVar = -1;

    struct LocalizingBlock {
        std::string label;
        std::vector<Monomial> basis;
        // upper-triangle cell (s,t), s<=t -> linear expression in moment vars
        std::vector<std::vector<LinExpr>> cells;
    };
    std::vector<LocalizingBlock> localizing;

    struct Equality {
        LinExpr lhs;
        double rhs = 0.0;
    };
    std::vector<Equality> equalities;  // behavior pins etc.; identity moment pinned to 1

    LinExpr objective;  // maximize objective . y + objectiveConstant
    double objectiveConstant = 0.0;

    int num_vars() const { return static_cast<int>(classRep.size()); }
    int class_of(const Monomial& reduced);             // registers new classes
    std::optional<int> find_class(const Monomial& m) const;

    // Moment matrix over `monomials`, identity pinned to 1; no objective.
    static RelaxationProblem moment_structure(const Scenario& sc,
                                              std::vector<Monomial> monomials);
};

// Maximize a Bell functional over the level-`level` moment cone (Tsirelson-
// type upper bound). No behavior equalities.
RelaxationProblem tsirelson_relaxation(const BellFunctional& f, Level level,
                                       const std::vector<Monomial>& extras = {});

// Same, for the functional pushed through the detection-efficiency map.
RelaxationProblem efficiency_constrained_relaxation(const BellFunctional& f, Level level,
                                                    double eta,
                                                    const std::vector<Monomial>& extras = {});

// First-order and A*B moments pinned to the behavior's probabilities;
// feasibility-style problem ready for an objective supplied by the entropy
// module. Marginal pins use the behavior's reference-input marginals.
RelaxationProblem behavior_constrained_relaxation(const Behavior& p, Level level,
                                                  const std::vector<Monomial>& extras = {});

// Monomial list and cell -> variable map as text.
void dump(std::ostream& os, const RelaxationProblem& r);

// Convenience: compile, solve, return the optimum in the problem's sense.
struct BoundResult {
    double value = 0.0;
    sdp::SolveStatus status = sdp::SolveStatus::NumericalFailure;
    int iterations = 0;
    double dualityGap = 0.0;
};
BoundResult solve_relaxation(const RelaxationProblem& r, const sdp::SolveOptions& opts = {});

// Phase-1 check for pinned relaxations without localizing blocks:
// maximize t s.t. M(y) - t I >= 0, t <= 1. tstar >= 0 iff the pins admit a
// PSD moment completion at this level.
struct FeasibilityResult {
    double tstar = 0.0;
    sdp::SolveStatus status = sdp::SolveStatus::NumericalFailure;
};
FeasibilityResult relaxation_feasibility(const RelaxationProblem& r,
                                         const sdp::SolveOptions& opts = {});

}  // namespace diqkd::npa
