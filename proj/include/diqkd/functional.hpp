#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "diqkd/behavior.hpp"

namespace diqkd {

// Linear form over a behavior: sum of joint-probability, marginal and
// constant terms. Indices are 1-based like Behavior's.
struct BellFunctional {
    Scenario scenario;
    std::map<std::array<int, 4>, double> joint;  // (x,y,a,b) -> coefficient
    std::map<std::array<int, 2>, double> margA;  // (x,a) -> coefficient
    std::map<std::array<int, 2>, double> margB;  // (y,b) -> coefficient
    double constant = 0.0;
    std::optional<double> knownLocalBound;

    // Drops exact-zero coefficients left behind by cancellations.
    void prune();
    std::size_t term_count() const { return joint.size() + margA.size() + margB.size(); }
};

double eval(const BellFunctional& f, const Behavior& p);

// I^4_4422 (local bound 0), built from its four Clauser-Horne blocks.
BellFunctional make_i4422();

// I_234 (local bound 8): 72 unit-coefficient joint terms.
BellFunctional make_i234();

// CHSH parameter S expanded into probability space
// (<AxBy> = sum_ab (-1)^(a+b) p(a,b|x,y), outcomes 1,2 <-> +1,-1).
BellFunctional make_chsh();

struct LocalBoundResult {
    double value = 0.0;
    std::vector<int> aliceStrategy;  // outcome (1-based) per Alice input
    std::vector<int> bobStrategy;
};

// Exact maximum over all deterministic strategy pairs; first maximizer wins
// ties. Throws if mA^nA * mB^nB exceeds the cap.
LocalBoundResult local_bound(const BellFunctional& f, std::uint64_t cap = 100000000ull);

// Per-setting nonsignaling upper bound; only defined for functionals without
// marginal terms and with nonnegative joint coefficients.
std::optional<double> algebraic_max(const BellFunctional& f);

// Functional f' with eval(f', p) = eval(f, apply_detection_efficiency(p, eta))
// for every behavior p; exact coefficient pushforward of the efficiency map.
BellFunctional transform_by_efficiency(const BellFunctional& f, double eta);

// Sparse text format: header "functional nA nB mA mB", joint rows
// "x y a b coeff", marginal rows "A x a coeff" / "B y b coeff", optional
// "C constant" and "L localbound" rows.
void write_functional(std::ostream& os, const BellFunctional& f);
BellFunctional read_functional(std::istream& is);

}  // namespace diqkd
