#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "diqkd/npa.hpp"
#include "diqkd/quantum.hpp"
#include "test_helpers.hpp"

using namespace diqkd;
using namespace diqkd::npa;
using diqkd::testing::make_chsh_realization;

namespace {

Monomial mono(std::initializer_list<Symbol> syms) { return reduce(Monomial{syms, false}); }

Behavior pr_box() {
    Scenario sc{2, 2, 2, 2};
    std::vector<double> t(16, 0.0);
    Behavior out = Behavior::uniform(sc);
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 2; ++y)
            for (int a = 1; a <= 2; ++a)
                for (int b = 1; b <= 2; ++b) {
                    bool xyBit = (x == 2) && (y == 2);
                    bool aXorB = (a != b);
                    out.set_p(x, y, a, b, (aXorB == xyBit) ? 0.5 : 0.0);
                }
    return out;
}

}  // namespace

TEST_CASE("word reduction rules") {
    Symbol a11 = projector(Party::A, 1, 1);
    Symbol a21 = projector(Party::A, 1, 2);  // same input, other outcome
    Symbol a12 = projector(Party::A, 2, 1);
    Symbol b11 = projector(Party::B, 1, 1);

    CHECK(mono({a11, a11}) == mono({a11}));        // idempotence
    CHECK(mono({a11, a21}).zero);                  // orthogonality
    CHECK(mono({b11, a12}) == mono({a12, b11}));   // party commutation
    CHECK(mono({a11, b11, a11}) == mono({a11, b11}));
    CHECK(!mono({a11, a12}).zero);                 // different inputs do not reduce
    CHECK(mono({a11, a12}) != mono({a12, a11}));   // and do not commute
}

TEST_CASE("eve symbols do not reduce") {
    Symbol v1 = eve_op(1, 1), v1d = eve_op(1, 1, true);
    CHECK(mono({v1, v1}).length() == 2);
    CHECK(mono({v1d, v1}).length() == 2);
    Symbol a11 = projector(Party::A, 1, 1);
    CHECK(mono({v1, a11}) == mono({a11, v1}));  // E commutes with A
}

TEST_CASE("reduce is idempotent on random words") {
    std::mt19937_64 rng(42);
    std::vector<Symbol> pool;
    for (int x = 1; x <= 3; ++x)
        for (int a = 1; a <= 3; ++a) {
            pool.push_back(projector(Party::A, x, a));
            pool.push_back(projector(Party::B, x, a));
        }
    for (int a = 1; a <= 2; ++a) {
        pool.push_back(eve_op(1, a, false));
        pool.push_back(eve_op(1, a, true));
    }
    for (int trial = 0; trial < 10000; ++trial) {
        Monomial w;
        int len = static_cast<int>(rng() % 6);
        for (int i = 0; i < len; ++i) w.word.push_back(pool[rng() % pool.size()]);
        Monomial r = reduce(w);
        CHECK(reduce(r) == r);
        // adjoint is an involution on canonical words
        CHECK(adjoint(adjoint(r)) == r);
    }
}

TEST_CASE("monomial generation counts") {
    std::vector<Monomial> chsh1 = generate_monomials(Scenario{2, 2, 2, 2}, Level{1, false});
    CHECK(chsh1.size() == 5);  // 1, A11, A12, B11, B12

    std::vector<Monomial> m334 = generate_monomials(Scenario{3, 3, 4, 4}, Level{1, false});
    CHECK(m334.size() == 19);  // 1 + 9 + 9

    std::vector<Monomial> m334ab = generate_monomials(Scenario{3, 3, 4, 4}, Level{1, true});
    CHECK(m334ab.size() == 100);  // + 81 AB products

    // level nesting
    std::vector<Monomial> chsh2 = generate_monomials(Scenario{2, 2, 2, 2}, Level{2, false});
    for (const auto& m : chsh1)
        CHECK(std::find(chsh2.begin(), chsh2.end(), m) != chsh2.end());
    CHECK(chsh2.size() > chsh1.size());
}

TEST_CASE("level parser") {
    CHECK(Level::parse("1").base == 1);
    CHECK(!Level::parse("2").plusAB);
    CHECK(Level::parse("1+AB").plusAB);
    CHECK(Level::parse("1+ab").plusAB);
    CHECK(Level::parse("1+AB").str() == "1+AB");
    CHECK_THROWS(Level::parse("1+XY"));
}

TEST_CASE("adjoint pairing shares the moment variable") {
    RelaxationProblem r = RelaxationProblem::moment_structure(
        Scenario{2, 2, 2, 2}, generate_monomials(Scenario{2, 2, 2, 2}, Level{1, false}));
    // basis order: 1, then singles; find A11 and A12 positions
    Monomial a11 = mono({projector(Party::A, 1, 1)});
    Monomial a12 = mono({projector(Party::A, 2, 1)});
    int i = -1, j = -1;
    for (std::size_t k = 0; k < r.basis.size(); ++k) {
        if (r.basis[k] == a11) i = static_cast<int>(k);
        if (r.basis[k] == a12) j = static_cast<int>(k);
    }
    REQUIRE(i >= 0);
    REQUIRE(j >= 0);
    // cell (i,j) holds y(A11 A12), cell (j,i) its adjoint; same variable
    CHECK(r.momentCell[i][j] == r.momentCell[j][i]);
    CHECK(r.momentCell[i][j] >= 0);
}

TEST_CASE("chsh tsirelson bound at level 1") {
    BellFunctional f = make_chsh();
    RelaxationProblem r = tsirelson_relaxation(f, Level{1, false});
    CHECK(r.basis.size() == 5);
    sdp::BlockSDP compiled = sdp::compile(r);
    CHECK(compiled.blockSizes.size() == 1);
    CHECK(compiled.blockSizes[0] == 5);

    BoundResult bound = solve_relaxation(r);
    REQUIRE(bound.status == sdp::SolveStatus::Optimal);
    CHECK(bound.value == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("solved moment matrix is PSD") {
    RelaxationProblem r = tsirelson_relaxation(make_chsh(), Level{1, false});
    sdp::BlockSDP s = sdp::compile(r);
    sdp::SDPSolution sol = sdp::solve(s);
    REQUIRE(sol.status == sdp::SolveStatus::Optimal);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.slackBlocks[0],
                                                      Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-7);
}

TEST_CASE("hierarchy monotonicity") {
    BellFunctional chsh = make_chsh();
    double l1 = solve_relaxation(tsirelson_relaxation(chsh, Level{1, false})).value;
    double l2 = solve_relaxation(tsirelson_relaxation(chsh, Level{2, false})).value;
    CHECK(l2 <= l1 + 1e-7);

    BellFunctional i4422 = make_i4422();
    double f1 = solve_relaxation(tsirelson_relaxation(i4422, Level{1, false})).value;
    double f2 = solve_relaxation(tsirelson_relaxation(i4422, Level{2, false})).value;
    CHECK(f2 <= f1 + 1e-7);
}

TEST_CASE("soundness: quantum values stay below the relaxation") {
    // CHSH realization vs its level-1 bound
    double chshBound = solve_relaxation(tsirelson_relaxation(make_chsh(), Level{1, false})).value;
    double chshVal = eval(make_chsh(), behavior_from_realization(make_chsh_realization(M_PI / 4)));
    CHECK(chshVal <= chshBound + 1e-6);

    // Q4422 vs the I4422 level-2 bound
    double q4422Val = eval(make_i4422(), behavior_from_realization(build_q4422()));
    double i4422Bound =
        solve_relaxation(tsirelson_relaxation(make_i4422(), Level{2, false})).value;
    CHECK(q4422Val <= i4422Bound + 1e-6);

    // Q234 vs the I234 level-1 bound (level 1+AB pins it to 9; see acceptance)
    double q234Val = eval(make_i234(), behavior_from_realization(build_q234()));
    double i234L1 = solve_relaxation(tsirelson_relaxation(make_i234(), Level{1, false})).value;
    CHECK(q234Val <= i234L1 + 1e-6);
    CHECK(i234L1 >= 9.0 - 1e-6);
}

TEST_CASE("efficiency-constrained relaxation") {
    BellFunctional f = make_i4422();
    // eta = 1 compiles to the identical problem
    sdp::BlockSDP a = sdp::compile(tsirelson_relaxation(f, Level{1, false}));
    sdp::BlockSDP b = sdp::compile(efficiency_constrained_relaxation(f, Level{1, false}, 1.0));
    CHECK(a == b);

    double full = solve_relaxation(tsirelson_relaxation(f, Level{2, false})).value;
    double degraded =
        solve_relaxation(efficiency_constrained_relaxation(f, Level{2, false}, 0.8)).value;
    CHECK(degraded < full);
}

TEST_CASE("npa gap for degraded i234") {
    // the hierarchy predicts stronger violations than the degraded Q234 value
    double eta = 0.9;
    Behavior degraded =
        apply_detection_efficiency(behavior_from_realization(build_q234()), eta);
    double evalValue = eval(make_i234(), degraded);
    double bound =
        solve_relaxation(efficiency_constrained_relaxation(make_i234(), Level{1, false}, eta))
            .value;
    CHECK(bound > evalValue);
}

TEST_CASE("behavior pins: quantum feasible, PR box infeasible") {
    Behavior chsh = behavior_from_realization(make_chsh_realization(M_PI / 4));
    RelaxationProblem rq = behavior_constrained_relaxation(chsh, Level{1, true});
    FeasibilityResult fq = relaxation_feasibility(rq);
    REQUIRE(fq.status == sdp::SolveStatus::Optimal);
    CHECK(fq.tstar >= -1e-7);

    RelaxationProblem rp = behavior_constrained_relaxation(pr_box(), Level{1, true});
    FeasibilityResult fp = relaxation_feasibility(rp);
    REQUIRE(fp.status == sdp::SolveStatus::Optimal);
    CHECK(fp.tstar < -1e-4);
}

TEST_CASE("behavior pin census for the 2x2x2x2 scenario") {
    Behavior u = Behavior::uniform(Scenario{2, 2, 2, 2});
    RelaxationProblem r = behavior_constrained_relaxation(u, Level{1, false});
    // identity pin + 4 joint + 2 + 2 marginal pins; the 16 raw joint
    // probabilities reduce to these under no-signaling and completeness
    CHECK(r.equalities.size() == 9);
}

TEST_CASE("debug dump lists monomials and cells") {
    RelaxationProblem r = tsirelson_relaxation(make_chsh(), Level{1, false});
    std::ostringstream os;
    dump(os, r);
    CHECK(os.str().find("monomials 5") != std::string::npos);
    CHECK(os.str().find("A(1|1)") != std::string::npos);
}
