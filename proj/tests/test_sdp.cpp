#include "doctest.h"

#include <fstream>
#include <sstream>

#include "diqkd/sdp.hpp"

using namespace diqkd::sdp;

namespace {

// maximize x s.t. x <= 3, in SDPA min form: min -x s.t. x*[-1] - [-3] >= 0
BlockSDP toy_1x1() {
    BlockSDP s;
    s.blockSizes = {1};
    s.numVars = 1;
    s.objective = {-1.0};
    s.varMatrices = {{{0, 0, 0, -1.0}}};
    s.constMatrix = {{0, 0, 0, -3.0}};
    s.maximize = true;
    return s;
}

}  // namespace

TEST_CASE("toy 1x1 bound") {
    BlockSDP s = toy_1x1();
    SDPSolution sol = solve(s);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.value(s) == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(sol.slackBlocks[0](0, 0) >= -1e-7);
}

TEST_CASE("two-block problem with diagonal trade-off") {
    // maximize x1 + x2 s.t. x1 <= 2, x2 <= 5 via two 1x1 blocks
    BlockSDP s;
    s.blockSizes = {1, 1};
    s.numVars = 2;
    s.objective = {-1.0, -1.0};
    s.varMatrices = {{{0, 0, 0, -1.0}}, {{1, 0, 0, -1.0}}};
    s.constMatrix = {{0, 0, 0, -2.0}, {1, 0, 0, -5.0}};
    s.maximize = true;
    SDPSolution sol = solve(s);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.value(s) == doctest::Approx(7.0).epsilon(1e-6));
}

TEST_CASE("psd completion problem") {
    // minimize t s.t. [[t, 1],[1, t]] >= 0  -> t = 1
    BlockSDP s;
    s.blockSizes = {2};
    s.numVars = 1;
    s.objective = {1.0};
    s.varMatrices = {{{0, 0, 0, 1.0}, {0, 1, 1, 1.0}}};
    s.constMatrix = {{0, 0, 1, -1.0}};
    SDPSolution sol = solve(s);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.primalObjective == doctest::Approx(1.0).epsilon(1e-6));
    // weak duality for the min form
    CHECK(sol.dualObjective <= sol.primalObjective + 1e-7);
}

TEST_CASE("solve is deterministic bitwise") {
    BlockSDP s = toy_1x1();
    SDPSolution a = solve(s);
    SDPSolution b = solve(s);
    CHECK(a.primalObjective == b.primalObjective);
    CHECK(a.dualObjective == b.dualObjective);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("constructed infeasible problem") {
    // [[1, 1.5],[1.5, x]] >= 0 needs x >= 2.25; second block forces x <= 1
    BlockSDP s;
    s.blockSizes = {2, 1};
    s.numVars = 1;
    s.objective = {0.0};
    s.varMatrices = {{{0, 1, 1, 1.0}, {1, 0, 0, -1.0}}};
    s.constMatrix = {{0, 0, 0, -1.0}, {0, 0, 1, -1.5}, {1, 0, 0, -1.0}};
    SDPSolution sol = solve(s);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("no-variable feasibility check") {
    BlockSDP s;
    s.blockSizes = {2};
    s.numVars = 0;
    s.constMatrix = {{0, 0, 0, -1.0}, {0, 1, 1, -2.0}};  // -F0 = diag(1,2) >= 0
    CHECK(solve(s).status == SolveStatus::Optimal);
    s.constMatrix = {{0, 0, 0, 1.0}, {0, 1, 1, -2.0}};  // -F0 = diag(-1,2)
    CHECK(solve(s).status == SolveStatus::Infeasible);
}

TEST_CASE("side cap refusal") {
    BlockSDP s = toy_1x1();
    SolveOptions opts;
    opts.sideCap = 0;
    CHECK_THROWS_WITH_AS(solve(s, opts), doctest::Contains("SDPA"), std::runtime_error);
}

TEST_CASE("sdpa export golden file") {
    std::string text = export_sdpa(toy_1x1(), "toy1x1");
    const char* expected =
        "\"toy1x1\n"
        "1\n"
        "1\n"
        "1\n"
        "-1\n"
        "0 1 1 1 -3\n"
        "1 1 1 1 -1\n";
    CHECK(text == expected);
}

TEST_CASE("sdpa block sizes line with diagonal block") {
    BlockSDP s;
    s.blockSizes = {5, -3};
    s.numVars = 1;
    s.objective = {2.0};
    s.varMatrices = {{{0, 0, 4, 1.0}, {1, 2, 2, 0.5}}};
    std::string text = export_sdpa(s, "shape");
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);  // comment
    std::getline(is, line);
    CHECK(line == "1");
    std::getline(is, line);
    CHECK(line == "2");
    std::getline(is, line);
    CHECK(line == "5 -3");
}

TEST_CASE("sdpa export/import round trip") {
    BlockSDP s;
    s.blockSizes = {3, -2};
    s.numVars = 2;
    s.objective = {1.0, -0.125};
    // entries in canonical (block,row,col) order, which the writer preserves
    s.varMatrices = {{{0, 0, 2, 0.75}, {1, 1, 1, -2.0}},
                     {{0, 0, 0, 1e-11}, {0, 1, 1, 1.0 / 3.0}}};
    s.constMatrix = {{0, 0, 0, 0.5}};
    std::string text = export_sdpa(s, "roundtrip");
    std::istringstream is(text);
    BlockSDP r = parse_sdpa(is);
    CHECK(r == s);
}

TEST_CASE("sdpa result import") {
    std::istringstream out(
        "phase.value  = pdOPT\n"
        "   objValPrimal = +2.8284271247461903e+00\n"
        "   objValDual   = +2.8284271247461898e+00\n");
    SdpaObjectives obj = parse_sdpa_output(out);
    CHECK(obj.primal == doctest::Approx(2.8284271247461903));
    CHECK(obj.dual == doctest::Approx(2.8284271247461898));
}
