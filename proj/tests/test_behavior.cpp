#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "diqkd/behavior.hpp"
#include "diqkd/quantum.hpp"

using namespace diqkd;

TEST_CASE("behavior construction guards") {
    Scenario sc{2, 2, 2, 2};
    CHECK_THROWS(Behavior(sc, std::vector<double>(15, 0.0)));  // wrong size
    std::vector<double> bad(16, 1.0 / 4.0);
    bad[0] = 0.3;  // breaks normalization at (1,1)
    CHECK_THROWS(Behavior(sc, bad));
    CHECK_THROWS(Behavior(Scenario{0, 2, 2, 2}, std::vector<double>{}));
}

TEST_CASE("marginals of uniform and deterministic behaviors") {
    Behavior u = Behavior::uniform(Scenario{2, 2, 4, 4});
    for (int y = 1; y <= 2; ++y)
        for (int b = 1; b <= 4; ++b) CHECK(u.marginal_B(b, y) == doctest::Approx(0.25));

    Behavior d = Behavior::deterministic(Scenario{3, 2, 2, 2}, 1, 1);
    for (int x = 1; x <= 3; ++x) CHECK(d.marginal_A(1, x) == doctest::Approx(1.0));
}

TEST_CASE("q234 marginals are maximally mixed") {
    Behavior p = behavior_from_realization(build_q234());
    for (int x = 1; x <= 3; ++x)
        for (int a = 1; a <= 4; ++a) CHECK(p.marginal_A(a, x) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("check_no_signaling flags constructed violation") {
    Behavior p = behavior_from_realization(build_q234());
    CHECK(check_no_signaling(p, 1e-9).pass);

    // perturb one entry and renormalize only that setting's partner entry off
    Behavior bad = p;
    bad.set_p(1, 1, 1, 1, bad.p(1, 1, 1, 1) + 0.01);
    bad.set_p(1, 1, 4, 4, bad.p(1, 1, 4, 4) - 0.01);
    auto rep = check_no_signaling(bad, 1e-9);
    CHECK(!rep.pass);
    CHECK(rep.max_deviation > 1e-3);
}

TEST_CASE("apply_detection_efficiency endpoints") {
    Behavior p = behavior_from_realization(build_q4422());
    Behavior p1 = apply_detection_efficiency(p, 1.0);
    CHECK(p1.table() == p.table());  // identity, bitwise

    Behavior p0 = apply_detection_efficiency(p, 0.0);
    const Scenario& sc = p.scenario();
    for (int x = 1; x <= sc.nA; ++x)
        for (int y = 1; y <= sc.nB; ++y)
            for (int a = 1; a <= sc.mA; ++a)
                for (int b = 1; b <= sc.mB; ++b)
                    CHECK(p0.p(x, y, a, b) ==
                          doctest::Approx(a == sc.mA && b == sc.mB ? 1.0 : 0.0));
    CHECK_THROWS_AS(apply_detection_efficiency(p, 1.2), std::invalid_argument);
}

TEST_CASE("apply_detection_efficiency hand value at eta 0.5") {
    // uniform two-outcome behavior: p = 1/4, marginals 1/2
    Behavior u = Behavior::uniform(Scenario{2, 2, 2, 2});
    Behavior t = apply_detection_efficiency(u, 0.5);
    // p'(1,1) = eta^2/4
    CHECK(t.p(1, 1, 1, 1) == doctest::Approx(1.0 / 16).epsilon(1e-14));
    // p'(2,2) = eta^2/4 + 2*eta*(1-eta)*1/2 + (1-eta)^2
    CHECK(t.p(1, 1, 2, 2) == doctest::Approx(0.5625).epsilon(1e-14));
}

TEST_CASE("efficiency map preserves normalization and no-signaling") {
    Behavior p = behavior_from_realization(build_q234());
    for (double eta : {0.0, 0.3, 0.5, 0.8, 1.0}) {
        Behavior t = apply_detection_efficiency(p, eta);
        const Scenario& sc = t.scenario();
        for (int x = 1; x <= sc.nA; ++x)
            for (int y = 1; y <= sc.nB; ++y) {
                double sum = 0;
                for (int a = 1; a <= sc.mA; ++a)
                    for (int b = 1; b <= sc.mB; ++b) sum += t.p(x, y, a, b);
                CHECK(std::abs(sum - 1.0) < 1e-12);
            }
        CHECK(check_no_signaling(t, 1e-9).pass);
        // nondetection-pair floor
        CHECK(t.p(1, 1, sc.mA, sc.mB) >= (1 - eta) * (1 - eta) - 1e-15);
    }
}

TEST_CASE("degrade composition order is depolarize then efficiency") {
    QuantumRealization q = build_q234();
    NoiseParams noise{0.9, 0.8};
    Behavior got = degrade(q, noise);
    QuantumRealization depol = q;
    depol.state = depolarize(q.state, noise.v);
    Behavior expect = apply_detection_efficiency(behavior_from_realization(depol), noise.eta);
    CHECK(got.table() == expect.table());
    CHECK(check_no_signaling(got, 1e-9).pass);
}

TEST_CASE("degrade with eta 1 v 1 equals the plain behavior") {
    QuantumRealization q = build_q4422();
    CHECK(degrade(q, NoiseParams{1.0, 1.0}).table() ==
          behavior_from_realization(q).table());
}

TEST_CASE("degrade of fully mixed state gives product of effect traces") {
    QuantumRealization q = build_q4422();
    Behavior p = degrade(q, NoiseParams{1.0, 0.0});
    // rank-1 projectors: p(1,1|x,y) = tr(Pi_x) tr(Pi_y) / 16 = 1/16
    for (int x = 1; x <= 4; ++x)
        for (int y = 1; y <= 4; ++y)
            CHECK(p.p(x, y, 1, 1) == doctest::Approx(1.0 / 16).epsilon(1e-9));
}

TEST_CASE("behavior serialization round trip") {
    Behavior p = behavior_from_realization(build_q234());
    std::stringstream ss;
    write_behavior(ss, p);
    Behavior r = read_behavior(ss);
    CHECK(r.scenario() == p.scenario());
    CHECK(r.table() == p.table());
}
