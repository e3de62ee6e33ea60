#include "doctest.h"

#include <map>
#include <random>
#include <sstream>

#include "diqkd/functional.hpp"
#include "diqkd/quantum.hpp"
#include "test_helpers.hpp"

using namespace diqkd;
using namespace diqkd::testing;

namespace {

// Independent expansion oracle for I4422: the coefficient table expanded by
// hand from the four CH blocks, frozen here.
std::map<std::array<int, 4>, double> i4422_joint_oracle() {
    return {
        {{1, 1, 1, 1}, +1}, {{2, 1, 1, 1}, +1}, {{1, 2, 1, 1}, +1}, {{2, 2, 1, 1}, -1},
        {{3, 3, 1, 1}, +1}, {{4, 3, 1, 1}, +1}, {{3, 4, 1, 1}, +1}, {{4, 4, 1, 1}, -1},
        {{2, 4, 1, 1}, -1}, {{1, 4, 1, 1}, -1}, {{2, 3, 1, 1}, -1}, {{1, 3, 1, 1}, +1},
        {{4, 2, 1, 1}, -1}, {{3, 2, 1, 1}, -1}, {{4, 1, 1, 1}, -1}, {{3, 1, 1, 1}, +1},
    };
}

}  // namespace

TEST_CASE("i4422 coefficients match the expansion oracle") {
    BellFunctional f = make_i4422();
    CHECK(f.scenario == Scenario{4, 4, 2, 2});
    auto oracle = i4422_joint_oracle();
    CHECK(f.joint.size() == oracle.size());
    for (const auto& [k, c] : oracle) {
        REQUIRE(f.joint.count(k) == 1);
        CHECK(f.joint.at(k) == c);
    }
    // spot value called out separately: p(1,1|2,4) from -I_CH^(2,1;4,3)
    CHECK(f.joint.at({2, 4, 1, 1}) == -1.0);
    // net marginal coefficients: the explicit -p_A(1|2) cancels the CH-block
    // +1, leaving entries only on inputs 1 and 3
    CHECK(f.margA.size() == 2);
    CHECK(f.margA.at({1, 1}) == -1.0);
    CHECK(f.margA.at({3, 1}) == -1.0);
    CHECK(f.margA.count({2, 1}) == 0);
    CHECK(f.margB.size() == 2);
    CHECK(f.margB.at({1, 1}) == -1.0);
    CHECK(f.margB.at({3, 1}) == -1.0);
    CHECK(f.knownLocalBound == 0.0);
}

TEST_CASE("i234 term structure") {
    BellFunctional f = make_i234();
    CHECK(f.scenario == Scenario{3, 3, 4, 4});
    CHECK(f.joint.size() == 72);
    for (const auto& [k, c] : f.joint) CHECK(c == 1.0);
    CHECK(f.margA.empty());
    CHECK(f.margB.empty());
    // last line of the published sum
    CHECK(f.joint.count({3, 3, 1, 2}) == 1);
    CHECK(f.joint.count({3, 3, 1, 1}) == 0);
    CHECK(f.knownLocalBound == 8.0);
}

TEST_CASE("eval on uniform and deterministic behaviors") {
    BellFunctional i234 = make_i234();
    Behavior u = Behavior::uniform(i234.scenario);
    CHECK(eval(i234, u) == doctest::Approx(72.0 / 16).epsilon(1e-12));  // 4.5

    BellFunctional i4422 = make_i4422();
    Behavior d = Behavior::deterministic(i4422.scenario, 1, 1);
    CHECK(eval(i4422, d) == doctest::Approx(-4.0).epsilon(1e-12));

    CHECK_THROWS_AS(eval(i234, d), std::invalid_argument);
}

TEST_CASE("chsh functional reaches 2 sqrt 2 on the Tsirelson realization") {
    Behavior p = behavior_from_realization(make_chsh_realization(M_PI / 4));
    CHECK(eval(make_chsh(), p) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("local bounds by enumeration") {
    auto r4422 = local_bound(make_i4422());
    CHECK(r4422.value == doctest::Approx(0.0).epsilon(1e-12));
    auto r234 = local_bound(make_i234());
    CHECK(r234.value == doctest::Approx(8.0).epsilon(1e-12));
    auto rchsh = local_bound(make_chsh());
    CHECK(rchsh.value == doctest::Approx(2.0).epsilon(1e-12));
    // reported strategies achieve the reported value
    CHECK(r234.aliceStrategy.size() == 3);
    CHECK(r234.bobStrategy.size() == 3);
}

TEST_CASE("local bound strategy achieves its value") {
    BellFunctional f = make_i234();
    auto r = local_bound(f);
    std::vector<double> t(f.scenario.joint_size(), 0.0);
    for (int x = 1; x <= 3; ++x)
        for (int y = 1; y <= 3; ++y)
            t[((static_cast<std::size_t>(x - 1) * 3 + (y - 1)) * 4 +
               (r.aliceStrategy[x - 1] - 1)) *
                  4 +
              (r.bobStrategy[y - 1] - 1)] = 1.0;
    CHECK(eval(f, Behavior(f.scenario, std::move(t))) == doctest::Approx(r.value));
}

TEST_CASE("local bound dominates sampled deterministic behaviors") {
    std::mt19937_64 rng(7);
    for (BellFunctional f : {make_i4422(), make_i234()}) {
        double bound = local_bound(f).value;
        for (int i = 0; i < 1000; ++i) {
            Behavior d = random_deterministic_behavior(f.scenario, rng);
            CHECK(eval(f, d) <= bound + 1e-12);
        }
    }
}

TEST_CASE("local bound cap") {
    BellFunctional f = make_i234();
    CHECK_THROWS_AS(local_bound(f, 100), std::runtime_error);
}

TEST_CASE("algebraic max") {
    CHECK(algebraic_max(make_i234()) == 9.0);
    CHECK(!algebraic_max(make_i4422()).has_value());
    // uniform-coefficient single-setting functional
    BellFunctional single;
    single.scenario = {1, 1, 2, 2};
    single.joint[{1, 1, 1, 1}] = 0.7;
    single.joint[{1, 1, 2, 2}] = 0.7;
    CHECK(algebraic_max(single) == doctest::Approx(0.7));
}

TEST_CASE("eval is linear in the behavior") {
    std::mt19937_64 rng(3);
    BellFunctional f = make_i4422();
    Behavior p = random_behavior(f.scenario, rng);
    Behavior q = random_behavior(f.scenario, rng);
    for (double lambda : {0.0, 0.25, 1.0}) {
        std::vector<double> t(p.table().size());
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = lambda * p.table()[i] + (1 - lambda) * q.table()[i];
        Behavior mix(f.scenario, std::move(t));
        CHECK(eval(f, mix) ==
              doctest::Approx(lambda * eval(f, p) + (1 - lambda) * eval(f, q)).epsilon(1e-10));
    }
}

TEST_CASE("transform_by_efficiency matches the behavior-side map") {
    std::mt19937_64 rng(11);
    for (BellFunctional f : {make_i4422(), make_i234(), make_chsh()}) {
        for (double eta : {0.0, 0.4, 0.75, 1.0}) {
            BellFunctional ft = transform_by_efficiency(f, eta);
            for (int rep = 0; rep < 5; ++rep) {
                Behavior p = random_behavior(f.scenario, rng);
                CHECK(eval(ft, p) ==
                      doctest::Approx(eval(f, apply_detection_efficiency(p, eta)))
                          .epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("transform at eta 1 is the identity") {
    BellFunctional f = make_i4422();
    BellFunctional t = transform_by_efficiency(f, 1.0);
    CHECK(t.joint == f.joint);
    CHECK(t.margA == f.margA);
    CHECK(t.margB == f.margB);
    CHECK(t.constant == f.constant);
}

TEST_CASE("q4422 violation under binning persists near the published threshold") {
    Behavior p = behavior_from_realization(build_q4422());
    BellFunctional f = make_i4422();
    // published crossing for the maximally entangled branch: 0.7698
    CHECK(eval(f, apply_detection_efficiency(p, 0.80)) > 0.0);
    CHECK(eval(f, apply_detection_efficiency(p, 0.74)) < 0.0);
    CHECK(eval(f, apply_detection_efficiency(p, 1.0)) > 0.0);
}

TEST_CASE("functional serialization round trip") {
    BellFunctional f = make_i4422();
    f.constant = 0.25;
    std::stringstream ss;
    write_functional(ss, f);
    BellFunctional r = read_functional(ss);
    CHECK(r.scenario == f.scenario);
    CHECK(r.joint == f.joint);
    CHECK(r.margA == f.margA);
    CHECK(r.margB == f.margB);
    CHECK(r.constant == f.constant);
    CHECK(r.knownLocalBound == f.knownLocalBound);
}
