#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "diqkd/behavior.hpp"
#include "diqkd/quantum.hpp"

namespace diqkd::testing {

inline Measurement two_outcome_from_observable(const CMatrix& obs) {
    const CMatrix id = CMatrix::Identity(obs.rows(), obs.cols());
    Measurement m;
    m.effects = {0.5 * (id + obs), 0.5 * (id - obs)};
    return m;
}

// Singlet-based CHSH realization with S = 2(cos(mu) + sin(mu)); mu = pi/4
// gives the Tsirelson point, mu = 0 the local boundary.
inline QuantumRealization make_chsh_realization(double mu) {
    QuantumRealization q;
    q.state = maximally_entangled(2);
    q.alice = {two_outcome_from_observable(pauli_z()), two_outcome_from_observable(pauli_x())};
    CMatrix b1 = std::cos(mu) * pauli_z() + std::sin(mu) * pauli_x();
    CMatrix b2 = std::cos(mu) * pauli_z() - std::sin(mu) * pauli_x();
    q.bob = {two_outcome_from_observable(b1), two_outcome_from_observable(b2)};
    return q;
}

inline double chsh_angle_for(double s) { return std::asin(s / (2.0 * std::sqrt(2.0))) - M_PI / 4; }

inline Behavior random_deterministic_behavior(const Scenario& sc, std::mt19937_64& rng) {
    std::vector<int> sa(sc.nA), sb(sc.nB);
    for (int& v : sa) v = static_cast<int>(rng() % sc.mA) + 1;
    for (int& v : sb) v = static_cast<int>(rng() % sc.mB) + 1;
    std::vector<double> t(sc.joint_size(), 0.0);
    Behavior out(sc, [&] {
        for (int x = 1; x <= sc.nA; ++x)
            for (int y = 1; y <= sc.nB; ++y)
                t[((static_cast<std::size_t>(x - 1) * sc.nB + (y - 1)) * sc.mA + (sa[x - 1] - 1)) *
                      sc.mB +
                  (sb[y - 1] - 1)] = 1.0;
        return t;
    }());
    return out;
}

inline Behavior random_behavior(const Scenario& sc, std::mt19937_64& rng, int mixture = 6) {
    std::vector<double> t(sc.joint_size(), 0.0);
    std::vector<double> w(mixture);
    double total = 0;
    for (double& x : w) {
        x = (rng() >> 11) * 0x1.0p-53 + 1e-3;
        total += x;
    }
    for (int i = 0; i < mixture; ++i) {
        Behavior d = random_deterministic_behavior(sc, rng);
        for (std::size_t j = 0; j < t.size(); ++j) t[j] += w[i] / total * d.table()[j];
    }
    return Behavior(sc, std::move(t));
}

}  // namespace diqkd::testing
