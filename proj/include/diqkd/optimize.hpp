#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "diqkd/functional.hpp"
#include "diqkd/quantum.hpp"

namespace diqkd {

// --- derivative-free search ---

struct NelderMeadOptions {
    int maxIterations = 600;
    double fTol = 1e-11;
    double initialStep = 0.3;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
};

NelderMeadResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0, const NelderMeadOptions& opts);

struct SearchOptions {
    int starts = 32;
    std::uint64_t seed = 1;
    NelderMeadOptions nm;
    std::ostream* log = nullptr;  // per-start best value, params, eval count
};

// --- parametrized families ---

// Partially entangled ququart family with the published sign pattern:
// state sqrt((1-eps^2)/3)(|11>+|22>+|33>) + eps|44>; measurements are rank-1
// projectors with coefficient vectors built from (u, v, p1, p2 / q1, q2),
// each renormalized on realization.
struct ParamFamily4422 {
    double epsilon = 0.5;
    double u = 0.0, v = 0.0;
    Eigen::Vector2d p1{0, 0}, p2{0, 0}, q1{0, 0}, q2{0, 0};

    static ParamFamily4422 q4422_point();  // back-fit of the published tables
    Eigen::VectorXd pack() const;          // 11 parameters
    static ParamFamily4422 unpack(const Eigen::VectorXd& x);
};

QuantumRealization realize_4422(const ParamFamily4422& params);

enum class Ansatz234 { Planar, FourierPhase, CommutingPair };

Ansatz234 parse_ansatz(const std::string& name);
const char* to_string(Ansatz234 a);

// theta1/theta2 state family; measurement angles by ansatz:
//   Planar:        per measurement (alpha, beta), one planar qubit observable
//                  per factor; 6 angles per party
//   FourierPhase:  4 phases per measurement; 12 per party
//   CommutingPair: per-operator planar angles in the paired-observable layout
//                  (2+2+4 per party); the two measurement-3 observables must
//                  commute
struct ParamFamily234 {
    double theta1 = M_PI / 4, theta2 = M_PI / 4;
    Ansatz234 ansatz = Ansatz234::CommutingPair;
    std::vector<double> aliceAngles;
    std::vector<double> bobAngles;

    static ParamFamily234 q234_point();  // exact commuting-pair specialization
    static int angles_per_party(Ansatz234 a);
};

QuantumRealization realize_234(const ParamFamily234& params);

// --- searches ---

struct ViolationResult {
    Eigen::VectorXd params;
    double value = 0.0;
    int starts = 0;
    int evaluations = 0;
    std::vector<double> startValues;
};

// Best found value of eval(f, degrade(realize(params), {eta, 1})) under
// multi-start Nelder-Mead; start 0 is the known reference point, so the
// result never falls below it. Deterministic for fixed seed.
ViolationResult maximize_violation_4422(const BellFunctional& f, double eta,
                                        const SearchOptions& opts = {});
ViolationResult maximize_violation_234(const BellFunctional& f, Ansatz234 ansatz, double eta,
                                       const SearchOptions& opts = {});

// Bob key measurement minimizing H(A|B) for Alice's measurement `keyX`,
// over projective measurements U |b><b| U* (two-outcome scenarios use
// {U P U*, 1 - U P U*} with rank-1 P). The default transpose measurement is
// the first start, so the optimum never exceeds its entropy.
struct KeyMeasurementResult {
    Measurement measurement;
    double hab = 0.0;
    int evaluations = 0;
};
KeyMeasurementResult optimize_key_measurement(const QuantumRealization& q,
                                              const SearchOptions& opts = {}, int keyX = 1);

}  // namespace diqkd
