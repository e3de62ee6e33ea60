#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "diqkd/behavior.hpp"
#include "diqkd/entropy.hpp"
#include "diqkd/functional.hpp"
#include "diqkd/quantum.hpp"

namespace diqkd {

struct KeyRatePoint {
    double eta = 1.0;
    double v = 1.0;
    double bellValue = 0.0;
    double haeBound = 0.0;  // bits
    double hab = 0.0;       // bits
    double rate = 0.0;      // Devetak-Winter, haeBound - hab
};

struct KeyRateCurve {
    std::string param;  // "eta" or "v"
    std::vector<KeyRatePoint> points;
    std::optional<double> threshold;
};

// Conditional Shannon entropy H(A|B) of the key setting,
//   -sum_ab p log2 p + sum_b p_B log2 p_B,  with 0 log 0 = 0.
double h_ab(const Behavior& p, int keyX, int keyY);

double devetak_winter(double hae, double hab);

struct ThresholdResult {
    std::optional<double> threshold;
    bool monotone = true;  // grid pre-scan verdict
};

// Bisection on the zero crossing of `rate` over [lo, hi]; requires
// rate(lo) <= 0 <= rate(hi), otherwise reports no crossing. The rate is
// assumed monotone; a coarse pre-scan records violations.
ThresholdResult scan_threshold(const std::function<double(double)>& rate, double lo, double hi,
                               double tol, int preScanPoints = 5);

// Full key-rate pipeline for one protocol: degrade the realization (with
// Bob's key measurement appended), evaluate the Bell functional on the test
// part, bound H(A|E) from the test-part behavior, and compute H(A|B) on the
// key setting.
struct KeyRateJob {
    QuantumRealization realization;  // test measurements only
    BellFunctional functional;
    Measurement bobKey;  // empty -> transpose of Alice's measurement 1
    int k = 1;
    npa::Level level = npa::Level{1, true};
    std::vector<npa::Monomial> extras;
    EntropyOptions entropy;
    sdp::SolveOptions solver;
};

KeyRatePoint key_rate_point(const KeyRateJob& job, double eta, double v);

// Restriction of a behavior to Bob inputs 1..nB.
Behavior restrict_bob_inputs(const Behavior& p, int nB);

// CSV: header "param,eta,v,bell,hae,hab,rate", 12 significant digits.
void write_curve_csv(std::ostream& os, const KeyRateCurve& curve);

}  // namespace diqkd
