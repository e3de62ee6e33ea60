#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "diqkd/behavior.hpp"
#include "diqkd/npa.hpp"
#include "diqkd/sdp.hpp"

namespace diqkd {

// H(A|E) lower bounds from the iterated-mean Renyi-divergence program,
// alpha_k = 1 + 1/(2^k - 1), relaxed through the moment hierarchy:
//   maximize sum_a <M_a (V_{1,a} + V*_{1,a})/2>
//   s.t.  sum_a V*_{k,a} V_{k,a} <= I,   V_{1,a} + V*_{1,a} >= 0,
//         2 V*_{i,a} V_{i,a} <= V_{i+1,a} + V*_{i+1,a}   (i < k),
// with the observed behavior pinned. The bound is alpha/(1-alpha) * log2(Q),
// clamped at 0.

struct EntropyOptions {
    // localizing-matrix basis: words up to this level; Eve symbols included
    // unless disabled
    int localizingLevel = 1;
    bool localizingIncludesEve = true;
    int momentSideCap = 400;  // refuse bigger moment matrices
    int keyInput = 1;
};

struct EntropyProgram {
    int k = 1;
    double alpha = 2.0;
    int keyInput = 1;
    npa::Level level;
    npa::RelaxationProblem relaxation;
};

// V_{j,a} * A_{a'|x} cross words, the documented extra-monomial profile.
std::vector<npa::Monomial> va_cross_monomials(const Scenario& sc, int k);

EntropyProgram build_entropy_program(const Behavior& p, int k, npa::Level level,
                                     const std::vector<npa::Monomial>& extras = {},
                                     const EntropyOptions& opts = {});

struct EntropyBound {
    double bits = 0.0;    // max(0, alpha/(1-alpha) * log2 q)
    double q = 0.0;       // relaxation optimum of the divergence program
    sdp::SolveStatus status = sdp::SolveStatus::NumericalFailure;
    double dualityGap = 0.0;
    int iterations = 0;
};

// Solves the program; writes a verification certificate (bound, objective
// pair, moment vector, block multipliers) to `certificate` when given.
EntropyBound entropy_lower_bound(const EntropyProgram& prog,
                                 const sdp::SolveOptions& solver = {},
                                 std::ostream* certificate = nullptr);

// h(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0.
double binary_entropy(double x);

// Analytic CHSH bound H(A|E) >= 1 - h((1 + sqrt(S^2/4 - 1))/2) for
// 2 <= S <= 2*sqrt(2).
double chsh_analytic_bound(double s);

}  // namespace diqkd
