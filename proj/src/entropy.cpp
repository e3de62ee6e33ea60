#include "diqkd/entropy.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace diqkd {

using npa::Monomial;
using npa::Party;
using npa::RelaxationProblem;

std::vector<Monomial> va_cross_monomials(const Scenario& sc, int k) {
    std::vector<Monomial> out;
    for (int j = 1; j <= k; ++j)
        for (int a = 1; a <= sc.mA; ++a)
            for (bool adj : {false, true})
                for (int x = 1; x <= sc.nA; ++x)
                    for (int ra = 1; ra < sc.mA; ++ra)
                        out.push_back(npa::reduce(Monomial{
                            {npa::projector(Party::A, x, ra), npa::eve_op(j, a, adj)}, false}));
    return out;
}

namespace {

std::vector<Monomial> eve_monomials(const Scenario& sc, int k) {
    std::vector<Monomial> out;
    for (int j = 1; j <= k; ++j)
        for (int a = 1; a <= sc.mA; ++a)
            for (bool adj : {false, true})
                out.push_back(Monomial{{npa::eve_op(j, a, adj)}, false});
    return out;
}

// poly g as (coeff, word) pairs -> localizing block over `basis`
RelaxationProblem::LocalizingBlock make_localizing(RelaxationProblem& r, const std::string& label,
                                                   const std::vector<Monomial>& basis,
                                                   const std::vector<std::pair<double, Monomial>>& poly) {
    RelaxationProblem::LocalizingBlock blk;
    blk.label = label;
    blk.basis = basis;
    const int side = static_cast<int>(basis.size());
    blk.cells.resize(side);
    for (int s = 0; s < side; ++s) {
        Monomial bra = npa::adjoint(basis[s]);
        blk.cells[s].resize(side - s);
        for (int t = s; t < side; ++t) {
            npa::LinExpr expr;
            for (const auto& [coeff, g] : poly) {
                Monomial w = npa::concat(npa::concat(bra, g), basis[t]);
                if (w.zero || coeff == 0.0) continue;
                expr[r.class_of(w)] += coeff;
            }
            std::erase_if(expr, [](const auto& kv) { return kv.second == 0.0; });
            blk.cells[s][t - s] = std::move(expr);
        }
    }
    return blk;
}

}  // namespace

EntropyProgram build_entropy_program(const Behavior& p, int k, npa::Level level,
                                     const std::vector<Monomial>& extras,
                                     const EntropyOptions& opts) {
    if (k < 1) throw std::invalid_argument("entropy: k must be >= 1");
    const Scenario& sc = p.scenario();
    if (opts.keyInput < 1 || opts.keyInput > sc.nA)
        throw std::invalid_argument("entropy: key input out of range");

    EntropyProgram prog;
    prog.k = k;
    prog.alpha = 1.0 + 1.0 / (std::pow(2.0, k) - 1.0);
    prog.keyInput = opts.keyInput;
    prog.level = level;

    std::vector<Monomial> allExtras = eve_monomials(sc, k);
    allExtras.insert(allExtras.end(), extras.begin(), extras.end());
    RelaxationProblem r = npa::behavior_constrained_relaxation(p, level, allExtras);
    if (static_cast<int>(r.basis.size()) > opts.momentSideCap)
        throw std::runtime_error("entropy: moment matrix side " +
                                 std::to_string(r.basis.size()) + " exceeds cap " +
                                 std::to_string(opts.momentSideCap));

    // localizing basis
    std::vector<Monomial> locBasis =
        npa::generate_monomials(sc, npa::Level{opts.localizingLevel, false});
    if (opts.localizingIncludesEve) {
        auto evs = eve_monomials(sc, k);
        locBasis.insert(locBasis.end(), evs.begin(), evs.end());
    }

    // sum_a V*_{k,a} V_{k,a} <= I
    std::vector<std::pair<double, Monomial>> gSum{{1.0, Monomial::one()}};
    for (int a = 1; a <= sc.mA; ++a)
        gSum.push_back({-1.0, Monomial{{npa::eve_op(k, a, true), npa::eve_op(k, a, false)}, false}});
    r.localizing.push_back(make_localizing(r, "sum V*V <= I", locBasis, gSum));

    // V_{1,a} + V*_{1,a} >= 0
    for (int a = 1; a <= sc.mA; ++a) {
        std::vector<std::pair<double, Monomial>> g{
            {1.0, Monomial{{npa::eve_op(1, a, false)}, false}},
            {1.0, Monomial{{npa::eve_op(1, a, true)}, false}}};
        r.localizing.push_back(
            make_localizing(r, "V+V* >= 0, a=" + std::to_string(a), locBasis, g));
    }

    // cascade: 2 V*_{i,a} V_{i,a} <= V_{i+1,a} + V*_{i+1,a}
    for (int i = 1; i < k; ++i)
        for (int a = 1; a <= sc.mA; ++a) {
            std::vector<std::pair<double, Monomial>> g{
                {1.0, Monomial{{npa::eve_op(i + 1, a, false)}, false}},
                {1.0, Monomial{{npa::eve_op(i + 1, a, true)}, false}},
                {-2.0, Monomial{{npa::eve_op(i, a, true), npa::eve_op(i, a, false)}, false}}};
            r.localizing.push_back(make_localizing(
                r, "cascade i=" + std::to_string(i) + ", a=" + std::to_string(a), locBasis, g));
        }

    // objective: sum_a <M_a (V_{1,a} + V*_{1,a})/2>, key-measurement operators
    // expanded over retained projector symbols
    npa::LinExpr obj;
    double objConst = 0.0;
    for (int a = 1; a <= sc.mA; ++a) {
        auto mTerms = npa::expand_projector(Party::A, opts.keyInput, a, sc.mA);
        for (bool adj : {false, true}) {
            Monomial v{{npa::eve_op(1, a, adj)}, false};
            for (const auto& [c, w] : mTerms) {
                Monomial prod = npa::concat(w, v);
                if (prod.zero) continue;
                obj[r.class_of(prod)] += 0.5 * c;
            }
        }
    }
    std::erase_if(obj, [](const auto& kv) { return kv.second == 0.0; });
    r.objective = std::move(obj);
    r.objectiveConstant = objConst;

    prog.relaxation = std::move(r);
    return prog;
}

EntropyBound entropy_lower_bound(const EntropyProgram& prog, const sdp::SolveOptions& solver,
                                 std::ostream* certificate) {
    sdp::BlockSDP s = sdp::compile(prog.relaxation);
    sdp::SDPSolution sol = sdp::solve(s, solver);
    EntropyBound out;
    out.status = sol.status;
    out.dualityGap = sol.dualityGap;
    out.iterations = sol.iterations;
    // the multiplier side certifies Q* <= q, so alpha/(1-alpha)*log2(q)
    // remains a valid entropy lower bound even on stalled solves
    out.q = sol.dual_value(s);
    if (sol.status == sdp::SolveStatus::Infeasible ||
        sol.status == sdp::SolveStatus::NumericalFailure)
        throw std::runtime_error(std::string("entropy: solver failed with status ") +
                                 sdp::to_string(sol.status) +
                                 (sol.message.empty() ? "" : ": " + sol.message));
    if (out.q <= 0.0)
        throw std::runtime_error("entropy: nonpositive relaxation optimum");
    // H = alpha/(1-alpha) * log2 Q; negative values are numerical slack on a
    // true 0 bound, so clamp.
    out.bits = std::max(0.0, prog.alpha / (1.0 - prog.alpha) * std::log2(out.q));

    if (certificate) {
        std::ostream& os = *certificate;
        char buf[160];
        os << "entropy-certificate k " << prog.k << "\n";
        std::snprintf(buf, sizeof buf, "alpha %.17g\n", prog.alpha);
        os << buf << "level " << prog.level.str() << "\n";
        std::snprintf(buf, sizeof buf, "q_primal %.17g\nq_gap %.17g\nbits %.17g\n", out.q,
                      sol.dualityGap, out.bits);
        os << buf;
        os << "status " << sdp::to_string(sol.status) << "\n";
        os << "moment-vector " << sol.x.size() << "\n";
        for (Eigen::Index i = 0; i < sol.x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g\n", sol.x[i]);
            os << buf;
        }
        os << "multiplier-blocks " << sol.multiplierBlocks.size() << "\n";
        for (const auto& m : sol.multiplierBlocks) {
            os << "block " << m.rows() << "\n";
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j) {
                    std::snprintf(buf, sizeof buf, "%.17g%c", m(i, j),
                                  j + 1 == m.cols() ? '\n' : ' ');
                    os << buf;
                }
        }
    }
    return out;
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("binary_entropy: x outside [0,1]");
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

double chsh_analytic_bound(double s) {
    const double tsirelson = 2.0 * std::sqrt(2.0);
    if (s < 2.0 - 1e-12 || s > tsirelson + 1e-9)
        throw std::invalid_argument("chsh_analytic_bound: S outside [2, 2*sqrt(2)]");
    double disc = std::max(0.0, s * s / 4.0 - 1.0);
    double arg = std::min(1.0, (1.0 + std::sqrt(disc)) / 2.0);
    return 1.0 - binary_entropy(arg);
}

}  // namespace diqkd
