#include "diqkd/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace diqkd::sdp {

int BlockSDP::total_side() const {
    int s = 0;
    for (int b : blockSizes) s += std::abs(b);
    return s;
}

void BlockSDP::validate() const {
    if (numVars < 0) throw std::invalid_argument("sdp: negative variable count");
    if (static_cast<int>(objective.size()) != numVars ||
        static_cast<int>(varMatrices.size()) != numVars)
        throw std::invalid_argument("sdp: objective/matrix count mismatch");
    auto check = [&](const SparseEntry& e) {
        if (e.block < 0 || e.block >= static_cast<int>(blockSizes.size()))
            throw std::invalid_argument("sdp: entry block out of range");
        int side = std::abs(blockSizes[e.block]);
        if (e.row < 0 || e.col < e.row || e.col >= side)
            throw std::invalid_argument("sdp: entry position invalid (need row <= col < side)");
        if (blockSizes[e.block] < 0 && e.row != e.col)
            throw std::invalid_argument("sdp: off-diagonal entry in diagonal block");
    };
    for (const auto& e : constMatrix) check(e);
    for (const auto& fm : varMatrices)
        for (const auto& e : fm) check(e);
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::MaxIterations: return "max-iterations";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "?";
}

double SDPSolution::value(const BlockSDP& s) const {
    return s.maximize ? s.objectiveOffset - primalObjective : s.objectiveOffset + primalObjective;
}

double SDPSolution::dual_value(const BlockSDP& s) const {
    return s.maximize ? s.objectiveOffset - dualObjective : s.objectiveOffset + dualObjective;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct BlockVarEntries {
    // per block: entries of every F_i touching it, grouped by variable
    struct Slice {
        int var;
        int begin, end;  // into entry arrays
    };
    std::vector<Slice> slices;
    std::vector<int> rows, cols;
    std::vector<double> vals;
};

// tr(F M) for an upper-triangle entry list over one block.
double trace_dot(const std::vector<SparseEntry>& entries, const std::vector<MatrixXd>& mats) {
    double s = 0.0;
    for (const auto& e : entries) {
        const MatrixXd& m = mats[e.block];
        s += e.row == e.col ? e.value * m(e.row, e.col)
                            : e.value * (m(e.row, e.col) + m(e.col, e.row));
    }
    return s;
}

void add_to_blocks(std::vector<MatrixXd>& mats, const std::vector<SparseEntry>& entries,
                   double scale) {
    for (const auto& e : entries) {
        mats[e.block](e.row, e.col) += scale * e.value;
        if (e.row != e.col) mats[e.block](e.col, e.row) += scale * e.value;
    }
}

// Largest alpha in (0, cap] with M + alpha*D >= 0, via lambda_min(L^-1 D L^-T).
double max_step(const MatrixXd& m, const MatrixXd& d, double cap) {
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return 0.0;
    MatrixXd k = llt.matrixL().solve(d);
    k = llt.matrixL().solve(k.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (k + k.transpose()),
                                               Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-14) return cap;
    return std::min(cap, -1.0 / lmin);
}

}  // namespace

SDPSolution solve(const BlockSDP& prob, const SolveOptions& opts) {
    prob.validate();
    if (prob.total_side() > opts.sideCap)
        throw std::runtime_error(
            "sdp solve: total block side " + std::to_string(prob.total_side()) +
            " exceeds cap " + std::to_string(opts.sideCap) +
            "; export the problem in SDPA format and use an external solver");

    const int m = prob.numVars;
    const int nb = static_cast<int>(prob.blockSizes.size());
    std::vector<int> side(nb);
    int nTotal = 0;
    for (int b = 0; b < nb; ++b) {
        side[b] = std::abs(prob.blockSizes[b]);
        nTotal += side[b];
    }

    SDPSolution sol;
    // No variables: feasibility of -F_0 alone.
    if (m == 0) {
        sol.x.resize(0);
        bool ok = true;
        for (int b = 0; b < nb; ++b) {
            MatrixXd s0 = MatrixXd::Zero(side[b], side[b]);
            sol.slackBlocks.push_back(s0);
        }
        std::vector<MatrixXd> s0(nb);
        for (int b = 0; b < nb; ++b) s0[b] = MatrixXd::Zero(side[b], side[b]);
        add_to_blocks(s0, prob.constMatrix, -1.0);
        for (int b = 0; b < nb; ++b) {
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(s0[b], Eigen::EigenvaluesOnly);
            if (side[b] > 0 && es.eigenvalues().minCoeff() < -1e-9) ok = false;
        }
        sol.slackBlocks = s0;
        sol.status = ok ? SolveStatus::Optimal : SolveStatus::Infeasible;
        return sol;
    }

    // Group entries by block for the Schur assembly.
    std::vector<BlockVarEntries> blockEntries(nb);
    for (int i = 0; i < m; ++i) {
        std::vector<std::vector<const SparseEntry*>> perBlock(nb);
        for (const auto& e : prob.varMatrices[i]) perBlock[e.block].push_back(&e);
        for (int b = 0; b < nb; ++b) {
            if (perBlock[b].empty()) continue;
            auto& be = blockEntries[b];
            int begin = static_cast<int>(be.rows.size());
            for (const SparseEntry* e : perBlock[b]) {
                be.rows.push_back(e->row);
                be.cols.push_back(e->col);
                be.vals.push_back(e->value);
            }
            be.slices.push_back({i, begin, static_cast<int>(be.rows.size())});
        }
    }

    // Scale-aware starting point.
    double maxNorm = 1.0, maxC = 0.0;
    {
        auto fnorm = [&](const std::vector<SparseEntry>& es) {
            double s = 0.0;
            for (const auto& e : es) s += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
            return std::sqrt(s);
        };
        maxNorm = std::max(maxNorm, fnorm(prob.constMatrix));
        for (const auto& fm : prob.varMatrices) maxNorm = std::max(maxNorm, fnorm(fm));
        for (double c : prob.objective) maxC = std::max(maxC, std::abs(c));
    }
    const double betaS = 10.0 * (1.0 + maxNorm);
    const double betaY = 10.0 * (1.0 + maxC);

    VectorXd x = VectorXd::Zero(m);
    std::vector<MatrixXd> S(nb), Y(nb);
    for (int b = 0; b < nb; ++b) {
        S[b] = betaS * MatrixXd::Identity(side[b], side[b]);
        Y[b] = betaY * MatrixXd::Identity(side[b], side[b]);
    }

    const VectorXd c = Eigen::Map<const VectorXd>(prob.objective.data(), m);
    MatrixXd schur(m, m);
    VectorXd traceFY(m), traceFSinv(m), rhs(m), dx(m), dxa(m);
    std::vector<MatrixXd> Sinv(nb), Rd(nb), G(nb), dS(nb), dY(nb), dSa(nb), dYa(nb);

    auto block_residual = [&]() {
        // Rd = sum x_i F_i - F_0 - S
        for (int b = 0; b < nb; ++b) Rd[b] = -S[b];
        add_to_blocks(Rd, prob.constMatrix, -1.0);
        for (int i = 0; i < m; ++i)
            if (x[i] != 0.0) add_to_blocks(Rd, prob.varMatrices[i], x[i]);
    };

    const double diverge = 1e10 * (1.0 + maxC + maxNorm);
    double pobj = 0.0, dobj = 0.0, relgap = 1.0, primErr = 1.0, dualErr = 1.0;
    double prevP = 1e300, prevD = 1e300;
    int iter = 0;
    int stall = 0;
    bool stopped = false;

    for (iter = 0; iter < opts.maxIterations; ++iter) {
        block_residual();
        for (int i = 0; i < m; ++i) traceFY[i] = trace_dot(prob.varMatrices[i], Y);
        pobj = c.dot(x);
        dobj = trace_dot(prob.constMatrix, Y);
        primErr = 0.0;
        for (int i = 0; i < m; ++i) primErr = std::max(primErr, std::abs(c[i] - traceFY[i]));
        primErr /= 1.0 + maxC;
        dualErr = 0.0;
        for (int b = 0; b < nb; ++b) dualErr = std::max(dualErr, Rd[b].cwiseAbs().maxCoeff());
        dualErr /= 1.0 + maxNorm;
        relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        if (opts.verbose)
            std::fprintf(stderr, "iter %3d  pobj % .10e  dobj % .10e  gap %.2e  perr %.2e  derr %.2e\n",
                         iter, pobj, dobj, relgap, primErr, dualErr);

        if (relgap <= opts.gapTol && primErr <= opts.feasTol && dualErr <= opts.feasTol) {
            sol.status = SolveStatus::Optimal;
            stopped = true;
            break;
        }
        if (dobj > diverge && primErr <= 1e-6) {
            sol.status = SolveStatus::Infeasible;
            sol.message = "multiplier objective diverging: constraints are infeasible";
            stopped = true;
            break;
        }
        if (pobj < -diverge && dualErr <= 1e-6) {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "objective unbounded below";
            stopped = true;
            break;
        }
        // no meaningful progress: the iterate sits on the boundary of a
        // degenerate optimal face
        double scaleObj = 1.0 + std::abs(pobj) + std::abs(dobj);
        bool frozen = std::abs(pobj - prevP) < 1e-13 * scaleObj &&
                      std::abs(dobj - prevD) < 1e-13 * scaleObj;
        gapHistory.push_back(relgap);
        bool gapStuck = gapHistory.size() > 12 &&
                        relgap > 0.9 * gapHistory[gapHistory.size() - 13] &&
                        primErr <= 1000 * opts.feasTol;
        stall = frozen || gapStuck ? stall + 1 : 0;
        prevP = pobj;
        prevD = dobj;
        if (stall >= 3) break;

        double mu = 0.0;
        for (int b = 0; b < nb; ++b) mu += (Y[b].array() * S[b].array()).sum();
        mu /= nTotal;

        bool cholOk = true;
        for (int b = 0; b < nb; ++b) {
            Eigen::LLT<MatrixXd> llt(S[b]);
            if (llt.info() != Eigen::Success) {
                cholOk = false;
                break;
            }
            Sinv[b] = llt.solve(MatrixXd::Identity(side[b], side[b]));
        }
        if (!cholOk) {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "slack lost positive definiteness";
            break;
        }

        for (int i = 0; i < m; ++i) traceFSinv[i] = trace_dot(prob.varMatrices[i], Sinv);

        // Schur matrix M_ij = tr(F_i Sinv F_j Y), assembled block by block.
        schur.setZero();
        for (int b = 0; b < nb; ++b) {
            const auto& be = blockEntries[b];
            if (be.slices.empty()) continue;
            MatrixXd T(side[b], side[b]);
            for (const auto& si : be.slices) {
                // T = Sinv * F_i * Y from the sparse entries of F_i
                T.setZero();
                for (int k = si.begin; k < si.end; ++k) {
                    int r = be.rows[k], cc = be.cols[k];
                    double v = be.vals[k];
                    T.noalias() += v * (Sinv[b].col(r) * Y[b].row(cc));
                    if (r != cc) T.noalias() += v * (Sinv[b].col(cc) * Y[b].row(r));
                }
                for (const auto& sj : be.slices) {
                    double acc = 0.0;
                    for (int k = sj.begin; k < sj.end; ++k) {
                        int r = be.rows[k], cc = be.cols[k];
                        double v = be.vals[k];
                        acc += v * T(cc, r);
                        if (r != cc) acc += v * T(r, cc);
                    }
                    schur(si.var, sj.var) += acc;
                }
            }
        }

        Eigen::LLT<MatrixXd> schurLLT(schur);
        if (schurLLT.info() != Eigen::Success) {
            // regularize: redundant constraints can make the system semidefinite
            double reg = 1e-12 * (1.0 + schur.diagonal().maxCoeff());
            for (int attempt = 0; attempt < 6 && schurLLT.info() != Eigen::Success; ++attempt) {
                schur.diagonal().array() += reg;
                schurLLT.compute(schur);
                reg *= 100.0;
            }
            if (schurLLT.info() != Eigen::Success) {
                sol.status = SolveStatus::NumericalFailure;
                sol.message = "Schur system not positive definite";
                stopped = true;
                break;
            }
        }
        // one round of iterative refinement recovers digits lost to the
        // ill-conditioned Schur system near the optimum
        auto schur_solve = [&](const VectorXd& b) {
            VectorXd sln = schurLLT.solve(b);
            sln += schurLLT.solve(b - schur.selfadjointView<Eigen::Lower>() * sln);
            return sln;
        };

        // --- predictor (affine scaling) ---
        for (int b = 0; b < nb; ++b) G[b] = Sinv[b] * Rd[b] * Y[b];
        for (int i = 0; i < m; ++i) rhs[i] = -c[i] - trace_dot(prob.varMatrices[i], G);
        dxa = schur_solve(rhs);
        for (int b = 0; b < nb; ++b) dSa[b] = Rd[b];
        for (int i = 0; i < m; ++i)
            if (dxa[i] != 0.0) add_to_blocks(dSa, prob.varMatrices[i], dxa[i]);
        for (int b = 0; b < nb; ++b) {
            MatrixXd t = -Y[b] - Sinv[b] * (dSa[b] * Y[b]);
            dYa[b] = 0.5 * (t + t.transpose());
        }
        double apA = 1.0, adA = 1.0;
        for (int b = 0; b < nb; ++b) {
            apA = std::min(apA, max_step(Y[b], dYa[b], 1.0));
            adA = std::min(adA, max_step(S[b], dSa[b], 1.0));
        }
        double muAff = 0.0;
        for (int b = 0; b < nb; ++b)
            muAff += ((Y[b] + apA * dYa[b]).array() * (S[b] + adA * dSa[b]).array()).sum();
        muAff /= nTotal;
        double sigma = std::clamp(std::pow(muAff / mu, 3.0), 0.0, 1.0);

        // --- corrector ---
        for (int b = 0; b < nb; ++b) G[b] = Sinv[b] * (Rd[b] * Y[b] + dSa[b] * dYa[b]);
        for (int i = 0; i < m; ++i)
            rhs[i] = sigma * mu * traceFSinv[i] - c[i] - trace_dot(prob.varMatrices[i], G);
        dx = schur_solve(rhs);
        for (int b = 0; b < nb; ++b) dS[b] = Rd[b];
        for (int i = 0; i < m; ++i)
            if (dx[i] != 0.0) add_to_blocks(dS, prob.varMatrices[i], dx[i]);
        for (int b = 0; b < nb; ++b) {
            MatrixXd t = sigma * mu * Sinv[b] - Y[b] - Sinv[b] * (dS[b] * Y[b] + dSa[b] * dYa[b]);
            dY[b] = 0.5 * (t + t.transpose());
        }

        const double tau = iter < 2 ? 0.9 : 0.98;
        double ap = 1.0, ad = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, tau * max_step(Y[b], dY[b], 1.0 / tau));
            ad = std::min(ad, tau * max_step(S[b], dS[b], 1.0 / tau));
        }
        ap = std::min(ap, 1.0);
        ad = std::min(ad, 1.0);

        // keep both iterates strictly factorizable
        auto pd_after = [&](const std::vector<MatrixXd>& M, const std::vector<MatrixXd>& dM,
                            double a) {
            for (int b = 0; b < nb; ++b)
                if (Eigen::LLT<MatrixXd>(M[b] + a * dM[b]).info() != Eigen::Success) return false;
            return true;
        };
        for (int bt = 0; bt < 60 && ap > 1e-12 && !pd_after(Y, dY, ap); ++bt) ap *= 0.7;
        for (int bt = 0; bt < 60 && ad > 1e-12 && !pd_after(S, dS, ad); ++bt) ad *= 0.7;
        if (ap <= 1e-12 && ad <= 1e-12) break;  // no usable step

        x += ad * dx;
        for (int b = 0; b < nb; ++b) {
            S[b] += ad * dS[b];
            Y[b] += ap * dY[b];
        }
    }

    if (!stopped) {
        // iteration cap or stall: classify by the precision actually reached
        if (relgap <= 1000 * opts.gapTol && primErr <= 1000 * opts.feasTol &&
            dualErr <= 1000 * opts.feasTol) {
            sol.status = SolveStatus::MaxIterations;
            sol.message = iter >= opts.maxIterations
                              ? "iteration cap reached near optimum"
                              : "progress stalled near optimum";
        } else {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "did not converge";
        }
    }

    sol.primalObjective = pobj;
    sol.dualObjective = dobj;
    sol.dualityGap = relgap;
    sol.x = x;
    sol.slackBlocks = S;
    sol.multiplierBlocks = Y;
    sol.iterations = iter;
    return sol;
}

std::string export_sdpa(const BlockSDP& s, const std::string& name) {
    s.validate();
    std::string out;
    char buf[128];
    out += "\"" + name + "\n";
    out += std::to_string(s.numVars) + "\n";
    out += std::to_string(s.blockSizes.size()) + "\n";
    for (std::size_t b = 0; b < s.blockSizes.size(); ++b) {
        out += std::to_string(s.blockSizes[b]);
        out += (b + 1 < s.blockSizes.size()) ? " " : "";
    }
    out += "\n";
    for (int i = 0; i < s.numVars; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", s.objective[i]);
        out += buf;
        out += (i + 1 < s.numVars) ? " " : "";
    }
    out += "\n";
    auto emit = [&](int matno, const std::vector<SparseEntry>& entries) {
        std::vector<SparseEntry> sorted = entries;
        std::sort(sorted.begin(), sorted.end(), [](const SparseEntry& a, const SparseEntry& b) {
            return std::tie(a.block, a.row, a.col) < std::tie(b.block, b.row, b.col);
        });
        for (const auto& e : sorted) {
            if (e.value == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g\n", matno, e.block + 1, e.row + 1,
                          e.col + 1, e.value);
            out += buf;
        }
    };
    emit(0, s.constMatrix);
    for (int i = 0; i < s.numVars; ++i) emit(i + 1, s.varMatrices[i]);
    return out;
}

BlockSDP parse_sdpa(std::istream& is) {
    BlockSDP s;
    std::string line;
    // skip comment lines
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '"' || line[0] == '*') continue;
        break;
    }
    auto parse_ints = [](const std::string& l) {
        std::istringstream ss(l);
        std::vector<double> v;
        double d;
        while (ss >> d) v.push_back(d);
        return v;
    };
    s.numVars = static_cast<int>(std::stol(line));
    if (!std::getline(is, line)) throw std::runtime_error("sdpa parse: missing nBLOCK");
    int nblock = static_cast<int>(std::stol(line));
    if (!std::getline(is, line)) throw std::runtime_error("sdpa parse: missing block sizes");
    for (double d : parse_ints(line)) s.blockSizes.push_back(static_cast<int>(d));
    if (static_cast<int>(s.blockSizes.size()) != nblock)
        throw std::runtime_error("sdpa parse: block size count mismatch");
    if (!std::getline(is, line)) throw std::runtime_error("sdpa parse: missing objective");
    s.objective = parse_ints(line);
    if (static_cast<int>(s.objective.size()) != s.numVars)
        throw std::runtime_error("sdpa parse: objective length mismatch");
    s.varMatrices.resize(s.numVars);
    int matno, blk, i, j;
    double v;
    while (is >> matno >> blk >> i >> j >> v) {
        SparseEntry e{blk - 1, i - 1, j - 1, v};
        if (e.row > e.col) std::swap(e.row, e.col);
        if (matno == 0)
            s.constMatrix.push_back(e);
        else if (matno >= 1 && matno <= s.numVars)
            s.varMatrices[matno - 1].push_back(e);
        else
            throw std::runtime_error("sdpa parse: matrix index out of range");
    }
    s.validate();
    return s;
}

SdpaObjectives parse_sdpa_output(std::istream& is) {
    SdpaObjectives out;
    bool gotP = false, gotD = false;
    std::string line;
    while (std::getline(is, line)) {
        auto grab = [&](const char* key, double& dst, bool& flag) {
            auto pos = line.find(key);
            if (pos == std::string::npos) return;
            auto eq = line.find('=', pos);
            if (eq == std::string::npos) return;
            dst = std::stod(line.substr(eq + 1));
            flag = true;
        };
        grab("objValPrimal", out.primal, gotP);
        grab("objValDual", out.dual, gotD);
    }
    if (!gotP || !gotD) throw std::runtime_error("sdpa output parse: objective lines not found");
    return out;
}

}  // namespace diqkd::sdp
