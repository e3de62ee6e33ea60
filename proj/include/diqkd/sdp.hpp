#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace diqkd::npa {
struct RelaxationProblem;
}

namespace diqkd::sdp {

// One upper-triangle entry (row <= col) of a symmetric matrix inside a block;
// indices are 0-based here, 1-based only in the SDPA file format.
struct SparseEntry {
    int block = 0;
    int row = 0;
    int col = 0;
    double value = 0.0;

    bool operator==(const SparseEntry&) const = default;
};

// Block SDP in SDPA standard form:
//   minimize  c'x   subject to   S(x) = sum_i x_i F_i - F_0  >=  0.
// A negative block size denotes a diagonal block (format-level distinction;
// the solver treats it as a dense block).
//
// `maximize` and `objectiveOffset` are solver-side metadata for problems
// compiled from maximization relaxations; they are not part of the file
// format. The user-sense optimum is offset - c'x for maximize problems.
struct BlockSDP {
    std::vector<int> blockSizes;
    int numVars = 0;
    std::vector<double> objective;                     // c
    std::vector<std::vector<SparseEntry>> varMatrices; // F_1..F_m
    std::vector<SparseEntry> constMatrix;              // F_0
    bool maximize = false;
    double objectiveOffset = 0.0;

    int total_side() const;
    void validate() const;

    bool operator==(const BlockSDP&) const = default;
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolveOptions {
    double gapTol = 1e-7;
    double feasTol = 1e-8;
    int maxIterations = 200;
    int sideCap = 2000;  // refuse larger problems; export them instead
    bool verbose = false;
};

struct SDPSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    double primalObjective = 0.0;  // c'x
    double dualObjective = 0.0;    // tr(F_0 Y)
    double dualityGap = 0.0;       // |primal - dual| / (1 + |primal| + |dual|)
    Eigen::VectorXd x;
    std::vector<Eigen::MatrixXd> slackBlocks;       // S(x), PSD at optimum
    std::vector<Eigen::MatrixXd> multiplierBlocks;  // Y, PSD
    int iterations = 0;
    std::string message;

    // Optimum in the sense the problem was stated (handles maximize/offset).
    double value(const BlockSDP& s) const;
    // Same from the multiplier side; for maximize problems this is the
    // certified upper bound (>= value up to feasibility error).
    double dual_value(const BlockSDP& s) const;
};

SDPSolution solve(const BlockSDP& s, const SolveOptions& opts = {});

// Bridge from the relaxation builder: one PSD block per moment/localizing
// matrix, equality pins eliminated by substitution.
BlockSDP compile(const npa::RelaxationProblem& r);

// Bit-exact SDPA sparse format (.dat-s): a leading '"name' comment line, then
// mDIM / nBLOCK / block sizes / objective, then "matno blkno i j value" rows
// (1-based, i <= j, matno 0 is F_0), 17 significant digits, LF endings.
std::string export_sdpa(const BlockSDP& s, const std::string& name);
BlockSDP parse_sdpa(std::istream& is);

// Reads "objValPrimal = ..." / "objValDual = ..." lines from an SDPA solver
// output file.
struct SdpaObjectives {
    double primal = 0.0;
    double dual = 0.0;
};
SdpaObjectives parse_sdpa_output(std::istream& is);

}  // namespace diqkd::sdp
