#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace diqkd {

struct QuantumRealization;

// Bipartite measurement scenario: nA/nB inputs, mA/mB outcomes per party.
struct Scenario {
    int nA = 0;
    int nB = 0;
    int mA = 0;
    int mB = 0;

    bool operator==(const Scenario&) const = default;
    int joint_size() const { return nA * nB * mA * mB; }
};

// Full table of conditional probabilities p(a,b|x,y).
//
// All public indices are 1-based, following the usual Bell-scenario labeling
// (inputs x in 1..nA, outcomes a in 1..mA); storage is 0-based row-major in
// (x,y,a,b) order.
class Behavior {
  public:
    Behavior() = default;
    Behavior(Scenario sc, std::vector<double> table);

    static Behavior uniform(Scenario sc);
    // All probability mass on outcome pair (a,b), for every input pair.
    static Behavior deterministic(Scenario sc, int a, int b);

    const Scenario& scenario() const { return sc_; }
    const std::vector<double>& table() const { return table_; }

    double p(int x, int y, int a, int b) const { return table_[index(x, y, a, b)]; }
    void set_p(int x, int y, int a, int b, double v) { table_[index(x, y, a, b)] = v; }

    // p_A(a|x) summed over Bob's outcomes at Bob input `yRef` (default 1).
    double marginal_A(int a, int x, int yRef = 1) const;
    // p_B(b|y) summed over Alice's outcomes at Alice input `xRef` (default 1).
    double marginal_B(int b, int y, int xRef = 1) const;

    std::size_t index(int x, int y, int a, int b) const;

  private:
    Scenario sc_;
    std::vector<double> table_;
};

struct NoiseParams {
    double eta = 1.0;  // detection efficiency
    double v = 1.0;    // visibility
};

struct NoSignalingReport {
    double max_deviation = 0.0;
    bool pass = false;
    // Worst offending marginal, for diagnostics.
    std::string detail;
};

// Max deviation of one party's marginals across the other party's inputs.
NoSignalingReport check_no_signaling(const Behavior& p, double tol);

// Limited-detection-efficiency map: nondetections are binned to the last
// outcome m of each party,
//   p'(a,b|x,y) = eta^2 p + eta*(1-eta)*[d_{a,mA} p_B(b|y) + d_{b,mB} p_A(a|x)]
//                 + d_{a,mA} d_{b,mB} (1-eta)^2,
// with marginals taken from the pre-transformation behavior.
Behavior apply_detection_efficiency(const Behavior& p, double eta);

// Depolarize the state by v, compute the behavior, then apply the efficiency
// map with eta -- in that order.
Behavior degrade(const QuantumRealization& q, const NoiseParams& noise);

// Text interchange format: header line "nA nB mA mB", then one line per
// (x,y,a,b) in row-major order holding "x y a b p" with p printed to 17
// significant digits.
void write_behavior(std::ostream& os, const Behavior& p);
Behavior read_behavior(std::istream& is);

}  // namespace diqkd
