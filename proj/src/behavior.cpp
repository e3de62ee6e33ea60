#include "diqkd/behavior.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "diqkd/quantum.hpp"

namespace diqkd {

namespace {

void check_scenario(const Scenario& sc) {
    if (sc.nA < 1 || sc.nB < 1 || sc.mA < 1 || sc.mB < 1)
        throw std::invalid_argument("scenario: all input/outcome counts must be >= 1");
}

}  // namespace

Behavior::Behavior(Scenario sc, std::vector<double> table) : sc_(sc), table_(std::move(table)) {
    check_scenario(sc_);
    if (table_.size() != static_cast<std::size_t>(sc_.joint_size()))
        throw std::invalid_argument("behavior: table size does not match scenario");
    for (auto& v : table_) {
        if (v < -1e-12 || v > 1.0 + 1e-12)
            throw std::invalid_argument("behavior: entry outside [0,1] beyond tolerance");
        if (v < 0.0) v = 0.0;  // clamp tiny negativity
    }
    for (int x = 1; x <= sc_.nA; ++x)
        for (int y = 1; y <= sc_.nB; ++y) {
            double s = 0.0;
            for (int a = 1; a <= sc_.mA; ++a)
                for (int b = 1; b <= sc_.mB; ++b) s += p(x, y, a, b);
            if (std::abs(s - 1.0) > 1e-9)
                throw std::invalid_argument("behavior: distribution at (" + std::to_string(x) +
                                            "," + std::to_string(y) + ") sums to " +
                                            std::to_string(s));
        }
}

std::size_t Behavior::index(int x, int y, int a, int b) const {
    if (x < 1 || x > sc_.nA || y < 1 || y > sc_.nB || a < 1 || a > sc_.mA || b < 1 || b > sc_.mB)
        throw std::out_of_range("behavior: index out of range");
    return ((static_cast<std::size_t>(x - 1) * sc_.nB + (y - 1)) * sc_.mA + (a - 1)) * sc_.mB +
           (b - 1);
}

Behavior Behavior::uniform(Scenario sc) {
    check_scenario(sc);
    return Behavior(sc, std::vector<double>(sc.joint_size(), 1.0 / (sc.mA * sc.mB)));
}

Behavior Behavior::deterministic(Scenario sc, int a, int b) {
    check_scenario(sc);
    if (a < 1 || a > sc.mA || b < 1 || b > sc.mB)
        throw std::out_of_range("deterministic behavior: outcome out of range");
    std::vector<double> t(sc.joint_size(), 0.0);
    for (int x = 1; x <= sc.nA; ++x)
        for (int y = 1; y <= sc.nB; ++y)
            t[((static_cast<std::size_t>(x - 1) * sc.nB + (y - 1)) * sc.mA + (a - 1)) * sc.mB +
              (b - 1)] = 1.0;
    return Behavior(sc, std::move(t));
}

double Behavior::marginal_A(int a, int x, int yRef) const {
    double s = 0.0;
    for (int b = 1; b <= sc_.mB; ++b) s += p(x, yRef, a, b);
    return s;
}

double Behavior::marginal_B(int b, int y, int xRef) const {
    double s = 0.0;
    for (int a = 1; a <= sc_.mA; ++a) s += p(xRef, y, a, b);
    return s;
}

NoSignalingReport check_no_signaling(const Behavior& p, double tol) {
    const Scenario& sc = p.scenario();
    NoSignalingReport rep;
    char buf[128];
    // Alice's marginal must not depend on y.
    for (int x = 1; x <= sc.nA; ++x)
        for (int a = 1; a <= sc.mA; ++a) {
            double ref = p.marginal_A(a, x, 1);
            for (int y = 2; y <= sc.nB; ++y) {
                double dev = std::abs(p.marginal_A(a, x, y) - ref);
                if (dev > rep.max_deviation) {
                    rep.max_deviation = dev;
                    std::snprintf(buf, sizeof buf, "p_A(%d|%d) varies with y=%d", a, x, y);
                    rep.detail = buf;
                }
            }
        }
    for (int y = 1; y <= sc.nB; ++y)
        for (int b = 1; b <= sc.mB; ++b) {
            double ref = p.marginal_B(b, y, 1);
            for (int x = 2; x <= sc.nA; ++x) {
                double dev = std::abs(p.marginal_B(b, y, x) - ref);
                if (dev > rep.max_deviation) {
                    rep.max_deviation = dev;
                    std::snprintf(buf, sizeof buf, "p_B(%d|%d) varies with x=%d", b, y, x);
                    rep.detail = buf;
                }
            }
        }
    rep.pass = rep.max_deviation <= tol;
    return rep;
}

Behavior apply_detection_efficiency(const Behavior& p, double eta) {
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("apply_detection_efficiency: eta outside [0,1]");
    if (eta == 1.0) return p;
    const Scenario& sc = p.scenario();
    const double etaBar = 1.0 - eta;
    Behavior out = p;
    for (int x = 1; x <= sc.nA; ++x)
        for (int y = 1; y <= sc.nB; ++y)
            for (int a = 1; a <= sc.mA; ++a)
                for (int b = 1; b <= sc.mB; ++b) {
                    double v = eta * eta * p.p(x, y, a, b);
                    if (a == sc.mA) v += eta * etaBar * p.marginal_B(b, y);
                    if (b == sc.mB) v += eta * etaBar * p.marginal_A(a, x);
                    if (a == sc.mA && b == sc.mB) v += etaBar * etaBar;
                    out.set_p(x, y, a, b, v);
                }
    return out;
}

Behavior degrade(const QuantumRealization& q, const NoiseParams& noise) {
    QuantumRealization noisy = q;
    noisy.state = depolarize(q.state, noise.v);
    return apply_detection_efficiency(behavior_from_realization(noisy), noise.eta);
}

void write_behavior(std::ostream& os, const Behavior& p) {
    const Scenario& sc = p.scenario();
    os << sc.nA << ' ' << sc.nB << ' ' << sc.mA << ' ' << sc.mB << '\n';
    char buf[64];
    for (int x = 1; x <= sc.nA; ++x)
        for (int y = 1; y <= sc.nB; ++y)
            for (int a = 1; a <= sc.mA; ++a)
                for (int b = 1; b <= sc.mB; ++b) {
                    std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g", x, y, a, b,
                                  p.p(x, y, a, b));
                    os << buf << '\n';
                }
}

Behavior read_behavior(std::istream& is) {
    Scenario sc;
    if (!(is >> sc.nA >> sc.nB >> sc.mA >> sc.mB))
        throw std::runtime_error("behavior parse: bad header");
    check_scenario(sc);
    std::vector<double> table(sc.joint_size(), 0.0);
    int x, y, a, b;
    double v;
    int rows = 0;
    while (is >> x >> y >> a >> b >> v) {
        if (x < 1 || x > sc.nA || y < 1 || y > sc.nB || a < 1 || a > sc.mA || b < 1 || b > sc.mB)
            throw std::runtime_error("behavior parse: index out of range");
        table[((static_cast<std::size_t>(x - 1) * sc.nB + (y - 1)) * sc.mA + (a - 1)) * sc.mB +
              (b - 1)] = v;
        ++rows;
    }
    if (rows != sc.joint_size()) throw std::runtime_error("behavior parse: wrong row count");
    return Behavior(sc, std::move(table));
}

}  // namespace diqkd
