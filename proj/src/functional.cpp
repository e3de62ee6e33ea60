#include "diqkd/functional.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace diqkd {

void BellFunctional::prune() {
    std::erase_if(joint, [](const auto& kv) { return kv.second == 0.0; });
    std::erase_if(margA, [](const auto& kv) { return kv.second == 0.0; });
    std::erase_if(margB, [](const auto& kv) { return kv.second == 0.0; });
}

double eval(const BellFunctional& f, const Behavior& p) {
    if (!(f.scenario == p.scenario()))
        throw std::invalid_argument("eval: functional/behavior scenario mismatch");
    double s = f.constant;
    for (const auto& [k, c] : f.joint) s += c * p.p(k[0], k[1], k[2], k[3]);
    for (const auto& [k, c] : f.margA) s += c * p.marginal_A(k[1], k[0]);
    for (const auto& [k, c] : f.margB) s += c * p.marginal_B(k[1], k[0]);
    return s;
}

BellFunctional make_i4422() {
    BellFunctional f;
    f.scenario = {4, 4, 2, 2};
    // I_CH^(i,j;u,v) = p(1,1|i,u) + p(1,1|j,u) + p(1,1|i,v) - p(1,1|j,v)
    //                  - p_A(1|i) - p_B(1|u)
    auto add_ch = [&](int i, int j, int u, int v, double sign) {
        f.joint[{i, u, 1, 1}] += sign;
        f.joint[{j, u, 1, 1}] += sign;
        f.joint[{i, v, 1, 1}] += sign;
        f.joint[{j, v, 1, 1}] -= sign;
        f.margA[{i, 1}] -= sign;
        f.margB[{u, 1}] -= sign;
    };
    add_ch(1, 2, 1, 2, +1.0);
    add_ch(3, 4, 3, 4, +1.0);
    add_ch(2, 1, 4, 3, -1.0);
    add_ch(4, 3, 2, 1, -1.0);
    f.margA[{2, 1}] -= 1.0;
    f.margA[{4, 1}] -= 1.0;
    f.margB[{2, 1}] -= 1.0;
    f.margB[{4, 1}] -= 1.0;
    f.prune();
    f.knownLocalBound = 0.0;
    return f;
}

namespace {

// The 72 unit terms of I_234: per setting (x,y), the eight (a,b) pairs.
struct I234Line {
    int x, y;
    int ab[8][2];
};
constexpr I234Line kI234[9] = {
    {1, 1, {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 3}, {3, 4}, {4, 3}, {4, 4}}},
    {1, 2, {{1, 1}, {1, 2}, {2, 3}, {2, 4}, {3, 1}, {3, 2}, {4, 3}, {4, 4}}},
    {2, 1, {{1, 1}, {1, 3}, {2, 1}, {2, 3}, {3, 2}, {3, 4}, {4, 2}, {4, 4}}},
    {2, 2, {{1, 1}, {1, 3}, {2, 2}, {2, 4}, {3, 1}, {3, 3}, {4, 2}, {4, 4}}},
    {1, 3, {{1, 1}, {1, 2}, {2, 3}, {2, 4}, {3, 3}, {3, 4}, {4, 1}, {4, 2}}},
    {2, 3, {{1, 1}, {1, 3}, {2, 2}, {2, 4}, {3, 2}, {3, 4}, {4, 1}, {4, 3}}},
    {3, 1, {{1, 1}, {1, 4}, {2, 1}, {2, 4}, {3, 2}, {3, 3}, {4, 2}, {4, 3}}},
    {3, 2, {{1, 1}, {1, 4}, {2, 2}, {2, 3}, {3, 1}, {3, 4}, {4, 2}, {4, 3}}},
    {3, 3, {{1, 2}, {1, 3}, {2, 1}, {2, 4}, {3, 1}, {3, 4}, {4, 2}, {4, 3}}},
};

}  // namespace

BellFunctional make_i234() {
    BellFunctional f;
    f.scenario = {3, 3, 4, 4};
    for (const auto& line : kI234)
        for (const auto& ab : line.ab) f.joint[{line.x, line.y, ab[0], ab[1]}] = 1.0;
    f.knownLocalBound = 8.0;
    return f;
}

BellFunctional make_chsh() {
    BellFunctional f;
    f.scenario = {2, 2, 2, 2};
    const double setting_sign[2][2] = {{+1.0, +1.0}, {+1.0, -1.0}};
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 2; ++y)
            for (int a = 1; a <= 2; ++a)
                for (int b = 1; b <= 2; ++b)
                    f.joint[{x, y, a, b}] =
                        setting_sign[x - 1][y - 1] * ((a + b) % 2 == 0 ? 1.0 : -1.0);
    f.knownLocalBound = 2.0;
    return f;
}

namespace {

std::uint64_t ipow(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > (1ull << 62) / base) return UINT64_MAX;
        r *= base;
    }
    return r;
}

// Mixed-radix decode: strategy id -> outcome (1-based) per input.
void decode_strategy(std::uint64_t id, int inputs, int outcomes, std::vector<int>& out) {
    out.resize(inputs);
    for (int x = 0; x < inputs; ++x) {
        out[x] = static_cast<int>(id % outcomes) + 1;
        id /= outcomes;
    }
}

}  // namespace

LocalBoundResult local_bound(const BellFunctional& f, std::uint64_t cap) {
    const Scenario& sc = f.scenario;
    const std::uint64_t nStratA = ipow(sc.mA, sc.nA);
    const std::uint64_t nStratB = ipow(sc.mB, sc.nB);
    if (nStratA == UINT64_MAX || nStratB == UINT64_MAX || nStratA > cap / nStratB)
        throw std::runtime_error("local_bound: scenario too large for enumeration cap");

    // Dense coefficient lookups.
    std::vector<double> J(static_cast<std::size_t>(sc.joint_size()), 0.0);
    auto jidx = [&](int x, int y, int a, int b) {
        return ((static_cast<std::size_t>(x - 1) * sc.nB + (y - 1)) * sc.mA + (a - 1)) * sc.mB +
               (b - 1);
    };
    for (const auto& [k, c] : f.joint) J[jidx(k[0], k[1], k[2], k[3])] = c;
    std::vector<double> MA(static_cast<std::size_t>(sc.nA) * sc.mA, 0.0);
    std::vector<double> MB(static_cast<std::size_t>(sc.nB) * sc.mB, 0.0);
    for (const auto& [k, c] : f.margA) MA[static_cast<std::size_t>(k[0] - 1) * sc.mA + k[1] - 1] = c;
    for (const auto& [k, c] : f.margB) MB[static_cast<std::size_t>(k[0] - 1) * sc.mB + k[1] - 1] = c;

    // Per-strategy marginal scores, precomputed once.
    std::vector<double> scoreA(nStratA), scoreB(nStratB);
    std::vector<std::vector<int>> stratA(nStratA), stratB(nStratB);
    for (std::uint64_t s = 0; s < nStratA; ++s) {
        decode_strategy(s, sc.nA, sc.mA, stratA[s]);
        double sum = 0.0;
        for (int x = 0; x < sc.nA; ++x) sum += MA[static_cast<std::size_t>(x) * sc.mA + stratA[s][x] - 1];
        scoreA[s] = sum;
    }
    for (std::uint64_t s = 0; s < nStratB; ++s) {
        decode_strategy(s, sc.nB, sc.mB, stratB[s]);
        double sum = 0.0;
        for (int y = 0; y < sc.nB; ++y) sum += MB[static_cast<std::size_t>(y) * sc.mB + stratB[s][y] - 1];
        scoreB[s] = sum;
    }

    LocalBoundResult best;
    bool first = true;
    for (std::uint64_t sa = 0; sa < nStratA; ++sa) {
        for (std::uint64_t sb = 0; sb < nStratB; ++sb) {
            double v = f.constant + scoreA[sa] + scoreB[sb];
            for (int x = 0; x < sc.nA; ++x)
                for (int y = 0; y < sc.nB; ++y)
                    v += J[jidx(x + 1, y + 1, stratA[sa][x], stratB[sb][y])];
            if (first || v > best.value) {
                first = false;
                best.value = v;
                best.aliceStrategy = stratA[sa];
                best.bobStrategy = stratB[sb];
            }
        }
    }
    return best;
}

std::optional<double> algebraic_max(const BellFunctional& f) {
    if (!f.margA.empty() || !f.margB.empty()) return std::nullopt;
    for (const auto& [k, c] : f.joint)
        if (c < 0.0) return std::nullopt;
    const Scenario& sc = f.scenario;
    double total = f.constant;
    for (int x = 1; x <= sc.nA; ++x)
        for (int y = 1; y <= sc.nB; ++y) {
            double mx = 0.0;  // absent coefficients are zero
            for (int a = 1; a <= sc.mA; ++a)
                for (int b = 1; b <= sc.mB; ++b) {
                    auto it = f.joint.find({x, y, a, b});
                    if (it != f.joint.end()) mx = std::max(mx, it->second);
                }
            total += mx;
        }
    return total;
}

BellFunctional transform_by_efficiency(const BellFunctional& f, double eta) {
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("transform_by_efficiency: eta outside [0,1]");
    const Scenario& sc = f.scenario;
    const double etaBar = 1.0 - eta;
    BellFunctional out;
    out.scenario = sc;
    out.constant = f.constant;
    for (const auto& [k, c] : f.joint) {
        out.joint[k] += eta * eta * c;
        // Nondetection rows/columns of the efficiency map feed back into
        // marginal and constant terms of the transformed functional.
        if (k[2] == sc.mA) out.margB[{k[1], k[3]}] += eta * etaBar * c;
        if (k[3] == sc.mB) out.margA[{k[0], k[2]}] += eta * etaBar * c;
        if (k[2] == sc.mA && k[3] == sc.mB) out.constant += etaBar * etaBar * c;
    }
    for (const auto& [k, c] : f.margA) {
        out.margA[k] += eta * c;
        if (k[1] == sc.mA) out.constant += etaBar * c;
    }
    for (const auto& [k, c] : f.margB) {
        out.margB[k] += eta * c;
        if (k[1] == sc.mB) out.constant += etaBar * c;
    }
    out.prune();
    return out;
}

void write_functional(std::ostream& os, const BellFunctional& f) {
    char buf[96];
    os << "functional " << f.scenario.nA << ' ' << f.scenario.nB << ' ' << f.scenario.mA << ' '
       << f.scenario.mB << '\n';
    for (const auto& [k, c] : f.joint) {
        std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g", k[0], k[1], k[2], k[3], c);
        os << buf << '\n';
    }
    for (const auto& [k, c] : f.margA) {
        std::snprintf(buf, sizeof buf, "A %d %d %.17g", k[0], k[1], c);
        os << buf << '\n';
    }
    for (const auto& [k, c] : f.margB) {
        std::snprintf(buf, sizeof buf, "B %d %d %.17g", k[0], k[1], c);
        os << buf << '\n';
    }
    if (f.constant != 0.0) {
        std::snprintf(buf, sizeof buf, "C %.17g", f.constant);
        os << buf << '\n';
    }
    if (f.knownLocalBound) {
        std::snprintf(buf, sizeof buf, "L %.17g", *f.knownLocalBound);
        os << buf << '\n';
    }
}

BellFunctional read_functional(std::istream& is) {
    BellFunctional f;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("functional parse: empty input");
    {
        std::istringstream hs(line);
        std::string tag;
        if (!(hs >> tag >> f.scenario.nA >> f.scenario.nB >> f.scenario.mA >> f.scenario.mB) ||
            tag != "functional")
            throw std::runtime_error("functional parse: bad header");
    }
    auto in_range = [&](int x, int y, int a, int b) {
        return x >= 1 && x <= f.scenario.nA && y >= 1 && y <= f.scenario.nB && a >= 1 &&
               a <= f.scenario.mA && b >= 1 && b <= f.scenario.mB;
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == 'A' || line[0] == 'B' || line[0] == 'C' || line[0] == 'L') {
            char tag;
            ls >> tag;
            if (tag == 'A') {
                int x, a;
                double c;
                if (!(ls >> x >> a >> c) || x < 1 || x > f.scenario.nA || a < 1 || a > f.scenario.mA)
                    throw std::runtime_error("functional parse: bad A row: " + line);
                f.margA[{x, a}] += c;
            } else if (tag == 'B') {
                int y, b;
                double c;
                if (!(ls >> y >> b >> c) || y < 1 || y > f.scenario.nB || b < 1 || b > f.scenario.mB)
                    throw std::runtime_error("functional parse: bad B row: " + line);
                f.margB[{y, b}] += c;
            } else if (tag == 'C') {
                if (!(ls >> f.constant)) throw std::runtime_error("functional parse: bad C row");
            } else {
                double v;
                if (!(ls >> v)) throw std::runtime_error("functional parse: bad L row");
                f.knownLocalBound = v;
            }
        } else {
            int x, y, a, b;
            double c;
            if (!(ls >> x >> y >> a >> b >> c) || !in_range(x, y, a, b))
                throw std::runtime_error("functional parse: bad joint row: " + line);
            f.joint[{x, y, a, b}] += c;
        }
    }
    return f;
}

}  // namespace diqkd
