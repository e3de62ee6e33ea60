#include "diqkd/npa.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace diqkd::npa {

Symbol projector(Party p, int input, int outcome) {
    if (p == Party::E) throw std::invalid_argument("projector: E symbols are not projectors");
    return Symbol{p, input, outcome, false};
}

Symbol eve_op(int j, int a, bool adjoint) { return Symbol{Party::E, j, a, adjoint}; }

std::string Monomial::str() const {
    if (zero) return "0";
    if (word.empty()) return "1";
    std::ostringstream os;
    for (std::size_t i = 0; i < word.size(); ++i) {
        const Symbol& s = word[i];
        if (i) os << '.';
        switch (s.party) {
            case Party::A: os << "A(" << s.outcome << "|" << s.input << ")"; break;
            case Party::B: os << "B(" << s.outcome << "|" << s.input << ")"; break;
            case Party::E: os << "V" << (s.adjoint ? "*" : "") << "(" << s.input << "," << s.outcome << ")"; break;
        }
    }
    return os.str();
}

bool Monomial::operator<(const Monomial& o) const {
    if (zero != o.zero) return zero < o.zero;
    if (word.size() != o.word.size()) return word.size() < o.word.size();
    return word < o.word;
}

Monomial reduce(const Monomial& m) {
    if (m.zero) return m;
    // Cross-party commutation: stable partition A, B, E.
    std::vector<Symbol> sorted = m.word;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Symbol& a, const Symbol& b) { return a.party < b.party; });
    // Stack pass: projector idempotence and within-input orthogonality.
    Monomial out;
    for (const Symbol& s : sorted) {
        if (!out.word.empty() && s.party != Party::E) {
            const Symbol& top = out.word.back();
            if (top.party == s.party && top.input == s.input) {
                if (top.outcome == s.outcome) continue;  // P.P = P
                out.zero = true;                         // P.P' = 0
                out.word.clear();
                return out;
            }
        }
        out.word.push_back(s);
    }
    return out;
}

Monomial adjoint(const Monomial& m) {
    Monomial r;
    r.zero = m.zero;
    r.word.assign(m.word.rbegin(), m.word.rend());
    for (Symbol& s : r.word)
        if (s.party == Party::E) s.adjoint = !s.adjoint;
    return reduce(r);
}

Monomial concat(const Monomial& a, const Monomial& b) {
    if (a.zero || b.zero) return Monomial{{}, true};
    Monomial r;
    r.word = a.word;
    r.word.insert(r.word.end(), b.word.begin(), b.word.end());
    return reduce(r);
}

Level Level::parse(const std::string& text) {
    Level l;
    auto plus = text.find('+');
    std::string basePart = plus == std::string::npos ? text : text.substr(0, plus);
    l.base = std::stoi(basePart);
    if (l.base < 1) throw std::invalid_argument("level: base must be >= 1");
    if (plus != std::string::npos) {
        std::string suffix = text.substr(plus + 1);
        if (suffix == "AB" || suffix == "ab")
            l.plusAB = true;
        else
            throw std::invalid_argument("level: unknown suffix '" + suffix + "'");
    }
    return l;
}

std::string Level::str() const { return std::to_string(base) + (plusAB ? "+AB" : ""); }

std::vector<Monomial> generate_monomials(const Scenario& sc, Level level,
                                         const std::vector<Monomial>& extras) {
    std::vector<Symbol> gens;
    for (int x = 1; x <= sc.nA; ++x)
        for (int a = 1; a < sc.mA; ++a) gens.push_back(projector(Party::A, x, a));
    for (int y = 1; y <= sc.nB; ++y)
        for (int b = 1; b < sc.mB; ++b) gens.push_back(projector(Party::B, y, b));

    std::set<Monomial> seen;
    seen.insert(Monomial::one());
    std::vector<Monomial> frontier{Monomial::one()};
    for (int len = 1; len <= level.base; ++len) {
        std::vector<Monomial> next;
        for (const auto& w : frontier)
            for (const auto& g : gens) {
                Monomial m = concat(w, Monomial{{g}, false});
                if (m.zero || m.length() != len) continue;
                if (seen.insert(m).second) next.push_back(m);
            }
        frontier = std::move(next);
    }
    if (level.plusAB) {
        for (int x = 1; x <= sc.nA; ++x)
            for (int a = 1; a < sc.mA; ++a)
                for (int y = 1; y <= sc.nB; ++y)
                    for (int b = 1; b < sc.mB; ++b)
                        seen.insert(Monomial{
                            {projector(Party::A, x, a), projector(Party::B, y, b)}, false});
    }
    for (const auto& e : extras) {
        Monomial m = reduce(e);
        if (!m.zero) seen.insert(m);
    }
    return {seen.begin(), seen.end()};
}

int RelaxationProblem::class_of(const Monomial& m) {
    Monomial adj = adjoint(m);
    const Monomial& rep = adj < m ? adj : m;
    auto it = classIndex.find(rep);
    if (it != classIndex.end()) return it->second;
    int id = static_cast<int>(classRep.size());
    classRep.push_back(rep);
    classIndex.emplace(rep, id);
    return id;
}

std::optional<int> RelaxationProblem::find_class(const Monomial& m) const {
    Monomial adj = adjoint(m);
    const Monomial& rep = adj < m ? adj : m;
    auto it = classIndex.find(rep);
    if (it == classIndex.end()) return std::nullopt;
    return it->second;
}

RelaxationProblem RelaxationProblem::moment_structure(const Scenario& sc,
                                                      std::vector<Monomial> monomials) {
    RelaxationProblem r;
    r.scenario = sc;
    std::sort(monomials.begin(), monomials.end());
    monomials.erase(std::unique(monomials.begin(), monomials.end()), monomials.end());
    r.basis = std::move(monomials);
    const int n = static_cast<int>(r.basis.size());
    r.momentCell.assign(n, std::vector<int>(n, -1));
    for (int i = 0; i < n; ++i) {
        Monomial bra = adjoint(r.basis[i]);
        for (int j = i; j < n; ++j) {
            Monomial w = concat(bra, r.basis[j]);
            int var = w.zero ? -1 : r.class_of(w);
            r.momentCell[i][j] = var;
            r.momentCell[j][i] = var;
        }
    }
    r.identityVar = r.class_of(Monomial::one());
    r.equalities.push_back({{{r.identityVar, 1.0}}, 1.0});
    return r;
}

std::vector<std::pair<double, Monomial>> expand_projector(Party p, int input, int outcome,
                                                          int numOutcomes) {
    std::vector<std::pair<double, Monomial>> terms;
    if (outcome < numOutcomes) {
        terms.push_back({1.0, Monomial{{projector(p, input, outcome)}, false}});
    } else {
        terms.push_back({1.0, Monomial::one()});
        for (int o = 1; o < numOutcomes; ++o)
            terms.push_back({-1.0, Monomial{{projector(p, input, o)}, false}});
    }
    return terms;
}

namespace {

// Accumulate coeff * op1 * op2 into (objective, constant) over moment classes.
void accumulate_product(RelaxationProblem& r, LinExpr& expr, double& constant, double coeff,
                        const std::vector<std::pair<double, Monomial>>& lhs,
                        const std::vector<std::pair<double, Monomial>>& rhs) {
    for (const auto& [cl, wl] : lhs)
        for (const auto& [cr, wr] : rhs) {
            Monomial w = concat(wl, wr);
            double c = coeff * cl * cr;
            if (w.zero || c == 0.0) continue;
            if (w.is_identity())
                constant += c;
            else
                expr[r.class_of(w)] += c;
        }
}

void set_functional_objective(RelaxationProblem& r, const BellFunctional& f) {
    const Scenario& sc = f.scenario;
    double constant = f.constant;
    LinExpr obj;
    static const std::vector<std::pair<double, Monomial>> unit = {{1.0, Monomial::one()}};
    for (const auto& [k, c] : f.joint)
        accumulate_product(r, obj, constant, c, expand_projector(Party::A, k[0], k[2], sc.mA),
                           expand_projector(Party::B, k[1], k[3], sc.mB));
    for (const auto& [k, c] : f.margA)
        accumulate_product(r, obj, constant, c, expand_projector(Party::A, k[0], k[1], sc.mA),
                           unit);
    for (const auto& [k, c] : f.margB)
        accumulate_product(r, obj, constant, c, unit,
                           expand_projector(Party::B, k[0], k[1], sc.mB));
    std::erase_if(obj, [](const auto& kv) { return kv.second == 0.0; });
    r.objective = std::move(obj);
    r.objectiveConstant = constant;
}

// Every objective/equality variable must be tied down by some block cell.
void check_constrained(const RelaxationProblem& r) {
    std::vector<char> seen(r.num_vars(), 0);
    for (const auto& row : r.momentCell)
        for (int v : row)
            if (v >= 0) seen[v] = 1;
    for (const auto& lb : r.localizing)
        for (const auto& row : lb.cells)
            for (const auto& e : row)
                for (const auto& [v, c] : e) seen[v] = 1;
    for (const auto& [v, c] : r.objective)
        if (!seen[v])
            throw std::runtime_error("relaxation: objective references moment " +
                                     r.classRep[v].str() +
                                     " absent from every block; increase the level");
    for (const auto& eq : r.equalities)
        for (const auto& [v, c] : eq.lhs)
            if (!seen[v])
                throw std::runtime_error("relaxation: pinned moment " + r.classRep[v].str() +
                                         " absent from every block; increase the level");
}

}  // namespace

RelaxationProblem tsirelson_relaxation(const BellFunctional& f, Level level,
                                       const std::vector<Monomial>& extras) {
    RelaxationProblem r =
        RelaxationProblem::moment_structure(f.scenario, generate_monomials(f.scenario, level, extras));
    set_functional_objective(r, f);
    check_constrained(r);
    return r;
}

RelaxationProblem efficiency_constrained_relaxation(const BellFunctional& f, Level level,
                                                    double eta,
                                                    const std::vector<Monomial>& extras) {
    return tsirelson_relaxation(transform_by_efficiency(f, eta), level, extras);
}

RelaxationProblem behavior_constrained_relaxation(const Behavior& p, Level level,
                                                  const std::vector<Monomial>& extras) {
    const Scenario& sc = p.scenario();
    RelaxationProblem r =
        RelaxationProblem::moment_structure(sc, generate_monomials(sc, level, extras));
    // Pin retained first-order and A*B moments; the eliminated last outcomes
    // are linear consequences of these, so the pin set is already
    // no-signaling-deduplicated.
    for (int x = 1; x <= sc.nA; ++x)
        for (int a = 1; a < sc.mA; ++a) {
            int v = r.class_of(Monomial{{projector(Party::A, x, a)}, false});
            r.equalities.push_back({{{v, 1.0}}, p.marginal_A(a, x)});
        }
    for (int y = 1; y <= sc.nB; ++y)
        for (int b = 1; b < sc.mB; ++b) {
            int v = r.class_of(Monomial{{projector(Party::B, y, b)}, false});
            r.equalities.push_back({{{v, 1.0}}, p.marginal_B(b, y)});
        }
    for (int x = 1; x <= sc.nA; ++x)
        for (int y = 1; y <= sc.nB; ++y)
            for (int a = 1; a < sc.mA; ++a)
                for (int b = 1; b < sc.mB; ++b) {
                    int v = r.class_of(Monomial{
                        {projector(Party::A, x, a), projector(Party::B, y, b)}, false});
                    r.equalities.push_back({{{v, 1.0}}, p.p(x, y, a, b)});
                }
    check_constrained(r);
    return r;
}

void dump(std::ostream& os, const RelaxationProblem& r) {
    os << "monomials " << r.basis.size() << "\n";
    for (std::size_t i = 0; i < r.basis.size(); ++i) os << i << " " << r.basis[i].str() << "\n";
    os << "variables " << r.num_vars() << "\n";
    for (int v = 0; v < r.num_vars(); ++v) os << v << " " << r.classRep[v].str() << "\n";
    os << "momentcells\n";
    for (std::size_t i = 0; i < r.basis.size(); ++i)
        for (std::size_t j = i; j < r.basis.size(); ++j)
            os << i << " " << j << " -> " << r.momentCell[i][j] << "\n";
    for (const auto& lb : r.localizing) {
        os << "localizing " << lb.label << " side " << lb.basis.size() << "\n";
        for (std::size_t s = 0; s < lb.basis.size(); ++s)
            for (std::size_t t = s; t < lb.basis.size(); ++t) {
                os << s << " " << t << " ->";
                for (const auto& [v, c] : lb.cells[s][t - s]) os << " " << c << "*y" << v;
                os << "\n";
            }
    }
    os << "equalities " << r.equalities.size() << "\n";
}

}  // namespace diqkd::npa

// --- compile bridge and solve helpers ---

namespace diqkd::sdp {

namespace {

using npa::LinExpr;
using npa::RelaxationProblem;

// var -> affine form over free vars: value = constant + sum coeff * free
struct AffineForm {
    double constant = 0.0;
    LinExpr terms;
};

}  // namespace

BlockSDP compile(const RelaxationProblem& r) {
    const int numClasses = r.num_vars();
    std::vector<std::optional<AffineForm>> forms(numClasses);

    // Build substitution forms from the equalities by Gaussian elimination
    // with eager back-substitution into previously derived forms.
    for (const auto& eq : r.equalities) {
        LinExpr row;
        double rhs = eq.rhs;
        for (const auto& [v, c] : eq.lhs) {
            if (forms[v]) {
                rhs -= c * forms[v]->constant;
                for (const auto& [u, cu] : forms[v]->terms) row[u] += c * cu;
            } else {
                row[v] += c;
            }
        }
        std::erase_if(row, [](const auto& kv) { return std::abs(kv.second) < 1e-14; });
        if (row.empty()) {
            if (std::abs(rhs) > 1e-9)
                throw std::runtime_error("compile: inconsistent pins (0 = " +
                                         std::to_string(rhs) + ")");
            continue;
        }
        // pivot: largest coefficient, smallest id on ties
        int pivot = row.begin()->first;
        double pc = row.begin()->second;
        for (const auto& [v, c] : row)
            if (std::abs(c) > std::abs(pc) + 1e-15) {
                pivot = v;
                pc = c;
            }
        AffineForm f;
        f.constant = rhs / pc;
        for (const auto& [v, c] : row)
            if (v != pivot) f.terms[v] = -c / pc;
        // back-substitute into existing forms
        for (auto& g : forms) {
            if (!g) continue;
            auto it = g->terms.find(pivot);
            if (it == g->terms.end()) continue;
            double w = it->second;
            g->terms.erase(it);
            g->constant += w * f.constant;
            for (const auto& [v, c] : f.terms) g->terms[v] += w * c;
            std::erase_if(g->terms, [](const auto& kv) { return std::abs(kv.second) < 1e-14; });
        }
        forms[pivot] = std::move(f);
    }

    // Resolve a class variable into (constant, free-var expression).
    auto resolve = [&](int v) -> AffineForm {
        if (!forms[v]) return AffineForm{0.0, {{v, 1.0}}};
        return *forms[v];
    };

    // Which free variables actually appear in some block?
    std::vector<char> used(numClasses, 0);
    auto mark_expr = [&](const LinExpr& e) {
        for (const auto& [v, c] : e) {
            AffineForm f = resolve(v);
            for (const auto& [u, cu] : f.terms) used[u] = 1;
        }
    };
    const int n = static_cast<int>(r.basis.size());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            if (r.momentCell[i][j] >= 0) mark_expr({{r.momentCell[i][j], 1.0}});
    for (const auto& lb : r.localizing)
        for (const auto& row : lb.cells)
            for (const auto& e : row) mark_expr(e);

    std::vector<int> varId(numClasses, -1);
    int m = 0;
    for (int v = 0; v < numClasses; ++v)
        if (used[v] && !forms[v]) varId[v] = m++;

    BlockSDP s;
    s.numVars = m;
    s.objective.assign(m, 0.0);
    s.varMatrices.resize(m);
    s.blockSizes.push_back(n);
    for (const auto& lb : r.localizing)
        s.blockSizes.push_back(static_cast<int>(lb.basis.size()));

    auto emit_cell = [&](int block, int row, int col, const LinExpr& expr) {
        double constant = 0.0;
        LinExpr flat;
        for (const auto& [v, c] : expr) {
            AffineForm f = resolve(v);
            constant += c * f.constant;
            for (const auto& [u, cu] : f.terms) flat[u] += c * cu;
        }
        for (const auto& [u, cu] : flat) {
            if (cu == 0.0) continue;
            if (varId[u] < 0) throw std::runtime_error("compile: unresolved variable");
            s.varMatrices[varId[u]].push_back({block, row, col, cu});
        }
        if (constant != 0.0) s.constMatrix.push_back({block, row, col, -constant});
    };

    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            if (r.momentCell[i][j] >= 0) emit_cell(0, i, j, {{r.momentCell[i][j], 1.0}});
    for (std::size_t lb = 0; lb < r.localizing.size(); ++lb) {
        const auto& block = r.localizing[lb];
        const int side = static_cast<int>(block.basis.size());
        for (int si = 0; si < side; ++si)
            for (int t = si; t < side; ++t)
                if (!block.cells[si][t - si].empty())
                    emit_cell(static_cast<int>(lb) + 1, si, t, block.cells[si][t - si]);
    }

    // Objective: maximize obj.y + const; SDPA form minimizes, so negate.
    s.maximize = true;
    s.objectiveOffset = r.objectiveConstant;
    for (const auto& [v, c] : r.objective) {
        AffineForm f = resolve(v);
        s.objectiveOffset += c * f.constant;
        for (const auto& [u, cu] : f.terms) {
            if (varId[u] < 0)
                throw std::runtime_error("compile: objective variable " + std::to_string(u) +
                                         " unconstrained by any block");
            s.objective[varId[u]] -= c * cu;
        }
    }
    s.validate();
    return s;
}

}  // namespace diqkd::sdp

namespace diqkd::npa {

BoundResult solve_relaxation(const RelaxationProblem& r, const sdp::SolveOptions& opts) {
    sdp::BlockSDP s = sdp::compile(r);
    sdp::SDPSolution sol = sdp::solve(s, opts);
    // report the multiplier side: for these maximization relaxations it is
    // the side that certifies an upper bound
    return {sol.dual_value(s), sol.status, sol.iterations, sol.dualityGap};
}

FeasibilityResult relaxation_feasibility(const RelaxationProblem& r,
                                         const sdp::SolveOptions& opts) {
    if (!r.localizing.empty())
        throw std::invalid_argument("relaxation_feasibility: localizing blocks unsupported");
    sdp::BlockSDP s = sdp::compile(r);
    // extra variable t: moment block gains -t on the diagonal, plus 1-t >= 0
    const int n = static_cast<int>(r.basis.size());
    const int tVar = s.numVars;
    s.numVars += 1;
    s.varMatrices.emplace_back();
    for (int i = 0; i < n; ++i) s.varMatrices[tVar].push_back({0, i, i, -1.0});
    s.blockSizes.push_back(1);
    const int capBlock = static_cast<int>(s.blockSizes.size()) - 1;
    s.varMatrices[tVar].push_back({capBlock, 0, 0, -1.0});
    s.constMatrix.push_back({capBlock, 0, 0, -1.0});
    s.objective.push_back(-1.0);  // maximize t in min form
    s.maximize = true;
    s.objectiveOffset = 0.0;
    for (int i = 0; i < tVar; ++i) s.objective[i] = 0.0;
    sdp::SDPSolution sol = sdp::solve(s, opts);
    return {-sol.primalObjective, sol.status};
}

}  // namespace diqkd::npa
