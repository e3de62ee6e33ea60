#include "diqkd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

namespace diqkd {

namespace {

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    return a;
}

// distance on the circle
double ang_dist(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2.0 * M_PI);
    return std::min(d, 2.0 * M_PI - d);
}

}  // namespace

NelderMeadResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0, const NelderMeadOptions& opts) {
    const int n = static_cast<int>(x0.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    int evals = 0;
    auto eval_at = [&](const Eigen::VectorXd& x) {
        ++evals;
        return f(x);
    };

    std::vector<Eigen::VectorXd> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (int i = 1; i <= n; ++i) pts[i][i - 1] += opts.initialStep;
    for (int i = 0; i <= n; ++i) vals[i] = eval_at(pts[i]);

    std::vector<int> order(n + 1);
    for (int iter = 0; iter < opts.maxIterations; ++iter) {
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return vals[a] < vals[b]; });
        if (vals[order[n]] - vals[order[0]] < opts.fTol) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) centroid += pts[order[i]];
        centroid /= n;
        const int worst = order[n];

        Eigen::VectorXd xr = centroid + alpha * (centroid - pts[worst]);
        double fr = eval_at(xr);
        if (fr < vals[order[0]]) {
            Eigen::VectorXd xe = centroid + gamma * (centroid - pts[worst]);
            double fe = eval_at(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if (fr < vals[order[n - 1]]) {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            Eigen::VectorXd xc = centroid + rho * (pts[worst] - centroid);
            double fc = eval_at(xc);
            if (fc < vals[worst]) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    int idx = order[i];
                    pts[idx] = pts[order[0]] + sigma * (pts[idx] - pts[order[0]]);
                    vals[idx] = eval_at(pts[idx]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (vals[i] < vals[best]) best = i;
    return {pts[best], vals[best], evals};
}

// --- 4422 family ---

ParamFamily4422 ParamFamily4422::q4422_point() {
    ParamFamily4422 p;
    p.epsilon = 0.5;
    p.u = 0.2816;
    p.v = 0.5438;
    p.p1 = {0.9159, 0.0499};
    p.p2 = {0.5625, -0.3035};
    p.q1 = {0.9159, -0.0499};
    p.q2 = {0.5625, 0.3035};
    return p;
}

Eigen::VectorXd ParamFamily4422::pack() const {
    Eigen::VectorXd x(11);
    x << epsilon, u, v, p1(0), p1(1), p2(0), p2(1), q1(0), q1(1), q2(0), q2(1);
    return x;
}

ParamFamily4422 ParamFamily4422::unpack(const Eigen::VectorXd& x) {
    if (x.size() != 11) throw std::invalid_argument("ParamFamily4422: need 11 parameters");
    ParamFamily4422 p;
    p.epsilon = std::clamp(x[0], 0.0, 1.0);
    p.u = x[1];
    p.v = x[2];
    p.p1 = {x[3], x[4]};
    p.p2 = {x[5], x[6]};
    p.q1 = {x[7], x[8]};
    p.q2 = {x[9], x[10]};
    return p;
}

namespace {

Measurement unit_projector_measurement(std::array<double, 4> c) {
    double norm2 = 0.0;
    for (double ci : c) norm2 += ci * ci;
    if (norm2 < 1e-24)
        throw std::invalid_argument("realize_4422: degenerate zero-norm coefficient vector");
    CVector v(4);
    for (int i = 0; i < 4; ++i) v(i) = c[i] / std::sqrt(norm2);
    CMatrix proj = v * v.adjoint();
    Measurement m;
    m.effects = {proj, CMatrix::Identity(4, 4) - proj};
    return m;
}

}  // namespace

QuantumRealization realize_4422(const ParamFamily4422& params) {
    const double eps = std::clamp(params.epsilon, 0.0, 1.0);
    const double head = std::sqrt((1.0 - eps * eps) / 3.0);
    CVector psi = CVector::Zero(16);
    psi(0) = head;
    psi(5) = head;
    psi(10) = head;
    psi(15) = eps;
    QuantumRealization q;
    q.state = BipartiteState{4, 4, psi * psi.adjoint()};
    const double u = params.u, v = params.v;
    const auto &p1 = params.p1, &p2 = params.p2, &q1 = params.q1, &q2 = params.q2;
    q.alice = {
        unit_projector_measurement({-u, -u, p1(0), p1(1)}),
        unit_projector_measurement({-v, v, p2(0), p2(1)}),
        unit_projector_measurement({u, u, p1(0), p1(1)}),
        unit_projector_measurement({v, -v, p2(0), p2(1)}),
    };
    q.bob = {
        unit_projector_measurement({-u, u, q1(0), q1(1)}),
        unit_projector_measurement({-v, -v, q2(0), q2(1)}),
        unit_projector_measurement({u, -u, q1(0), q1(1)}),
        unit_projector_measurement({v, v, q2(0), q2(1)}),
    };
    return q;
}

// --- 234 family ---

Ansatz234 parse_ansatz(const std::string& name) {
    if (name == "planar") return Ansatz234::Planar;
    if (name == "fourier-phase" || name == "fourier") return Ansatz234::FourierPhase;
    if (name == "commuting-pair" || name == "commuting") return Ansatz234::CommutingPair;
    throw std::invalid_argument("unknown ansatz '" + name + "'");
}

const char* to_string(Ansatz234 a) {
    switch (a) {
        case Ansatz234::Planar: return "planar";
        case Ansatz234::FourierPhase: return "fourier-phase";
        case Ansatz234::CommutingPair: return "commuting-pair";
    }
    return "?";
}

int ParamFamily234::angles_per_party(Ansatz234 a) {
    switch (a) {
        case Ansatz234::Planar: return 6;
        case Ansatz234::FourierPhase: return 12;
        case Ansatz234::CommutingPair: return 8;
    }
    return 0;
}

ParamFamily234 ParamFamily234::q234_point() {
    ParamFamily234 p;
    p.theta1 = p.theta2 = M_PI / 4;
    p.ansatz = Ansatz234::CommutingPair;
    const double h = M_PI / 2;
    p.aliceAngles = {0, h, 0, h, 0, 0, h, h};
    p.bobAngles = {0, 0, h, h, h, 0, 0, h};
    return p;
}

namespace {

CMatrix planar_obs(double theta) {
    return std::cos(theta) * pauli_z() + std::sin(theta) * pauli_x();
}

// Joint measurement of a commuting +-1 observable pair, outcomes ordered
// (+,+),(+,-),(-,+),(-,-); throws naming the pair if they fail to commute.
Measurement commuting_pair_measurement(const CMatrix& o1, const CMatrix& o2, const char* who,
                                       int index) {
    if ((o1 * o2 - o2 * o1).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument(std::string("realize_234: observables of ") + who +
                                    " measurement " + std::to_string(index) + " do not commute");
    const CMatrix id = CMatrix::Identity(4, 4);
    Measurement m;
    for (int s : {+1, -1})
        for (int t : {+1, -1})
            m.effects.push_back(0.25 * (id + double(s) * o1) * (id + double(t) * o2));
    return m;
}

std::vector<Measurement> planar_party(const std::vector<double>& ang) {
    std::vector<Measurement> ms;
    const CMatrix I2 = identity(2);
    for (int i = 0; i < 3; ++i) {
        CMatrix oa = kron(planar_obs(ang[2 * i]), I2);
        CMatrix ob = kron(I2, planar_obs(ang[2 * i + 1]));
        ms.push_back(commuting_pair_measurement(oa, ob, "planar", i + 1));
    }
    return ms;
}

std::vector<Measurement> fourier_party(const std::vector<double>& ang, bool conjugateFT) {
    std::vector<Measurement> ms;
    CMatrix ft = fourier_transform(4);
    if (conjugateFT) ft = ft.conjugate();
    for (int i = 0; i < 3; ++i) {
        CMatrix u = CMatrix::Zero(4, 4);
        for (int kk = 0; kk < 4; ++kk)
            u(kk, kk) = Complex(std::cos(ang[4 * i + kk]), std::sin(ang[4 * i + kk]));
        CMatrix vmat = ft * u;
        Measurement m;
        for (int b = 0; b < 4; ++b) {
            CVector col = vmat.row(b).adjoint();  // V^dag |b>
            m.effects.push_back(col * col.adjoint());
        }
        ms.push_back(std::move(m));
    }
    return ms;
}

std::vector<Measurement> commuting_party(const std::vector<double>& t, const char* who) {
    const CMatrix I2 = identity(2);
    std::vector<Measurement> ms;
    // measurement 1: (1 (x) s(t0), s(t1) (x) 1); measurement 2 swaps factors
    ms.push_back(commuting_pair_measurement(kron(I2, planar_obs(t[0])),
                                            kron(planar_obs(t[1]), I2), who, 1));
    ms.push_back(commuting_pair_measurement(kron(planar_obs(t[2]), I2),
                                            kron(I2, planar_obs(t[3])), who, 2));
    ms.push_back(commuting_pair_measurement(kron(planar_obs(t[4]), planar_obs(t[5])),
                                            kron(planar_obs(t[6]), planar_obs(t[7])), who, 3));
    return ms;
}

}  // namespace

QuantumRealization realize_234(const ParamFamily234& params) {
    const int need = ParamFamily234::angles_per_party(params.ansatz);
    if (static_cast<int>(params.aliceAngles.size()) != need ||
        static_cast<int>(params.bobAngles.size()) != need)
        throw std::invalid_argument("realize_234: wrong angle count for ansatz");
    const double c1 = std::cos(params.theta1), s1 = std::sin(params.theta1);
    const double c2 = std::cos(params.theta2), s2 = std::sin(params.theta2);
    CVector psi = CVector::Zero(16);
    psi(0) = c1 * c2;
    psi(5) = c1 * s2;
    psi(10) = s1 * c2;
    psi(15) = s1 * s2;
    QuantumRealization q;
    q.state = BipartiteState{4, 4, psi * psi.adjoint()};
    switch (params.ansatz) {
        case Ansatz234::Planar:
            q.alice = planar_party(params.aliceAngles);
            q.bob = planar_party(params.bobAngles);
            break;
        case Ansatz234::FourierPhase:
            q.alice = fourier_party(params.aliceAngles, false);
            q.bob = fourier_party(params.bobAngles, true);
            break;
        case Ansatz234::CommutingPair:
            q.alice = commuting_party(params.aliceAngles, "alice");
            q.bob = commuting_party(params.bobAngles, "bob");
            break;
    }
    return q;
}

// --- violation searches ---

namespace {

struct MultiStart {
    const SearchOptions& opts;
    ViolationResult best;
    int startIndex = 0;

    explicit MultiStart(const SearchOptions& o) : opts(o) {}

    void run_start(const std::function<double(const Eigen::VectorXd&)>& negValue,
                   const Eigen::VectorXd& x0) {
        NelderMeadResult r = nelder_mead_minimize(negValue, x0, opts.nm);
        double value = -r.value;
        best.evaluations += r.evaluations;
        best.startValues.push_back(value);
        if (opts.log) {
            *opts.log << "start " << startIndex << " value " << value << " evals "
                      << r.evaluations << " params";
            for (Eigen::Index i = 0; i < r.x.size(); ++i) *opts.log << ' ' << r.x[i];
            *opts.log << '\n';
        }
        if (startIndex == 0 || value > best.value) {
            best.value = value;
            best.params = r.x;
        }
        ++startIndex;
        ++best.starts;
    }
};

}  // namespace

ViolationResult maximize_violation_4422(const BellFunctional& f, double eta,
                                        const SearchOptions& opts) {
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("maximize_violation: eta outside [0,1]");
    auto value_of = [&](const Eigen::VectorXd& x) -> double {
        ParamFamily4422 p = ParamFamily4422::unpack(x);
        QuantumRealization q;
        try {
            q = realize_4422(p);
        } catch (const std::invalid_argument&) {
            return 1e10;  // degenerate vector; simplex moves away
        }
        return -eval(f, degrade(q, NoiseParams{eta, 1.0}));
    };
    MultiStart ms(opts);
    ms.run_start(value_of, ParamFamily4422::q4422_point().pack());
    std::mt19937_64 rng(opts.seed);
    for (int s = 1; s < opts.starts; ++s) {
        Eigen::VectorXd x(11);
        x[0] = uniform01(rng);
        for (int i = 1; i < 11; ++i) x[i] = 2.0 * uniform01(rng) - 1.0;
        ms.run_start(value_of, x);
    }
    return ms.best;
}

namespace {

Eigen::VectorXd pack_234_search(const ParamFamily234& p) {
    // commuting-pair search drops no angles; projection happens in unpack
    Eigen::VectorXd x(2 + 2 * ParamFamily234::angles_per_party(p.ansatz));
    x[0] = p.theta1;
    x[1] = p.theta2;
    int n = ParamFamily234::angles_per_party(p.ansatz);
    for (int i = 0; i < n; ++i) x[2 + i] = p.aliceAngles[i];
    for (int i = 0; i < n; ++i) x[2 + n + i] = p.bobAngles[i];
    return x;
}

// project measurement-3 angles onto the commuting branch: the second
// observable's factor angles sit at +-pi/2 from the first's
void project_commuting(std::vector<double>& t) {
    for (int j : {6, 7}) {
        double base = t[j - 2];
        double c1 = wrap_angle(base + M_PI / 2), c2 = wrap_angle(base - M_PI / 2);
        t[j] = ang_dist(t[j], c1) <= ang_dist(t[j], c2) ? c1 : c2;
    }
}

ParamFamily234 unpack_234_search(const Eigen::VectorXd& x, Ansatz234 ansatz) {
    ParamFamily234 p;
    p.ansatz = ansatz;
    p.theta1 = x[0];
    p.theta2 = x[1];
    int n = ParamFamily234::angles_per_party(ansatz);
    p.aliceAngles.resize(n);
    p.bobAngles.resize(n);
    for (int i = 0; i < n; ++i) p.aliceAngles[i] = wrap_angle(x[2 + i]);
    for (int i = 0; i < n; ++i) p.bobAngles[i] = wrap_angle(x[2 + n + i]);
    if (ansatz == Ansatz234::CommutingPair) {
        project_commuting(p.aliceAngles);
        project_commuting(p.bobAngles);
    }
    return p;
}

}  // namespace

ViolationResult maximize_violation_234(const BellFunctional& f, Ansatz234 ansatz, double eta,
                                       const SearchOptions& opts) {
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("maximize_violation: eta outside [0,1]");
    auto value_of = [&](const Eigen::VectorXd& x) -> double {
        ParamFamily234 p = unpack_234_search(x, ansatz);
        return -eval(f, degrade(realize_234(p), NoiseParams{eta, 1.0}));
    };
    MultiStart ms(opts);
    ParamFamily234 ref = ParamFamily234::q234_point();
    if (ansatz != Ansatz234::CommutingPair) {
        ref.ansatz = ansatz;
        int n = ParamFamily234::angles_per_party(ansatz);
        ref.aliceAngles.assign(n, 0.0);
        ref.bobAngles.assign(n, 0.0);
    }
    ms.run_start(value_of, pack_234_search(ref));
    std::mt19937_64 rng(opts.seed);
    const int dim = 2 + 2 * ParamFamily234::angles_per_party(ansatz);
    for (int s = 1; s < opts.starts; ++s) {
        Eigen::VectorXd x(dim);
        for (int i = 0; i < dim; ++i) x[i] = 2.0 * M_PI * uniform01(rng);
        ms.run_start(value_of, x);
    }
    return ms.best;
}

// --- key measurement search ---

namespace {

// hermitian matrix from 16 real parameters (diagonal, then re/im per i<j)
CMatrix hermitian_from_params(const Eigen::VectorXd& t) {
    CMatrix h = CMatrix::Zero(4, 4);
    int idx = 0;
    for (int i = 0; i < 4; ++i) h(i, i) = t[idx++];
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            h(i, j) = Complex(t[idx], t[idx + 1]);
            h(j, i) = std::conj(h(i, j));
            idx += 2;
        }
    return h;
}

Eigen::VectorXd params_from_hermitian(const CMatrix& h) {
    Eigen::VectorXd t(16);
    int idx = 0;
    for (int i = 0; i < 4; ++i) t[idx++] = h(i, i).real();
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            t[idx] = h(i, j).real();
            t[idx + 1] = h(i, j).imag();
            idx += 2;
        }
    return t;
}

CMatrix unitary_exp(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    CVector phases(4);
    for (int i = 0; i < 4; ++i) {
        double l = es.eigenvalues()[i];
        phases(i) = Complex(std::cos(l), std::sin(l));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// hermitian log of a (numerically) unitary matrix
CMatrix hermitian_log(const CMatrix& u) {
    Eigen::ComplexEigenSolver<CMatrix> es(u);
    CMatrix vecs = es.eigenvectors();
    CMatrix h = CMatrix::Zero(4, 4);
    CVector logs(4);
    for (int i = 0; i < 4; ++i) logs(i) = std::arg(es.eigenvalues()[i]);
    h = vecs * logs.asDiagonal() * vecs.inverse();
    return 0.5 * (h + h.adjoint());
}

Measurement key_from_unitary(const CMatrix& u, int outcomes) {
    Measurement m;
    if (outcomes == 4) {
        for (int b = 0; b < 4; ++b) {
            CVector col = u.col(b);
            m.effects.push_back(col * col.adjoint());
        }
    } else if (outcomes == 2) {
        CVector col = u.col(0);
        CMatrix proj = col * col.adjoint();
        m.effects = {proj, CMatrix::Identity(4, 4) - proj};
    } else {
        throw std::invalid_argument("optimize_key_measurement: unsupported outcome count");
    }
    return m;
}

double key_entropy(const BipartiteState& state, const Measurement& aliceKey,
                   const Measurement& bobKey) {
    const int ma = aliceKey.outcomes(), mb = bobKey.outcomes();
    Eigen::MatrixXd joint(ma, mb);
    for (int a = 0; a < ma; ++a)
        for (int b = 0; b < mb; ++b)
            joint(a, b) =
                (kron(aliceKey.effects[a], bobKey.effects[b]) * state.density).trace().real();
    double h = 0.0;
    for (int a = 0; a < ma; ++a)
        for (int b = 0; b < mb; ++b)
            if (joint(a, b) > 0.0) h -= joint(a, b) * std::log2(joint(a, b));
    for (int b = 0; b < mb; ++b) {
        double pb = joint.col(b).sum();
        if (pb > 0.0) h += pb * std::log2(pb);
    }
    return h;
}

// deterministic unitary whose ansatz measurement equals the transpose of
// Alice's key measurement (rank-1 case), used as the first search start
CMatrix seed_unitary(const Measurement& keyT) {
    const int d = keyT.dim();
    CMatrix u = CMatrix::Identity(d, d);
    if (keyT.outcomes() == d) {
        for (int b = 0; b < d; ++b) {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(keyT.effects[b]);
            u.col(b) = es.eigenvectors().col(d - 1);  // top eigenvector
        }
        // orthonormalize for safety (Gram-Schmidt)
        for (int b = 0; b < d; ++b) {
            for (int k = 0; k < b; ++k) u.col(b) -= (u.col(k).adjoint() * u.col(b))(0) * u.col(k);
            double nrm = u.col(b).norm();
            if (nrm > 1e-12) u.col(b) /= nrm;
        }
    } else {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(keyT.effects[0]);
        CVector w = es.eigenvectors().col(d - 1);
        // complete w to a basis
        u.col(0) = w;
        int filled = 1;
        for (int k = 0; k < d && filled < d; ++k) {
            CVector cand = CVector::Zero(d);
            cand(k) = 1.0;
            for (int j = 0; j < filled; ++j)
                cand -= (u.col(j).adjoint() * cand)(0) * u.col(j);
            double nrm = cand.norm();
            if (nrm > 1e-6) {
                u.col(filled++) = cand / nrm;
            }
        }
    }
    return u;
}

}  // namespace

KeyMeasurementResult optimize_key_measurement(const QuantumRealization& q,
                                              const SearchOptions& opts, int keyX) {
    if (keyX < 1 || keyX > static_cast<int>(q.alice.size()))
        throw std::out_of_range("optimize_key_measurement: keyX out of range");
    if (q.state.dimB != 4)
        throw std::invalid_argument("optimize_key_measurement: ansatz is 4-dimensional");
    const Measurement& aliceKey = q.alice[keyX - 1];
    const int outcomes = q.bob.at(0).outcomes();

    Measurement defaultKey = aliceKey.transposed();
    double defaultH = key_entropy(q.state, aliceKey, defaultKey);

    auto objective = [&](const Eigen::VectorXd& t) {
        return key_entropy(q.state, aliceKey,
                           key_from_unitary(unitary_exp(hermitian_from_params(t)), outcomes));
    };

    KeyMeasurementResult best;
    best.measurement = defaultKey;
    best.hab = defaultH;

    Eigen::VectorXd seed0 = params_from_hermitian(hermitian_log(seed_unitary(defaultKey)));
    std::mt19937_64 rng(opts.seed);
    for (int s = 0; s < opts.starts; ++s) {
        Eigen::VectorXd x0(16);
        if (s == 0) {
            x0 = seed0;
        } else {
            for (int i = 0; i < 16; ++i) x0[i] = M_PI * (2.0 * uniform01(rng) - 1.0);
        }
        NelderMeadResult r = nelder_mead_minimize(objective, x0, opts.nm);
        best.evaluations += r.evaluations;
        if (opts.log)
            *opts.log << "start " << s << " value " << r.value << " evals " << r.evaluations
                      << '\n';
        if (r.value < best.hab) {
            best.hab = r.value;
            best.measurement = key_from_unitary(unitary_exp(hermitian_from_params(r.x)), outcomes);
        }
    }
    return best;
}

}  // namespace diqkd
