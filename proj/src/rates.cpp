#include "diqkd/rates.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace diqkd {

double h_ab(const Behavior& p, int keyX, int keyY) {
    const Scenario& sc = p.scenario();
    if (keyX < 1 || keyX > sc.nA || keyY < 1 || keyY > sc.nB)
        throw std::out_of_range("h_ab: key inputs out of range");
    double h = 0.0;
    for (int a = 1; a <= sc.mA; ++a)
        for (int b = 1; b <= sc.mB; ++b) {
            double q = p.p(keyX, keyY, a, b);
            if (q > 0.0) h -= q * std::log2(q);
        }
    for (int b = 1; b <= sc.mB; ++b) {
        double q = p.marginal_B(b, keyY, keyX);
        if (q > 0.0) h += q * std::log2(q);
    }
    return h;
}

double devetak_winter(double hae, double hab) { return hae - hab; }

ThresholdResult scan_threshold(const std::function<double(double)>& rate, double lo, double hi,
                               double tol, int preScanPoints) {
    if (!(lo < hi) || tol <= 0.0) throw std::invalid_argument("scan_threshold: bad interval");
    ThresholdResult out;
    double rlo = rate(lo), rhi = rate(hi);
    if (preScanPoints > 1) {
        double prev = rlo;
        for (int i = 1; i < preScanPoints; ++i) {
            double t = lo + (hi - lo) * i / (preScanPoints - 1);
            double r = i == preScanPoints - 1 ? rhi : rate(t);
            if (r < prev - 1e-6) out.monotone = false;
            prev = r;
        }
    }
    if (!(rlo <= 0.0 && rhi >= 0.0)) return out;  // no crossing reported
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (rate(mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    out.threshold = 0.5 * (lo + hi);
    return out;
}

Behavior restrict_bob_inputs(const Behavior& p, int nB) {
    const Scenario& sc = p.scenario();
    if (nB < 1 || nB > sc.nB) throw std::out_of_range("restrict_bob_inputs: bad count");
    Scenario sub{sc.nA, nB, sc.mA, sc.mB};
    std::vector<double> t;
    t.reserve(sub.joint_size());
    for (int x = 1; x <= sc.nA; ++x)
        for (int y = 1; y <= nB; ++y)
            for (int a = 1; a <= sc.mA; ++a)
                for (int b = 1; b <= sc.mB; ++b) t.push_back(p.p(x, y, a, b));
    return Behavior(sub, std::move(t));
}

KeyRatePoint key_rate_point(const KeyRateJob& job, double eta, double v) {
    QuantumRealization extended = job.realization;
    Measurement key = job.bobKey.effects.empty() ? job.realization.alice.at(0).transposed()
                                                 : job.bobKey;
    if (key.outcomes() != extended.bob.at(0).outcomes())
        throw std::invalid_argument("key_rate_point: key measurement outcome count mismatch");
    extended.bob.push_back(key);

    const int nTest = static_cast<int>(job.realization.bob.size());
    Behavior degraded = degrade(extended, NoiseParams{eta, v});
    Behavior testPart = restrict_bob_inputs(degraded, nTest);

    KeyRatePoint pt;
    pt.eta = eta;
    pt.v = v;
    pt.bellValue = eval(job.functional, testPart);

    EntropyOptions eopts = job.entropy;
    EntropyProgram prog = build_entropy_program(testPart, job.k, job.level, job.extras, eopts);
    EntropyBound bound = entropy_lower_bound(prog, job.solver);
    pt.haeBound = bound.bits;
    pt.hab = h_ab(degraded, eopts.keyInput, nTest + 1);
    pt.rate = devetak_winter(pt.haeBound, pt.hab);
    return pt;
}

void write_curve_csv(std::ostream& os, const KeyRateCurve& curve) {
    os << "param,eta,v,bell,hae,hab,rate\n";
    char buf[256];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      curve.param.c_str(), p.eta, p.v, p.bellValue, p.haeBound, p.hab, p.rate);
        os << buf;
    }
}

}  // namespace diqkd
