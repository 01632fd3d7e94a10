#include "twave/model.hpp"

#include <cmath>
#include <sstream>

#include "twave/errors.hpp"

namespace twave {

Params validate_params(double n, double k, double lambda, double V) {
    auto fail = [](const char* name, double v, const char* bound) {
        std::ostringstream os;
        os.precision(17);
        os << name << " = " << v << " violates " << bound;
        throw RangeError(os.str());
    };
    if (!(n > 0.0 && n < 3.0)) fail("n", n, "0 < n < 3");
    if (!(k > 0.0) || !std::isfinite(k)) fail("k", k, "k > 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda", lambda, "lambda > 0");
    if (!(V > 0.0) || !std::isfinite(V)) fail("V", V, "V > 0");
    Params p{n, k, lambda, V, false};
    p.normalized = lambda == 1.0 && V == 1.0 / 3.0;
    return p;
}

std::pair<Params, ScaleRecord> normalize(const Params& params, double k_phys) {
    validate_params(params.n, k_phys, params.lambda, params.V);
    const double a = std::cbrt(3.0 * params.V);
    ScaleRecord rec{params.lambda, params.lambda / a, a};
    // already-normalized input gets unit scales bit for bit
    if (params.lambda == 1.0 && params.V == 1.0 / 3.0) rec = ScaleRecord{};
    Params out = validate_params(params.n, rec.angle_scale * k_phys, 1.0, 1.0 / 3.0);
    return {out, rec};
}

double mobility(double h, const Params& params) {
    if (h < 0.0 || std::isnan(h)) throw DomainError("mobility needs h >= 0");
    if (h == 0.0) return 0.0;
    return h * h * h + std::pow(params.lambda, 3.0 - params.n) * std::pow(h, params.n);
}

double resonance_distance(double n) {
    if (n < 2.0) return 2.0 - n;
    if (n >= 3.0) return INFINITY;
    // 3 - 1/m = n  <=>  m = 1/(3-n); the neighbours of that real m are the candidates
    const double mr = 1.0 / (3.0 - n);
    double best = INFINITY;
    for (double m : {std::floor(mr), std::ceil(mr)}) {
        if (m < 1.0) continue;
        best = std::min(best, std::abs(n - (3.0 - 1.0 / m)));
    }
    return best;
}

ResonanceClass resonance_class(double n, double res_tol) {
    ResonanceClass rc;
    if (n + res_tol < 2.0) {
        if (2.0 - n <= near_resonance_tol)
            rc.warning = "n is within 1e-3 of the resonant value 2";
        return rc;
    }
    const double mr = 1.0 / (3.0 - n);
    for (double m : {std::floor(mr), std::ceil(mr)}) {
        if (m < 1.0) continue;
        const double d = std::abs(n - (3.0 - 1.0 / m));
        if (d <= res_tol) {
            rc.tag = ResonanceClass::Tag::Resonant;
            rc.m = static_cast<int>(m);
            return rc;
        }
    }
    const double d = resonance_distance(n);
    if (d <= near_resonance_tol) {
        std::ostringstream os;
        os.precision(3);
        os << "n is " << d << " away from a resonant value 3 - 1/m; series divisors are small";
        rc.warning = os.str();
    }
    return rc;
}

}  // namespace twave
