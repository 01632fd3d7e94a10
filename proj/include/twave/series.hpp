#pragma once

#include <algorithm>
#include <array>
#include <type_traits>
#include <climits>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "twave/errors.hpp"
#include "twave/model.hpp"

namespace twave {

/// Truncated power series in N variables, dense storage, graded by total degree.
///
/// Arithmetic tracks exactness: a result only claims coefficients up to the
/// degree where they equal the untruncated value. Products therefore use the
/// operands' valuations, derivatives lose one degree, and Euler operators
/// x_i d/dx_i keep it. T is double or an exact rational type.
template <class T, int N>
class Series {
    static_assert(N >= 1 && N <= 3, "1 to 3 variables");

public:
    using Index = std::array<int, N>;
    using scalar_type = T;
    static constexpr int nvars = N;
    static constexpr int infinite_valuation = INT_MAX / 4;

    Series() : Series(0) {}
    explicit Series(int max_deg) : deg_(max_deg) {
        if (max_deg < 0) throw DegreeMismatch("negative max_deg");
        c_.assign(cube(max_deg), T(0));
    }

    static Series constant(const T& v, int max_deg) {
        Series s(max_deg);
        s.c_[0] = v;
        return s;
    }
    static Series variable(int i, int max_deg) {
        Series s(max_deg);
        if (max_deg >= 1) {
            Index a{};
            a[i] = 1;
            s.set(a, T(1));
        }
        return s;
    }

    int max_deg() const { return deg_; }

    static int degree(const Index& a) {
        int d = 0;
        for (int v : a) d += v;
        return d;
    }

    /// Zero for monomials above max_deg.
    T coeff(const Index& a) const {
        for (int v : a)
            if (v < 0) return T(0);
        if (degree(a) > deg_) return T(0);
        return c_[flat(a)];
    }
    void set(const Index& a, const T& v) {
        for (int x : a)
            if (x < 0) throw DegreeMismatch("negative exponent");
        if (degree(a) > deg_) throw DegreeMismatch("monomial degree exceeds max_deg");
        c_[flat(a)] = v;
    }
    T& ref(const Index& a) {
        if (degree(a) > deg_) throw DegreeMismatch("monomial degree exceeds max_deg");
        return c_[flat(a)];
    }

    /// All monomials of degree <= d, ordered by degree then lexicographically.
    static std::vector<Index> indices(int d) {
        std::vector<Index> out;
        for (int t = 0; t <= d; ++t) append_degree(t, out);
        return out;
    }
    std::vector<Index> indices() const { return indices(deg_); }

    /// Lowest degree carrying a nonzero coefficient.
    int valuation() const {
        for (int t = 0; t <= deg_; ++t) {
            std::vector<Index> layer;
            append_degree(t, layer);
            for (const auto& a : layer)
                if (c_[flat(a)] != T(0)) return t;
        }
        return infinite_valuation;
    }
    bool is_zero() const { return valuation() == infinite_valuation; }

    /// Sum of |c| over monomials of exact degree d.
    T degree_mass(int d) const {
        using std::abs;
        T m(0);
        std::vector<Index> layer;
        append_degree(d, layer);
        for (const auto& a : layer) m += abs(c_[flat(a)]);
        return m;
    }

    Series truncated(int d) const {
        if (d > deg_) throw DegreeMismatch("cannot raise max_deg by truncation");
        Series s(d);
        for (const auto& a : indices(d)) s.c_[s.flat(a)] = c_[flat(a)];
        return s;
    }

    /// Same coefficients declared exact to a higher degree; valid only when the
    /// caller knows the missing coefficients vanish (e.g. polynomials).
    Series padded(int d) const {
        if (d < deg_) return truncated(d);
        Series s(d);
        for (const auto& a : indices(deg_)) s.c_[s.flat(a)] = c_[flat(a)];
        return s;
    }

    Series derivative(int i) const {
        Series s(std::max(deg_ - 1, 0));
        if (deg_ == 0) return s;
        for (const auto& a : indices(deg_ - 1)) {
            Index b = a;
            b[i] += 1;
            s.c_[s.flat(a)] = c_[flat(b)] * T(b[i]);
        }
        return s;
    }

    /// x_i d/dx_i, which preserves exactness degree.
    Series euler(int i) const {
        Series s(deg_);
        for (const auto& a : indices(deg_)) s.c_[flat(a)] = c_[flat(a)] * T(a[i]);
        return s;
    }

    /// x_i * s, exact through max_deg.
    Series times_variable(int i) const {
        Series s(deg_);
        for (const auto& a : indices(deg_ - 1)) {
            Index b = a;
            b[i] += 1;
            s.c_[flat(b)] = c_[flat(a)];
        }
        return s;
    }

    template <class U>
    Series<U, N> cast(std::function<U(const T&)> conv) const {
        Series<U, N> s(deg_);
        for (const auto& a : indices(deg_)) s.set(a, conv(c_[flat(a)]));
        return s;
    }

    Series& operator+=(const Series& o) { return *this = *this + o; }
    Series& operator-=(const Series& o) { return *this = *this - o; }
    Series& operator*=(const T& v) {
        for (auto& x : c_) x *= v;
        return *this;
    }

    friend Series operator+(const Series& a, const Series& b) { return combine(a, b, T(1)); }
    friend Series operator-(const Series& a, const Series& b) { return combine(a, b, T(-1)); }
    friend Series operator-(const Series& a) {
        Series s = a;
        for (auto& x : s.c_) x = -x;
        return s;
    }
    friend Series operator*(Series a, const T& v) { return a *= v; }
    friend Series operator*(const T& v, Series a) { return a *= v; }

    friend Series operator*(const Series& a, const Series& b) {
        const int va = a.valuation(), vb = b.valuation();
        int d = std::max(a.deg_, b.deg_);
        if (va != infinite_valuation && vb != infinite_valuation)
            d = std::min({a.deg_ + vb, b.deg_ + va, d});
        return multiply_to(a, b, d);
    }

    /// Product truncated at degree d without exactness bookkeeping.
    static Series multiply_to(const Series& a, const Series& b, int d) {
        Series r(d);
        auto na = a.nonzeros(), nb = b.nonzeros();
        for (const auto& [ia, xa] : na) {
            const int da = degree(ia);
            if (da > d) break;
            for (const auto& [ib, xb] : nb) {
                if (da + degree(ib) > d) break;
                Index c;
                for (int t = 0; t < N; ++t) c[t] = ia[t] + ib[t];
                r.c_[r.flat(c)] += xa * xb;
            }
        }
        return r;
    }

    friend bool operator==(const Series& a, const Series& b) {
        return a.deg_ == b.deg_ && a.c_ == b.c_;
    }

    /// Evaluate at a point; coefficients above max_deg are absent.
    template <class X>
    X value(const std::array<X, N>& x) const {
        X acc(0);
        for (const auto& [a, c] : nonzeros()) acc += X(c) * monomial(a, x);
        return acc;
    }

    /// Value and gradient at a point.
    template <class X>
    std::pair<X, std::array<X, N>> value_and_gradient(const std::array<X, N>& x) const {
        X v(0);
        std::array<X, N> g{};
        for (const auto& [a, c] : nonzeros()) {
            v += X(c) * monomial(a, x);
            for (int i = 0; i < N; ++i) {
                if (a[i] == 0) continue;
                Index b = a;
                b[i] -= 1;
                g[i] += X(c) * X(a[i]) * monomial(b, x);
            }
        }
        return {v, g};
    }

    /// (index, coefficient) for all nonzero coefficients in graded order.
    std::vector<std::pair<Index, T>> nonzeros() const {
        std::vector<std::pair<Index, T>> out;
        for (const auto& a : indices(deg_)) {
            const T& x = c_[flat(a)];
            if (x != T(0)) out.emplace_back(a, x);
        }
        return out;
    }

private:
    int deg_;
    std::vector<T> c_;

    static std::size_t cube(int d) {
        std::size_t s = 1;
        for (int i = 0; i < N; ++i) s *= static_cast<std::size_t>(d + 1);
        return s;
    }
    std::size_t flat(const Index& a) const {
        std::size_t f = 0;
        for (int i = N - 1; i >= 0; --i) f = f * static_cast<std::size_t>(deg_ + 1) + a[i];
        return f;
    }
    static void append_degree(int t, std::vector<Index>& out) {
        Index a{};
        fill_layer(0, t, a, out);
    }
    static void fill_layer(int i, int rest, Index& a, std::vector<Index>& out) {
        if (i == N - 1) {
            a[i] = rest;
            out.push_back(a);
            return;
        }
        for (int v = rest; v >= 0; --v) {
            a[i] = v;
            fill_layer(i + 1, rest - v, a, out);
        }
    }
    template <class X>
    static X monomial(const Index& a, const std::array<X, N>& x) {
        X m(1);
        for (int i = 0; i < N; ++i)
            for (int e = 0; e < a[i]; ++e) m *= x[i];
        return m;
    }
    static Series combine(const Series& a, const Series& b, const T& sb) {
        const int d = std::min(a.deg_, b.deg_);
        Series r(d);
        for (const auto& idx : indices(d)) r.c_[r.flat(idx)] = a.c_[a.flat(idx)] + sb * b.c_[b.flat(idx)];
        return r;
    }
};

/// f(s_0, ..., s_{M-1}) with inner series vanishing at the origin. The result
/// degree is the highest one at which the composition is exact.
template <class T, int M, int N>
Series<T, N> compose(const Series<T, M>& f, const std::array<Series<T, N>, M>& inner) {
    using S = Series<T, N>;
    int vmin = S::infinite_valuation, dmin = INT_MAX, dmax = 0;
    for (const auto& s : inner) {
        if (s.coeff({}) != T(0)) throw DegreeMismatch("compose needs inner series without constant term");
        vmin = std::min(vmin, s.valuation());
        dmin = std::min(dmin, s.max_deg());
        dmax = std::max(dmax, s.max_deg());
    }
    const int vf = f.valuation();
    if (vf == S::infinite_valuation) return S(dmin);
    int d = dmax;
    if (vmin != S::infinite_valuation) {
        const long lim1 = static_cast<long>(f.max_deg() + 1) * vmin - 1;
        const long lim2 = static_cast<long>(dmin) + static_cast<long>(vf - 1) * vmin;
        d = static_cast<int>(std::min<long>({lim1, lim2, static_cast<long>(dmax)}));
    }
    if (d < 0) d = 0;
    // powers of every inner series up to the needed exponent
    std::array<std::vector<S>, M> pw;
    for (int i = 0; i < M; ++i) {
        pw[i].push_back(S::constant(T(1), d));
        for (int e = 1; e <= f.max_deg(); ++e) pw[i].push_back(S::multiply_to(pw[i].back(), inner[i], d));
    }
    S out(d);
    for (const auto& [a, c] : f.nonzeros()) {
        S term = pw[0][a[0]];
        for (int i = 1; i < M; ++i) term = S::multiply_to(term, pw[i][a[i]], d);
        term *= c;
        out = out + term;
    }
    return out;
}

/// Weighted analytic norm sum eps^(w.alpha) |c_alpha|. Weights (1,2) for (xi, rho)
/// and (1, m, 1) for (xi, rho, sigma).
template <class T, int N>
double eps_norm(const Series<T, N>& s, double eps, const std::type_identity_t<std::array<int, N>>& weights) {
    if (!(eps > 0.0)) throw DomainError("eps_norm needs eps > 0");
    double acc = 0.0;
    for (const auto& [a, c] : s.nonzeros()) {
        int w = 0;
        for (int i = 0; i < N; ++i) w += weights[i] * a[i];
        acc += std::pow(eps, w) * std::abs(static_cast<double>(c));
    }
    return acc;
}

/// Root-test radius estimate from per-degree coefficient mass over the upper
/// half of the stored degrees. Infinite for polynomials of low degree.
template <class T, int N>
double radius_estimate(const Series<T, N>& s) {
    double r = std::numeric_limits<double>::infinity();
    const int D = s.max_deg();
    for (int d = std::max(1, (D + 1) / 2); d <= D; ++d) {
        const double m = static_cast<double>(s.degree_mass(d));
        if (m > 0.0) r = std::min(r, std::pow(m, -1.0 / d));
    }
    return r;
}

using Series2 = Series<double, 2>;
using Series3 = Series<double, 3>;

/// Generic-scalar kernels. The double API below wraps these; tests also run
/// them over exact rationals.
namespace kernel {

/// Taylor coefficients of (2/(3k^3)) rho (1 - (1+rho)^-1 (1+mu)^-1/2) in (rho, mu).
template <class T>
Series<T, 2> rhs_C(const T& k, int D) {
    Series<T, 2> c(D);
    const T pref = T(2) / (T(3) * k * k * k);
    std::vector<T> binom(D + 1);
    binom[0] = T(1);
    for (int b = 1; b <= D; ++b) binom[b] = binom[b - 1] * (T(-1) / T(2) - T(b - 1)) / T(b);
    for (int j = 1; j <= D; ++j)
        for (int l = 0; j + l <= D; ++l) {
            T v = (j - 1) % 2 == 0 ? -binom[l] : binom[l];
            if (j == 1 && l == 0) v += T(1);
            c.set({j, l}, pref * v);
        }
    return c;
}

/// Coefficients A_{j,l} of g, filled by induction on j+l and then on j.
template <class T>
Series<T, 2> compute_g(const T& n, const T& k, int D) {
    const auto C = rhs_C(k, D);
    Series<T, 2> A(D);
    const T c2 = T(2) / (T(3) * k * k * k * (T(3) - n));
    for (int m = 2; m <= D; ++m) {
        for (int j = 0; j <= m; ++j) {
            const int l = m - j;
            T num = C.coeff({j, l});
            if (j >= 1) num += c2 * T(l + 1) * A.coeff({j - 1, l + 1});
            // products of lower-degree coefficients, both factors of degree >= 2
            for (int j1 = 0; j1 <= j; ++j1)
                for (int l1 = 0; l1 <= l + 1; ++l1) {
                    const int j2 = j - j1, l2 = l + 1 - l1;
                    if (l2 == 0) continue;
                    if (j1 + l1 < 2 || j2 + l2 < 2 || j1 + l1 >= m || j2 + l2 >= m) continue;
                    num -= T(l2) * A.coeff({j1, l1}) * A.coeff({j2, l2});
                }
            A.set({j, l}, num / ((T(3) - n) * T(j) + T(l)));
        }
    }
    return A;
}

/// ((3-n) rho d_rho + mu d_mu - c rho d_mu) g + g d_mu g - C. Every term is
/// exact through max_deg because g starts at degree 2.
template <class T>
Series<T, 2> g_residual(const Series<T, 2>& g, const T& n, const T& k) {
    const int D = g.max_deg();
    const T c2 = T(2) / (T(3) * k * k * k * (T(3) - n));
    const auto gm = g.derivative(1);
    auto lin = (T(3) - n) * g.euler(0) + g.euler(1);
    auto drift = c2 * gm.padded(D).times_variable(0);
    auto quad = g * gm;
    return lin - drift + quad - rhs_C(k, D);
}

/// (xi d_xi + (3-n) rho d_rho - 1) w.
template <class T>
Series<T, 2> forward_nonresonant(const Series<T, 2>& w, const T& n) {
    Series<T, 2> out(w.max_deg());
    for (const auto& a : w.indices()) out.set(a, (T(a[0]) + (T(3) - n) * T(a[1]) - T(1)) * w.coeff(a));
    return out;
}

/// (m xi d_xi + rho d_rho + m (sigma + rho^m) d_sigma - m) w.
template <class T>
Series<T, 3> forward_resonant(const Series<T, 3>& w, int m) {
    const int D = w.max_deg();
    Series<T, 3> out(D);
    for (const auto& a : w.indices()) {
        T v = T(m * a[0] + a[1] + m * a[2] - m) * w.coeff(a);
        if (a[1] >= m) v += T(m) * T(a[2] + 1) * w.coeff({a[0], a[1] - m, a[2] + 1});
        out.set(a, v);
    }
    return out;
}

template <class T>
Series<T, 2> apply_T_nonresonant(const Series<T, 2>& phi, const T& n, double res_guard) {
    using std::abs;
    if (phi.coeff({0, 0}) != T(0) || phi.coeff({1, 0}) != T(0))
        throw IndexViolation("phi must vanish at (0,0) and (1,0)");
    Series<T, 2> out(phi.max_deg());
    for (const auto& a : phi.indices()) {
        if ((a[0] == 0 && a[1] == 0) || (a[0] == 1 && a[1] == 0)) continue;
        const T div = T(a[0]) + (T(3) - n) * T(a[1]) - T(1);
        if (static_cast<double>(abs(div)) < res_guard * std::max(1, a[1]))
            throw ResonantDivisor("divisor j+(3-n)l-1 vanishes at (" + std::to_string(a[0]) + "," +
                                  std::to_string(a[1]) + ")");
        out.set(a, phi.coeff(a) / div);
    }
    return out;
}

template <class T>
Series<T, 3> apply_T_resonant(const Series<T, 3>& phi, int m) {
    if (m < 1) throw IndexViolation("resonance order m must be >= 1");
    if (phi.coeff({0, 0, 0}) != T(0) || phi.coeff({1, 0, 0}) != T(0) || phi.coeff({0, 0, 1}) != T(0))
        throw IndexViolation("phi must vanish at (0,0,0), (1,0,0) and (0,0,1)");
    const int D = phi.max_deg();
    Series<T, 3> t(D);
    // t_{j,l,p} couples to t_{j,l-m,p+1}; ascending l makes that one available
    for (int l = 0; l <= D; ++l)
        for (int j = 0; j + l <= D; ++j)
            for (int p = 0; j + l + p <= D; ++p) {
                if ((j == 0 && l == 0 && p == 0) || (j == 1 && l == 0 && p == 0) || (j == 0 && l == m && p == 0))
                    continue;
                const T f = phi.coeff({j, l, p});
                if (j == 0 && l == 0 && p == 1) {
                    t.set({0, 0, 1}, phi.coeff({0, m, 0}) / T(m));
                    continue;
                }
                T num = f;
                if (l >= m) num -= T(m) * T(p + 1) * t.coeff({j, l - m, p + 1});
                t.set({j, l, p}, num / T(m * j + l + m * p - m));
            }
    return t;
}

/// One sweep of w <- T[phi(w)]; returns phi(w) so callers can form residuals.
template <class T>
Series<T, 2> phi_nonresonant(const Series<T, 2>& g, const Series<T, 2>& w, const T& n, const T& k) {
    const int D = w.max_deg();
    const T c2 = T(2) / (T(3) * k * k * k * (T(3) - n));
    using S = Series<T, 2>;
    auto rho = S::variable(1, D);
    auto mu = S::variable(0, D) + w;
    auto phi = compose<T, 2, 2>(g, {rho, mu});
    return phi.truncated(D) - c2 * rho;
}

template <class T>
Series<T, 3> phi_resonant(const Series<T, 2>& g, const Series<T, 3>& w, const T& n, const T& k, int m) {
    const int D = w.max_deg();
    const T c2 = T(2) / (T(3) * k * k * k * (T(3) - n));
    using S = Series<T, 3>;
    auto rho = S::variable(1, D);
    auto mu = S::variable(0, D) + w;
    auto phi = compose<T, 2, 3>(g, {rho, mu}).truncated(D);
    return T(m) * phi - (T(m) * c2) * rho;
}

template <class T>
struct WSolve {
    Series<T, 2> w2;  ///< non-resonant result
    Series<T, 3> w3;  ///< resonant result
    int sweeps = 0;
    bool projection_applied = false;
};

template <class T>
WSolve<T> solve_w(const T& n, const T& k, int m, int D, double res_guard) {
    const auto g = compute_g(n, k, D);
    WSolve<T> out;
    if (m == 0) {
        Series<T, 2> w(D);
        for (int it = 0; it <= D + 2; ++it) {
            auto next = apply_T_nonresonant(phi_nonresonant(g, w, n, k), n, res_guard);
            ++out.sweeps;
            if (next == w) {
                out.w2 = w;
                return out;
            }
            w = next;
        }
        throw NoConvergence("w fixed point did not settle in max_deg+3 sweeps");
    }
    Series<T, 3> w(D);
    for (int it = 0; it <= D + 2; ++it) {
        auto next = apply_T_resonant(phi_resonant(g, w, n, k, m), m);
        ++out.sweeps;
        // d_rho^m w(0) = 0 is imposed by T itself; record whether it ever had to act
        if (next.coeff({0, m, 0}) != T(0)) {
            out.projection_applied = true;
            next.set({0, m, 0}, T(0));
        }
        if (next == w) {
            out.w3 = w;
            return out;
        }
        w = next;
    }
    throw NoConvergence("w fixed point did not settle in max_deg+3 sweeps");
}

}  // namespace kernel

/// Coefficients A_{j,l} of g in (rho, mu) together with the parameters.
struct GSeries {
    Series2 coeffs;
    Params params;
    double radius = 0.0;  ///< root-test radius estimate
};

/// Contact-line unfolding w. Non-resonant results are stored with sigma-degree 0.
struct WSeries {
    Series3 coeffs;
    Params params;
    ResonanceClass resonance;
    double radius = 0.0;
    int sweeps = 0;
    bool projection_applied = false;
    std::vector<std::string> warnings;
};

struct MuEval {
    double mu = 0.0;
    double dmu_dH = 0.0;
    double dmu_db = 0.0;     ///< partial of mu_b(H) in b
    double d2mu_dbdH = 0.0;  ///< H-derivative of dmu_db
};

inline constexpr int default_series_degree = 12;
inline constexpr double series_window_fraction = 0.1;
inline constexpr double default_res_guard = 1e-8;

Series2 rhs_C_coeffs(const Params& params, int max_deg);
GSeries compute_g(const Params& params, int max_deg = default_series_degree);
Series2 g_pde_residual(const GSeries& g);

/// r^-1 g(r^3, r q) + q - (2/(3k^3(3-n))) r^2.
double p_minus_eval(const GSeries& g, double r, double q);

Series2 apply_T_nonresonant(const Series2& phi, const Params& params, double res_guard = default_res_guard);
Series3 apply_T_resonant(const Series3& phi, const Params& params);

WSeries solve_w(const Params& params, int max_deg = default_series_degree);

/// w - T[phi(w)], which vanishes identically for the solve_w output.
Series3 w_fixed_point_residual(const WSeries& w);

/// mu_b(H) = b H + w(b H, H^(3-n)[, H ln H]) and its derivatives.
MuEval eval_mu(const WSeries& w, double b, double H);

/// Largest H at which eval_mu stays inside the series window for slope b.
double series_window_H(const WSeries& w, double b);

}  // namespace twave
