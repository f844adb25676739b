#include "invdiff/invariants.hpp"

#include <cmath>

namespace invdiff {
namespace {

constexpr long double kDegenerateTol = 1e-300L;

wide::Real qabs(wide::Real v) { return v < 0 ? -v : v; }

wide::Vec4 xs_of(const Stencil4& s) {
    return {s.p[0].x, s.p[1].x, s.p[2].x, s.p[3].x};
}

wide::Vec4 ys_of(const Stencil4& s) {
    return {s.p[0].y, s.p[1].y, s.p[2].y, s.p[3].y};
}

}  // namespace

// The discrete invariants divide higher-order differences by powers of the
// spacing, which amplifies rounding error as the stencil shrinks. The actual
// arithmetic therefore lives in the quad-precision kernels below; the double
// interfaces merely promote and demote.
namespace wide {

Real sqrt_q(Real v) {
    // One Newton step lifts the 64-bit-mantissa estimate to full quad accuracy;
    // a second guards the last ulp.
    Real q = sqrtl((long double)v);
    if (q > 0) {
        q = Real(0.5) * (q + v / q);
        q = Real(0.5) * (q + v / q);
    }
    return q;
}

std::array<Real, 5> sim2_xi(const Vec4& x, const Vec4& y) {
    const Real h0 = x[1] - x[0], h1 = x[2] - x[1], h2 = x[3] - x[2];
    const Real d10 = y[1] - y[0], d21 = y[2] - y[1], d32 = y[3] - y[2];
    return {sqrt_q(h2 * h2 + d32 * d32), sqrt_q(h1 * h1 + d21 * d21),
            sqrt_q(h0 * h0 + d10 * d10), d32 * h1 - d21 * h2, d21 * h0 - d10 * h1};
}

std::array<Real, 2> sim2_j(const Vec4& x, const Vec4& y, Real alpha) {
    const std::array<Real, 5> xi = sim2_xi(x, y);
    const Real t1 = xi[3] / (xi[0] * xi[1] * (xi[0] + xi[1]));
    const Real t2 = xi[4] / (xi[1] * xi[2] * (xi[1] + xi[2]));
    return {Real(2) * alpha * t1 + Real(2) * (Real(1) - alpha) * t2,
            Real(6) / (xi[0] + xi[1] + xi[2]) * (t1 - t2)};
}

Real sl2_j1(const Vec4& x, const Vec4& y) {
    const Real h0 = x[1] - x[0], h1 = x[2] - x[1], h2 = x[3] - x[2];
    const Real d32 = y[3] - y[2], d10 = y[1] - y[0];
    if (qabs(d32) <= (Real)kDegenerateTol || qabs(d10) <= (Real)kDegenerateTol)
        throw DegenerateStencil("cross-ratio denominator vanishes");
    const Real R = (y[3] - y[1]) * (y[2] - y[0]) / (d32 * d10);
    const Real pref =
        Real(6) * h2 * h0 / (h1 * (h1 + h2) * (h0 + h1) * (h2 + h1 + h0));
    return pref * ((h2 + h1) * (h1 + h0) / (h0 * h2) - R);
}

std::array<Real, 5> gl2_xi(const Vec4& x, const Vec4& y) {
    for (const Real& xi : x)
        if (!(xi > Real(0)))
            throw DomainViolation("gl2 invariants need all abscissas > 0");
    return {(y[3] - y[2]) / sqrt_q(x[2] * x[3]), (y[2] - y[1]) / sqrt_q(x[1] * x[2]),
            (y[1] - y[0]) / sqrt_q(x[0] * x[1]), (y[3] - y[1]) / sqrt_q(x[1] * x[3]),
            (y[2] - y[0]) / sqrt_q(x[2] * x[0])};
}

std::array<Real, 2> gl2_j(const Vec4& x, const Vec4& y, Real alpha) {
    const std::array<Real, 5> xi = gl2_xi(x, y);
    if (qabs(xi[0]) <= (Real)kDegenerateTol || qabs(xi[1]) <= (Real)kDegenerateTol ||
        qabs(xi[2]) <= (Real)kDegenerateTol)
        throw DegenerateStencil("gl2 J invariants need nonvanishing xi_1..xi_3");
    const Real t1 = (xi[3] - xi[0] - xi[1]) / (xi[0] * (xi[0] + xi[1]));
    const Real t2 = (xi[4] - xi[1] - xi[2]) / (xi[2] * (xi[1] + xi[2]));
    return {Real(8) * (alpha * t1 + (Real(1) - alpha) * t2) / xi[1],
            Real(12) / (xi[1] * (xi[0] + xi[1] + xi[2])) * (t1 - t2)};
}

}  // namespace wide

Sim2Xi sim2_xi(const Stencil4& s) {
    const std::array<wide::Real, 5> xi = wide::sim2_xi(xs_of(s), ys_of(s));
    Sim2Xi r;
    for (int i = 0; i < 5; ++i) r.xi[size_t(i)] = double(xi[size_t(i)]);
    return r;
}

JPair sim2_j(const Stencil4& s, AlphaWeight w) {
    const std::array<wide::Real, 2> j =
        wide::sim2_j(xs_of(s), ys_of(s), wide::Real(w.alpha));
    return JPair{double(j[0]), double(j[1])};
}

double sl2_cross_ratio(const Stencil4& s) {
    const long double d32 = (long double)s.p[3].y - s.p[2].y;
    const long double d10 = (long double)s.p[1].y - s.p[0].y;
    if (fabsl(d32) <= kDegenerateTol || fabsl(d10) <= kDegenerateTol)
        throw DegenerateStencil("cross-ratio denominator vanishes");
    const long double d31 = (long double)s.p[3].y - s.p[1].y;
    const long double d20 = (long double)s.p[2].y - s.p[0].y;
    return double(d31 * d20 / (d32 * d10));
}

double sl2_j1(const Stencil4& s) {
    return double(wide::sl2_j1(xs_of(s), ys_of(s)));
}

Gl2Xi gl2_xi(const Stencil4& s) {
    const std::array<wide::Real, 5> xi = wide::gl2_xi(xs_of(s), ys_of(s));
    Gl2Xi r;
    for (int i = 0; i < 5; ++i) r.xi[size_t(i)] = double(xi[size_t(i)]);
    return r;
}

JPair gl2_j(const Stencil4& s, AlphaWeight w) {
    const std::array<wide::Real, 2> j =
        wide::gl2_j(xs_of(s), ys_of(s), wide::Real(w.alpha));
    return JPair{double(j[0]), double(j[1])};
}

InvariantValues continuous_invariants(AlgebraId algebra, const Jet3& j) {
    InvariantValues v;
    switch (algebra) {
        case AlgebraId::Sim2: {
            const double s = 1.0 + j.y1 * j.y1;
            v.I1 = j.y2 / std::pow(s, 1.5);
            v.I2 = (s * j.y3 - 3.0 * j.y1 * j.y2 * j.y2) / (s * s * s);
            if (j.y2 == 0.0) throw DegenerateJet("Sim2 ratio invariant needs y'' != 0");
            v.I = v.I2 / (v.I1 * v.I1);
            v.has_ratio = true;
            return v;
        }
        case AlgebraId::Sl2y: {
            if (j.y1 == 0.0) throw DegenerateJet("Schwarzian needs y' != 0");
            v.I1 = (j.y1 * j.y3 - 1.5 * j.y2 * j.y2) / (j.y1 * j.y1);
            return v;
        }
        case AlgebraId::Gl2xy: {
            if (j.x == 0.0 || j.y1 == 0.0)
                throw DegenerateJet("gl2 invariants need x != 0 and y' != 0");
            const double p = j.y1;
            v.I1 = (2.0 * j.x * j.y2 + p) / (p * p * p);
            v.I2 = j.x * j.x * (p * j.y3 - 3.0 * j.y2 * j.y2) / std::pow(p, 5);
            if (v.I1 > 0.0) {
                v.I = v.I2 / std::pow(v.I1, 1.5);
                v.has_ratio = true;
            }
            return v;
        }
    }
    throw DomainViolation("unknown algebra");
}

}  // namespace invdiff
