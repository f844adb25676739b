#pragma once

#include <array>
#include <cmath>

#include "invdiff/errors.hpp"

namespace invdiff {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Four ordered stencil points (x_{n-1}, x_n, x_{n+1}, x_{n+2}) with strictly
/// increasing abscissas. Index 1 is the reference point x_n.
struct Stencil4 {
    std::array<Point, 4> p;

    Stencil4() = default;
    explicit Stencil4(const std::array<Point, 4>& pts) : p(pts) { validate(); }
    Stencil4(Point a, Point b, Point c, Point d) : p{a, b, c, d} { validate(); }

    double h0() const { return p[1].x - p[0].x; }  ///< h_n
    double h1() const { return p[2].x - p[1].x; }  ///< h_{n+1}
    double h2() const { return p[3].x - p[2].x; }  ///< h_{n+2}

    void validate() const;
};

/// Third-order jet (x, y, y', y'', y''').
struct Jet3 {
    double x = 0.0;
    double y = 0.0;
    double y1 = 0.0;
    double y2 = 0.0;
    double y3 = 0.0;
};

/// Relative spacings h_{n+k} = alpha[k] * eps used when shrinking a stencil
/// toward its reference point.
struct SpacingDirection {
    std::array<double, 3> alpha{1.0, 1.0, 1.0};
};

struct DiscreteDerivs {
    double p1 = 0.0;
    double p2 = 0.0;
    double p3 = 0.0;
};

/// Newton divided differences over the four stencil points, scaled by k!, so
/// that p_k -> y^(k)(x_n) as the stencil shrinks.
DiscreteDerivs discrete_derivatives(const Stencil4& s);

/// Stencil whose y-values are the degree-3 Taylor polynomial of the jet,
/// with abscissas x_n - a0*eps, x_n, x_n + a1*eps, x_n + (a1+a2)*eps.
Stencil4 stencil_from_jet(const Jet3& j, const SpacingDirection& dir, double eps);

/// Degree-3 Taylor polynomial of the jet evaluated at offset dx from j.x.
inline double taylor3_eval(const Jet3& j, double dx) {
    return j.y + dx * (j.y1 + dx * (j.y2 / 2.0 + dx * j.y3 / 6.0));
}

}  // namespace invdiff
