#include "invdiff/core.hpp"

#include <string>

namespace invdiff {

void Stencil4::validate() const {
    for (const Point& pt : p) {
        if (!std::isfinite(pt.x) || !std::isfinite(pt.y))
            throw DomainViolation("stencil point is not finite");
    }
    for (int k = 0; k < 3; ++k) {
        if (!(p[k].x < p[k + 1].x))
            throw OrderViolation("stencil abscissas must be strictly increasing (index " +
                                 std::to_string(k) + ")");
    }
}

DiscreteDerivs discrete_derivatives(const Stencil4& s) {
    // Divided-difference table over all four points, left-anchored.
    double d1[3], d2[2];
    for (int k = 0; k < 3; ++k)
        d1[k] = (s.p[k + 1].y - s.p[k].y) / (s.p[k + 1].x - s.p[k].x);
    for (int k = 0; k < 2; ++k)
        d2[k] = (d1[k + 1] - d1[k]) / (s.p[k + 2].x - s.p[k].x);
    const double d3 = (d2[1] - d2[0]) / (s.p[3].x - s.p[0].x);
    return DiscreteDerivs{d1[0], 2.0 * d2[0], 6.0 * d3};
}

Stencil4 stencil_from_jet(const Jet3& j, const SpacingDirection& dir, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw DomainViolation("invalid spacing: eps must be positive");
    for (double a : dir.alpha)
        if (!(a > 0.0) || !std::isfinite(a))
            throw DomainViolation("spacing direction entries must be positive");
    const double dx[4] = {-dir.alpha[0] * eps, 0.0, dir.alpha[1] * eps,
                          (dir.alpha[1] + dir.alpha[2]) * eps};
    std::array<Point, 4> pts;
    for (int k = 0; k < 4; ++k) pts[k] = Point{j.x + dx[k], taylor3_eval(j, dx[k])};
    return Stencil4(pts);
}

}  // namespace invdiff
