#include "invdiff/diffapprox.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "invdiff/newton.hpp"

namespace invdiff {
namespace {

double forcing_derivative(const OdeSpec& ode, double x) {
    const double h = 1e-3;
    return (8.0 * (ode.forcing(x + h) - ode.forcing(x - h)) -
            (ode.forcing(x + 2 * h) - ode.forcing(x - 2 * h))) /
           (12.0 * h);
}

double schwarzian(const Jet3& j) {
    if (j.y1 == 0.0) throw DegenerateJet("schwarzian needs y' != 0");
    return (j.y1 * j.y3 - 1.5 * j.y2 * j.y2) / (j.y1 * j.y1);
}

/// Constant dividing the closed form so its eps-coefficient matches the
/// fitted c1 of the corresponding raw scheme residual.
double closed_form_normalization(FirstApproxId id, const Jet3& j) {
    if (id == FirstApproxId::Sim2Eq) {
        const double s = 1.0 + j.y1 * j.y1;
        return s * s * s;
    }
    return 1.0;
}

/// y-offset of the degree-5 on-solution Taylor expansion, relative to j.y.
double taylor5_offset(const Jet3& j, const std::array<double, 2>& y45, double dx) {
    return dx * (j.y1 + dx * (j.y2 / 2 + dx * (j.y3 / 6 + dx * (y45[0] / 24 +
                  dx * y45[1] / 120))));
}

wide::Real taylor5_offset_wide(const Jet3& j, const std::array<double, 2>& y45,
                               wide::Real dx) {
    using R = wide::Real;
    return dx * (R(j.y1) +
                 dx * (R(j.y2) / 2 +
                       dx * (R(j.y3) / 6 +
                             dx * (R(y45[0]) / 24 + dx * R(y45[1]) / 120))));
}

Stencil4 offset_stencil(const Jet3& j, const std::array<double, 2>& y45,
                        const std::array<double, 3>& h) {
    return Stencil4(Point{j.x - h[0], taylor5_offset(j, y45, -h[0])},
                    Point{j.x, 0.0},
                    Point{j.x + h[1], taylor5_offset(j, y45, h[1])},
                    Point{j.x + h[1] + h[2], taylor5_offset(j, y45, h[1] + h[2])});
}

/// Coefficients of the interpolating polynomial through (xs, vs) in monomial
/// form (Newton divided differences expanded by Horner).
std::array<double, 4> interpolate_cubic(const std::array<double, 4>& xs,
                                        const std::array<double, 4>& vs) {
    std::array<double, 4> c = vs;
    for (int j = 1; j < 4; ++j)
        for (int i = 3; i >= j; --i)
            c[i] = (c[i] - c[i - 1]) / (xs[i] - xs[i - j]);
    std::array<double, 4> a{};
    a[0] = c[3];
    int deg = 0;
    for (int k = 2; k >= 0; --k) {
        for (int i = deg + 1; i > 0; --i) a[i] = a[i - 1] - xs[k] * a[i];
        a[0] = -xs[k] * a[0] + c[k];
        ++deg;
    }
    return a;
}

}  // namespace

ResidualFunctional residual_functional(FirstApproxId id, const OdeSpec& ode,
                                       const FirstApproxParams& par) {
    switch (id) {
        case FirstApproxId::Sim2Lattice:
            return {[](const Stencil4& s) {
                        const Sim2Xi xi = sim2_xi(s);
                        return 2.0 * (xi.xi[0] * xi.xi[2] - xi.xi[1] * xi.xi[1]);
                    },
                    1,
                    [](const wide::Vec4& x, const wide::Vec4& y) {
                        const auto xi = wide::sim2_xi(x, y);
                        return wide::Real(2) * (xi[0] * xi[2] - xi[1] * xi[1]);
                    }};
        case FirstApproxId::Sim2Eq:
            return {[ode, par](const Stencil4& s) {
                        const JPair j = sim2_j(s, AlphaWeight{par.alpha});
                        return j.J2 - ode.K * j.J1 * j.J1;
                    },
                    0,
                    [ode, par](const wide::Vec4& x, const wide::Vec4& y) {
                        const auto j = wide::sim2_j(x, y, wide::Real(par.alpha));
                        return j[1] - wide::Real(ode.K) * j[0] * j[0];
                    }};
        case FirstApproxId::Sl2Eq:
            return {[ode, par](const Stencil4& s) {
                        const double xi = s.p[1].x + par.a * s.h0() +
                                          par.b * s.h1() + par.c * s.h2();
                        return sl2_j1(s) - ode.forcing(xi);
                    },
                    0,
                    [ode, par](const wide::Vec4& x, const wide::Vec4& y) {
                        const wide::Real xi =
                            x[1] + wide::Real(par.a) * (x[1] - x[0]) +
                            wide::Real(par.b) * (x[2] - x[1]) +
                            wide::Real(par.c) * (x[3] - x[2]);
                        return wide::sl2_j1(x, y) -
                               wide::Real(ode.forcing(double(xi)));
                    }};
        case FirstApproxId::Gl2Lattice:
            return {[par](const Stencil4& s) {
                        const Gl2Xi xi = gl2_xi(s);
                        return s.p[1].x * (par.gamma * xi.xi[1] - xi.xi[0]);
                    },
                    1,
                    [par](const wide::Vec4& x, const wide::Vec4& y) {
                        const auto xi = wide::gl2_xi(x, y);
                        return x[1] * (wide::Real(par.gamma) * xi[1] - xi[0]);
                    }};
        case FirstApproxId::Gl2Eq:
            return {[ode, par](const Stencil4& s) {
                        const JPair j = gl2_j(s, AlphaWeight{par.alpha});
                        const double A2 = ode.A * ode.A;
                        return j.J2 * j.J2 - A2 * j.J1 * j.J1 * j.J1;
                    },
                    0,
                    [ode, par](const wide::Vec4& x, const wide::Vec4& y) {
                        const auto j = wide::gl2_j(x, y, wide::Real(par.alpha));
                        const wide::Real A2 = wide::Real(ode.A) * wide::Real(ode.A);
                        return j[1] * j[1] - A2 * j[0] * j[0] * j[0];
                    }};
    }
    throw DomainViolation("unknown first-approximation id");
}

Stencil4 solution_stencil(const OdeSpec& ode, const Jet3& j,
                          const std::array<double, 2>& y45,
                          const std::array<double, 3>& h) {
    (void)ode;
    return Stencil4(
        Point{j.x - h[0], j.y + taylor5_offset(j, y45, -h[0])},
        Point{j.x, j.y},
        Point{j.x + h[1], j.y + taylor5_offset(j, y45, h[1])},
        Point{j.x + h[1] + h[2], j.y + taylor5_offset(j, y45, h[1] + h[2])});
}

ExpansionReport extract_expansion(const ResidualFunctional& rf, const OdeSpec& ode,
                                  const Jet3& j, const SpacingDirection& dir,
                                  double eps0, int levels) {
    if (levels < 4) throw DomainViolation("expansion fit needs at least 4 levels");
    if (!(eps0 > 0.0)) throw DomainViolation("invalid spacing");
    if (std::abs(residual(ode, j)) > 1e-8 * (1.0 + std::abs(j.y3)))
        throw DomainViolation("expansion jet must satisfy the ODE");

    const std::array<double, 2> y45 = extend_jet(ode, j);
    const int degree = levels >= 7 ? 4 : (levels >= 5 ? 3 : 2);

    ExpansionReport rep;
    rep.eps_grid.reserve(levels);
    Eigen::MatrixXd V(levels, degree + 1);
    Eigen::VectorXd rhs(levels);
    for (int k = 0; k < levels; ++k) {
        using R = wide::Real;
        const R eps = R(eps0) / R(1 << k);
        rep.eps_grid.push_back(double(eps));
        const R h0 = R(dir.alpha[0]) * eps;
        const R h1 = R(dir.alpha[1]) * eps;
        const R h2 = R(dir.alpha[2]) * eps;
        R v;
        if (rf.f_wide) {
            const wide::Vec4 xo{R(j.x) - h0, R(j.x), R(j.x) + h1,
                                R(j.x) + h1 + h2};
            const wide::Vec4 yo{taylor5_offset_wide(j, y45, -h0), R(0),
                                taylor5_offset_wide(j, y45, h1),
                                taylor5_offset_wide(j, y45, h1 + h2)};
            v = rf.f_wide(xo, yo);
        } else {
            v = R(rf.f(offset_stencil(
                j, y45, {double(h0), double(h1), double(h2)})));
        }
        for (int p = 0; p < rf.normalize_power; ++p) v /= eps;
        const double t = double(eps) / eps0;  // scaled fit variable, a power of 2
        double tp = 1.0;
        for (int col = 0; col <= degree; ++col) {
            V(k, col) = tp;
            tp *= t;
        }
        rhs(k) = double(v);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 0.0) || sv(0) / sv(sv.size() - 1) > 1e12)
        throw IllConditionedFit("expansion fit system is numerically singular");
    Eigen::VectorXd coef = svd.solve(rhs);

    double scale = 1.0;
    std::array<double, 5> c{};
    for (int col = 0; col <= degree; ++col) {
        c[size_t(col)] = coef(col) / scale;
        scale *= eps0;
    }
    rep.c0 = c[0];
    rep.c1 = c[1];
    rep.c2 = c[2];
    rep.c3 = c[3];
    rep.fit_residual = (V * coef - rhs).norm() / std::sqrt(double(levels));
    return rep;
}

double first_approx_value(FirstApproxId id, const OdeSpec& ode,
                          const FirstApproxParams& par, const Jet3& j,
                          const std::array<double, 3>& h) {
    const double h0 = h[0], h1 = h[1], h2 = h[2];
    if (!(h0 > 0.0 && h1 > 0.0 && h2 > 0.0))
        throw DomainViolation("spacings must be positive");
    const double S = h0 + h1 + h2;
    switch (id) {
        case FirstApproxId::Sim2Lattice:
            return 2.0 * (h0 * h2 - h1 * h1) * (j.y1 * j.y1 + 1.0) +
                   (2.0 * h0 * h1 * h2 - 2.0 * h1 * h1 * h1 - h0 * h0 * h2 +
                    h0 * h2 * h2) *
                       j.y1 * j.y2;
        case FirstApproxId::Sim2Eq: {
            const double s = 1.0 + j.y1 * j.y1;
            const double K = ode.K;
            const double brace =
                K * K *
                    (16.0 * par.alpha * S * S - 4.0 * h0 * h0 - 12.0 * h2 * h2 -
                     8.0 * h1 * h1 - 16.0 * h0 * h2 - 20.0 * h1 * h2 -
                     12.0 * h0 * h1) +
                9.0 * h1 * (h2 - h0);
            return (s * j.y3 - 3.0 * j.y1 * j.y2 * j.y2 - K * j.y2 * j.y2) -
                   (1.0 / 24.0) * std::pow(j.y2, 3) / (s * S) * brace;
        }
        case FirstApproxId::Sl2Eq: {
            const double bracket = h0 * (1.0 + 4.0 * par.a) -
                                   2.0 * h1 * (1.0 - 2.0 * par.b) -
                                   h2 * (1.0 - 4.0 * par.c);
            return schwarzian(j) - ode.forcing(j.x) -
                   0.25 * forcing_derivative(ode, j.x) * bracket;
        }
        case FirstApproxId::Gl2Lattice: {
            if (!(j.x > 0.0)) throw DomainViolation("needs x > 0");
            return (par.gamma * h1 - h2) * j.y1 +
                   (0.5 / j.x) * (j.y1 - j.x * j.y2) *
                       (-par.gamma * h1 * h1 + 2.0 * h1 * h2 + h2 * h2);
        }
        case FirstApproxId::Gl2Eq: {
            // Spacing term verified against the expansion for |A| = 1, the
            // parameter value the signed scheme is normalized to.
            if (!(j.x > 0.0 && j.y1 > 0.0))
                throw DomainViolation("needs x > 0 and y' > 0");
            const double u = j.y1 + 2.0 * j.x * j.y2;
            if (u < 0.0) throw DomainViolation("needs y' + 2xy'' >= 0");
            const InvariantValues iv = continuous_invariants(AlgebraId::Gl2xy, j);
            const double A2 = ode.A * ode.A;
            const double w = par.alpha;
            const double br = h0 * h0 * (32.0 * w - 11.0) +
                              16.0 * h1 * h1 * (2.0 * w - 1.0) +
                              h2 * h2 * (32.0 * w - 21.0) +
                              h0 * h1 * (64.0 * w - 21.0) +
                              32.0 * h0 * h2 * (2.0 * w - 1.0) +
                              h1 * h2 * (64.0 * w - 43.0);
            return (iv.I2 * iv.I2 - A2 * iv.I1 * iv.I1 * iv.I1) +
                   std::sqrt(j.y1) * std::pow(u, 3.5) /
                       (16.0 * j.x * std::pow(j.y1, 10) * S) * br;
        }
    }
    throw DomainViolation("unknown first-approximation id");
}

double closed_form_c1(FirstApproxId id, const OdeSpec& ode,
                      const FirstApproxParams& par, const Jet3& j,
                      const SpacingDirection& dir) {
    const int p = residual_functional(id, ode, par).normalize_power;
    const double norm = closed_form_normalization(id, j);
    std::array<double, 4> eps_nodes{0.01, 0.02, 0.03, 0.04};
    std::array<double, 4> vals{};
    for (int k = 0; k < 4; ++k) {
        const double e = eps_nodes[size_t(k)];
        const std::array<double, 3> h{dir.alpha[0] * e, dir.alpha[1] * e,
                                      dir.alpha[2] * e};
        double v = first_approx_value(id, ode, par, j, h) / norm;
        for (int q = 0; q < p; ++q) v /= e;
        vals[size_t(k)] = v;
    }
    return interpolate_cubic(eps_nodes, vals)[1];
}

double first_approx_scale(double c1, double eps0, double value) {
    return std::max({1.0, std::abs(c1) * eps0, std::abs(value)});
}

std::array<double, 3> zero_set_spacings(FirstApproxId id, const OdeSpec& ode,
                                        FirstApproxParams& par, const Jet3& j,
                                        double h0, double h1) {
    if (!(h0 > 0.0 && h1 > 0.0)) throw DomainViolation("spacings must be positive");
    if (id == FirstApproxId::Gl2Lattice) {
        // The closed form is affine in gamma: one secant step is exact.
        const double h2 = h1;
        const double g0 = par.gamma;
        const double v0 = first_approx_value(id, ode, par, j, {h0, h1, h2});
        FirstApproxParams p1 = par;
        p1.gamma = g0 + 1.0;
        const double v1 = first_approx_value(id, ode, p1, j, {h0, h1, h2});
        if (std::abs(v1 - v0) <= 1e-300)
            throw DegenerateStencil("lattice ratio has no effect at this jet");
        par.gamma = g0 - v0 / (v1 - v0);
        return {h0, h1, h2};
    }
    auto f = [&](double h2) -> double {
        if (!(h2 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        try {
            return first_approx_value(id, ode, par, j, {h0, h1, h2});
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    const double start =
        id == FirstApproxId::Sim2Lattice ? h1 * h1 / h0 : h0;
    NewtonOptions opt;
    opt.tol = 1e-13 * std::max(1.0, std::abs(f(start)));
    NewtonReport rep;
    const double h2 = newton_solve_1d(f, start, opt, rep);
    if (!rep.converged || !(h2 > 0.0))
        throw DegenerateStencil("no admissible spacing on the zero set");
    return {h0, h1, h2};
}

FirstApproxCheck check_first_approx_invariance(FirstApproxId id, const OdeSpec& ode,
                                               const FirstApproxParams& par,
                                               const GroupElement& g, const Jet3& j,
                                               const std::array<double, 3>& h) {
    FirstApproxCheck out;
    out.value_original = first_approx_value(id, ode, par, j, h);

    const std::array<double, 2> y45 = extend_jet(ode, j);
    const Stencil4 s = solution_stencil(ode, j, y45, h);
    const Stencil4 st = apply_stencil(g, s);
    const Jet3 jt = transform_jet(g, j);
    const std::array<double, 3> ht{st.h0(), st.h1(), st.h2()};
    out.value_transformed = first_approx_value(id, ode, par, jt, ht);

    const double scale = std::max(
        {1.0, std::abs(out.value_original), std::abs(out.value_transformed)});
    out.tol = 1e-6 * scale;
    out.zero_set_preserved = std::abs(out.value_original) > out.tol ||
                             std::abs(out.value_transformed) <= 10.0 * out.tol;
    if (std::abs(out.value_original) > out.tol &&
        std::abs(out.value_transformed) > out.tol) {
        out.ratio = out.value_transformed / out.value_original;
        out.has_ratio = true;
    }
    return out;
}

}  // namespace invdiff
