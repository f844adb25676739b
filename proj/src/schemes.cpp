#include "invdiff/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace invdiff {
namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

double quadratic_extrapolate(const StepState& st, double X) {
    const double x0 = st.p[0].x, x1 = st.p[1].x, x2 = st.p[2].x;
    const double y0 = st.p[0].y, y1 = st.p[1].y, y2 = st.p[2].y;
    return y0 * (X - x1) * (X - x2) / ((x0 - x1) * (x0 - x2)) +
           y1 * (X - x0) * (X - x2) / ((x1 - x0) * (x1 - x2)) +
           y2 * (X - x0) * (X - x1) / ((x2 - x0) * (x2 - x1));
}

Stencil4 extend(const StepState& st, double x, double y) {
    return Stencil4(st.p[0], st.p[1], st.p[2], Point{x, y});
}

StepResult step_inv_sl2(const SchemeSpec& spec, const StepState& st) {
    const double x_new = 2.0 * st.p[2].x - st.p[1].x;
    const double h0 = st.p[1].x - st.p[0].x;
    const double h1 = st.p[2].x - st.p[1].x;
    const double h2 = x_new - st.p[2].x;
    const double y0 = st.p[0].y, y1 = st.p[1].y, y2 = st.p[2].y;
    if (std::abs(y1 - y0) <= 0.0 || std::abs(y2 - y1) <= 0.0)
        throw DegenerateStencil("inv_sl2 step: repeated y-values");
    const double A = (y2 - y0) / (y1 - y0);
    const double P = (h2 + h1) * (h1 + h0) / (h0 * h2);
    const double pref =
        6.0 * h2 * h0 / (h1 * (h1 + h2) * (h0 + h1) * (h2 + h1 + h0));
    const double xi = st.p[1].x + spec.a * h0 + spec.b * h1 + spec.c * h2;
    const double R = P - spec.ode.forcing(xi) / pref;
    if (std::abs(R - A) <= 1e-300)
        throw DegenerateStencil("inv_sl2 step: cross-ratio equation degenerate");
    const double y_new = (R * y2 - A * y1) / (R - A);

    StepResult out;
    out.next = Point{x_new, y_new};
    out.report.converged = true;
    out.report.iterations = 0;
    const Stencil4 s = extend(st, x_new, y_new);
    out.report.final_residual_norm =
        std::abs(sl2_j1(s) - spec.ode.forcing(xi));
    return out;
}

StepResult step_standard(const SchemeSpec& spec, const StepState& st) {
    const double x_new = st.p[2].x + spec.h;
    auto f = [&](double y_new) -> double {
        try {
            return scheme_equations(spec, extend(st, x_new, y_new))[0];
        } catch (const Error&) {
            return kNaN;
        }
    };
    NewtonOptions opt = spec.newton;
    StepResult out;
    const double y_new =
        newton_solve_1d(f, quadratic_extrapolate(st, x_new), opt, out.report);
    out.next = Point{x_new, y_new};
    if (!out.report.converged)
        throw NewtonDiverged("standard step: no convergence after " +
                             std::to_string(out.report.iterations) +
                             " iterations, residual " +
                             std::to_string(out.report.final_residual_norm));
    return out;
}

StepResult step_coupled(const SchemeSpec& spec, const StepState& st) {
    const double x2 = st.p[2].x;
    const double h0 = st.p[1].x - st.p[0].x;
    const double h1 = x2 - st.p[1].x;
    auto f = [&](const std::array<double, 2>& u) -> std::array<double, 2> {
        if (!(u[0] > x2)) return {kNaN, kNaN};
        try {
            return scheme_equations(spec, extend(st, u[0], u[1]));
        } catch (const Error&) {
            return {kNaN, kNaN};
        }
    };
    double h_guess = h1;
    if (spec.kind == SchemeKind::InvSim2)
        h_guess = std::clamp(h1 * h1 / h0, 0.2 * h1, 5.0 * h1);
    const double x_guess = x2 + h_guess;
    std::array<double, 2> u0{x_guess, quadratic_extrapolate(st, x_guess)};
    StepResult out;
    const auto u = newton_solve_2d(f, u0, spec.newton, out.report);
    out.next = Point{u[0], u[1]};
    if (!out.report.converged)
        throw NewtonDiverged("invariant step: no convergence after " +
                             std::to_string(out.report.iterations) +
                             " iterations, residual " +
                             std::to_string(out.report.final_residual_norm));
    return out;
}

}  // namespace

SchemeSpec SchemeSpec::inv_sim2(double K, double alpha) {
    SchemeSpec s;
    s.kind = SchemeKind::InvSim2;
    s.ode = OdeSpec::sim2(K);
    s.weight.alpha = alpha;
    return s;
}

SchemeSpec SchemeSpec::inv_sl2(std::function<double(double)> F, double a, double b,
                               double c) {
    SchemeSpec s;
    s.kind = SchemeKind::InvSl2;
    s.ode = OdeSpec::sl2(std::move(F));
    s.a = a;
    s.b = b;
    s.c = c;
    return s;
}

SchemeSpec SchemeSpec::inv_gl2(double A, int branch_sign, double alpha, double gamma) {
    SchemeSpec s;
    s.kind = SchemeKind::InvGl2;
    s.ode = OdeSpec::gl2(A, branch_sign);
    s.weight.alpha = alpha;
    s.gamma = gamma;
    return s;
}

SchemeSpec SchemeSpec::standard(const OdeSpec& ode, double h) {
    if (!(h > 0.0)) throw DomainViolation("invalid spacing");
    SchemeSpec s;
    s.kind = SchemeKind::Standard;
    s.ode = ode;
    s.h = h;
    return s;
}

void StepState::validate() const {
    if (!(p[0].x < p[1].x && p[1].x < p[2].x))
        throw OrderViolation("step state abscissas must be increasing");
    for (const Point& pt : p)
        if (!std::isfinite(pt.x) || !std::isfinite(pt.y))
            throw DomainViolation("step state values must be finite");
}

std::array<double, 2> scheme_equations(const SchemeSpec& spec, const Stencil4& s) {
    switch (spec.kind) {
        case SchemeKind::InvSim2: {
            const Sim2Xi xi = sim2_xi(s);
            const JPair j = sim2_j(s, spec.weight);
            return {j.J2 - spec.ode.K * j.J1 * j.J1,
                    xi.xi[0] * xi.xi[2] - xi.xi[1] * xi.xi[1]};
        }
        case SchemeKind::InvSl2: {
            const double xi = s.p[1].x + spec.a * s.h0() + spec.b * s.h1() +
                              spec.c * s.h2();
            return {sl2_j1(s) - spec.ode.forcing(xi),
                    s.p[3].x - 2.0 * s.p[2].x + s.p[1].x};
        }
        case SchemeKind::InvGl2: {
            const Gl2Xi xi = gl2_xi(s);
            const JPair j = gl2_j(s, spec.weight);
            if (j.J1 < 0.0)
                throw DomainViolation("inv_gl2 equation needs J1 >= 0");
            return {j.J2 - spec.ode.branch_sign * std::abs(spec.ode.A) *
                               std::pow(j.J1, 1.5),
                    xi.xi[0] / xi.xi[1] - spec.gamma};
        }
        case SchemeKind::Standard: {
            const DiscreteDerivs d = discrete_derivatives(s);
            return {residual(spec.ode, Jet3{s.p[1].x, s.p[1].y, d.p1, d.p2, d.p3}),
                    s.p[3].x - s.p[2].x - spec.h};
        }
    }
    throw DomainViolation("unknown scheme kind");
}

StepResult step(const SchemeSpec& spec, const StepState& st) {
    st.validate();
    switch (spec.kind) {
        case SchemeKind::InvSl2: return step_inv_sl2(spec, st);
        case SchemeKind::Standard: return step_standard(spec, st);
        case SchemeKind::InvSim2:
        case SchemeKind::InvGl2: return step_coupled(spec, st);
    }
    throw DomainViolation("unknown scheme kind");
}

RunResult run(const SchemeSpec& spec, const StepState& seed, int n_steps) {
    seed.validate();
    RunResult out;
    out.points.assign(seed.p.begin(), seed.p.end());
    StepState st = seed;
    for (int k = 0; k < n_steps; ++k) {
        try {
            const StepResult r = step(spec, st);
            st = st.advanced(r.next);  // rejects non-monotone abscissas
            out.reports.push_back(r.report);
            out.points.push_back(r.next);
        } catch (const Error& e) {
            out.halted = true;
            out.halt_index = k;
            out.halt_reason = e.what();
            break;
        }
    }
    return out;
}

StepState seed_from_initial_data(const SchemeSpec& spec, const OdeSpec& ode,
                                 const InitialData& init, double eps) {
    (void)spec;
    if (!(eps > 0.0)) throw DomainViolation("invalid spacing");
    constexpr double kSeedTol = 1e-13;
    const Jet3 lo = reference_jet_at(ode, init, init.x0 - eps, kSeedTol);
    const Jet3 hi = reference_jet_at(ode, init, init.x0 + eps, kSeedTol);
    return StepState({Point{lo.x, lo.y}, Point{init.x0, init.y0}, Point{hi.x, hi.y}});
}

double gl2_gamma_from_seed(const StepState& seed) {
    seed.validate();
    for (const Point& pt : seed.p)
        if (!(pt.x > 0.0))
            throw DomainViolation("gamma measurement needs positive abscissas");
    const double upper = (seed.p[2].y - seed.p[1].y) /
                         std::sqrt(seed.p[1].x * seed.p[2].x);
    const double lower = (seed.p[1].y - seed.p[0].y) /
                         std::sqrt(seed.p[0].x * seed.p[1].x);
    if (std::abs(lower) <= 1e-300)
        throw DegenerateStencil("gamma measurement: flat lower chord");
    return upper / lower;
}

}  // namespace invdiff
