#include "invdiff/odes.hpp"

#include <cmath>

namespace invdiff {
namespace {

constexpr double kOverflowGuard = 1e12;
constexpr double kMinStep = 1e-14;

double gl2_i1(double x, double y1, double y2) {
    return (2.0 * x * y2 + y1) / (y1 * y1 * y1);
}

struct State {
    double y, y1, y2;
};

State rk4_step(const OdeSpec& spec, double x, State u, double h) {
    auto f = [&spec](double xx, const State& s) {
        return State{s.y1, s.y2, rhs(spec, xx, s.y, s.y1, s.y2)};
    };
    auto axpy = [](const State& s, double c, const State& d) {
        return State{s.y + c * d.y, s.y1 + c * d.y1, s.y2 + c * d.y2};
    };
    const State k1 = f(x, u);
    const State k2 = f(x + h / 2, axpy(u, h / 2, k1));
    const State k3 = f(x + h / 2, axpy(u, h / 2, k2));
    const State k4 = f(x + h, axpy(u, h, k3));
    return State{u.y + h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
                 u.y1 + h / 6 * (k1.y1 + 2 * k2.y1 + 2 * k3.y1 + k4.y1),
                 u.y2 + h / 6 * (k1.y2 + 2 * k2.y2 + 2 * k3.y2 + k4.y2)};
}

std::vector<Jet3> integrate(const OdeSpec& spec, const InitialData& init, double x_target,
                            long n) {
    const double h = (x_target - init.x0) / double(n);
    if (std::abs(h) < kMinStep) throw BlowUp("reference step size underflow");
    std::vector<Jet3> out;
    out.reserve(size_t(n) + 1);
    State u{init.y0, init.y1, init.y2};
    double x = init.x0;
    out.push_back(Jet3{x, u.y, u.y1, u.y2, rhs(spec, x, u.y, u.y1, u.y2)});
    for (long k = 0; k < n; ++k) {
        u = rk4_step(spec, x, u, h);
        x = init.x0 + (x_target - init.x0) * double(k + 1) / double(n);
        if (!std::isfinite(u.y) || !std::isfinite(u.y1) || !std::isfinite(u.y2) ||
            std::abs(u.y) > kOverflowGuard || std::abs(u.y1) > kOverflowGuard)
            throw BlowUp("reference solution exceeded overflow guard");
        out.push_back(Jet3{x, u.y, u.y1, u.y2, rhs(spec, x, u.y, u.y1, u.y2)});
    }
    return out;
}

}  // namespace

OdeSpec OdeSpec::sim2(double K) {
    OdeSpec s;
    s.algebra = AlgebraId::Sim2;
    s.K = K;
    return s;
}

OdeSpec OdeSpec::sl2(std::function<double(double)> F) {
    OdeSpec s;
    s.algebra = AlgebraId::Sl2y;
    s.F = std::move(F);
    return s;
}

OdeSpec OdeSpec::gl2(double A, int branch_sign) {
    OdeSpec s;
    s.algebra = AlgebraId::Gl2xy;
    s.A = A;
    s.branch_sign = branch_sign >= 0 ? 1 : -1;
    return s;
}

double residual(const OdeSpec& spec, const Jet3& j) {
    switch (spec.algebra) {
        case AlgebraId::Sim2: {
            const double s = 1.0 + j.y1 * j.y1;
            return s * j.y3 - 3.0 * j.y1 * j.y2 * j.y2 - spec.K * j.y2 * j.y2;
        }
        case AlgebraId::Sl2y: {
            if (j.y1 == 0.0) throw DegenerateJet("sl2 residual needs y' != 0");
            return (j.y1 * j.y3 - 1.5 * j.y2 * j.y2) / (j.y1 * j.y1) - spec.forcing(j.x);
        }
        case AlgebraId::Gl2xy: {
            if (j.x == 0.0 || j.y1 == 0.0)
                throw DegenerateJet("gl2 residual needs x != 0 and y' != 0");
            const double I1 = gl2_i1(j.x, j.y1, j.y2);
            if (I1 < 0.0) throw DomainViolation("gl2 residual needs I1 >= 0");
            const double I2 =
                j.x * j.x * (j.y1 * j.y3 - 3.0 * j.y2 * j.y2) / std::pow(j.y1, 5);
            return I2 - spec.branch_sign * std::abs(spec.A) * std::pow(I1, 1.5);
        }
    }
    throw DomainViolation("unknown algebra");
}

double gl2_quadratic_residual(const OdeSpec& spec, const Jet3& j) {
    const double x = j.x, p = j.y1;
    const double w = p * j.y3 - 3.0 * j.y2 * j.y2;
    const double u = 2.0 * x * j.y2 + p;
    return std::pow(x, 4) * w * w - spec.A * spec.A * p * u * u * u;
}

double rhs(const OdeSpec& spec, double x, double y, double y1, double y2) {
    switch (spec.algebra) {
        case AlgebraId::Sim2:
            return y2 * y2 * (3.0 * y1 + spec.K) / (1.0 + y1 * y1);
        case AlgebraId::Sl2y:
            if (y1 == 0.0) throw DomainViolation("sl2 rhs needs y' != 0");
            return (spec.forcing(x) * y1 * y1 + 1.5 * y2 * y2) / y1;
        case AlgebraId::Gl2xy: {
            if (!(x > 0.0) || !(y1 > 0.0))
                throw DomainViolation("gl2 rhs needs x > 0 and y' > 0");
            const double I1 = gl2_i1(x, y1, y2);
            if (I1 < 0.0) throw DomainViolation("gl2 rhs needs 2xy'' + y' >= 0");
            return (3.0 * y2 * y2 + spec.branch_sign * std::abs(spec.A) * std::pow(I1, 1.5) *
                                        std::pow(y1, 5) / (x * x)) /
                   y1;
        }
    }
    throw DomainViolation("unknown algebra");
}

std::array<double, 2> extend_jet(const OdeSpec& spec, const Jet3& j) {
    double t = 1e-2;
    if (spec.algebra == AlgebraId::Gl2xy) t = std::min(t, j.x / 8.0);
    double y4 = 0.0, y5 = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            for (int it = 0; it < 6; ++it) {
                auto g = [&](double s) {
                    const double yv = j.y + s * (j.y1 + s * (j.y2 / 2 + s * (j.y3 / 6 +
                                          s * (y4 / 24 + s * y5 / 120))));
                    const double d1 = j.y1 + s * (j.y2 + s * (j.y3 / 2 + s * (y4 / 6 +
                                          s * y5 / 24)));
                    const double d2 = j.y2 + s * (j.y3 + s * (y4 / 2 + s * y5 / 6));
                    return rhs(spec, j.x + s, yv, d1, d2);
                };
                const double g2 = g(2 * t), g1 = g(t), gm1 = g(-t), gm2 = g(-2 * t);
                const double g0 = g(0.0);
                const double ny4 = (8.0 * (g1 - gm1) - (g2 - gm2)) / (12.0 * t);
                const double ny5 = (-g2 + 16.0 * g1 - 30.0 * g0 + 16.0 * gm1 - gm2) /
                                   (12.0 * t * t);
                const double change = std::abs(ny4 - y4) + std::abs(ny5 - y5);
                y4 = ny4;
                y5 = ny5;
                if (change <= 1e-9 * (1.0 + std::abs(y4) + std::abs(y5))) break;
            }
            return {y4, y5};
        } catch (const DomainViolation&) {
            t *= 0.25;
            y4 = y5 = 0.0;
        }
    }
    throw DomainViolation("extend_jet: no admissible difference step");
}

double solution_taylor5(const OdeSpec&, const Jet3& j, const std::array<double, 2>& y45,
                        double dx) {
    return j.y + dx * (j.y1 + dx * (j.y2 / 2 + dx * (j.y3 / 6 + dx * (y45[0] / 24 +
                        dx * y45[1] / 120))));
}

std::vector<Jet3> reference_solve(const OdeSpec& spec, const InitialData& init,
                                  double x_target, double tol) {
    if (!(tol > 0.0)) throw DomainViolation("reference_solve: tol must be positive");
    if (x_target == init.x0)
        return {Jet3{init.x0, init.y0, init.y1, init.y2,
                     rhs(spec, init.x0, init.y0, init.y1, init.y2)}};

    const double span = std::abs(x_target - init.x0);
    long n = std::max<long>(16, long(std::ceil(span / 0.05)));
    std::vector<Jet3> coarse = integrate(spec, init, x_target, n);
    for (int level = 0; level < 24; ++level) {
        // Non-convergence near a solution singularity must fail cleanly
        // instead of refining into astronomical grids.
        if (n >= (1L << 22))
            throw BlowUp("reference_solve refinement limit reached");
        std::vector<Jet3> fine = integrate(spec, init, x_target, 2 * n);
        const Jet3& a = coarse.back();
        const Jet3& b = fine.back();
        const double err = std::abs(a.y - b.y) + std::abs(a.y1 - b.y1) +
                           std::abs(a.y2 - b.y2);
        const double scale = 1.0 + std::abs(b.y) + std::abs(b.y1) + std::abs(b.y2);
        if (err <= tol * std::max(1.0, span) * scale) return fine;
        coarse = std::move(fine);
        n *= 2;
    }
    throw BlowUp("reference_solve failed to converge to tolerance");
}

Jet3 reference_jet_at(const OdeSpec& spec, const InitialData& init, double x, double tol) {
    return reference_solve(spec, init, x, tol).back();
}

Jet3 random_solution_jet(const OdeSpec& spec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
    Jet3 j;
    switch (spec.algebra) {
        case AlgebraId::Sim2:
            j.x = uni(-1.0, 1.0);
            j.y = uni(-1.0, 1.0);
            j.y1 = uni(-1.0, 1.0);
            j.y2 = (u01(rng) < 0.5 ? -1.0 : 1.0) * uni(0.3, 1.4);
            break;
        case AlgebraId::Sl2y:
            j.x = uni(-1.0, 1.0);
            j.y = uni(-1.0, 1.0);
            j.y1 = (u01(rng) < 0.5 ? -1.0 : 1.0) * uni(0.4, 1.5);
            j.y2 = uni(-1.0, 1.0);
            break;
        case AlgebraId::Gl2xy:
            j.x = uni(0.7, 1.8);
            j.y = uni(-1.0, 1.0);
            j.y1 = uni(0.4, 1.5);
            j.y2 = uni(0.05, 0.8);
            break;
    }
    j.y3 = rhs(spec, j.x, j.y, j.y1, j.y2);
    return j;
}

}  // namespace invdiff
