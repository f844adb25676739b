#include <cmath>
#include <random>

#include "doctest.h"
#include "invdiff/schemes.hpp"

using namespace invdiff;

namespace {

double mobius(double x) { return (2.0 * x + 1.0) / (x + 3.0); }

StepState mobius_seed(double x0, double h) {
    return StepState({Point{x0, mobius(x0)}, Point{x0 + h, mobius(x0 + h)},
                      Point{x0 + 2 * h, mobius(x0 + 2 * h)}});
}

}  // namespace

TEST_CASE("inv_sl2 step with F=0 stays on the Mobius curve exactly") {
    const SchemeSpec spec = SchemeSpec::inv_sl2(nullptr);
    const StepState st = mobius_seed(0.0, 0.25);
    const StepResult r = step(spec, st);
    CHECK(r.next.x == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(r.next.y == doctest::Approx(mobius(0.75)).epsilon(1e-12));
}

TEST_CASE("standard scheme on sim2 K=0 keeps a straight line straight") {
    OdeSpec ode = OdeSpec::sim2(0.0);
    const SchemeSpec spec = SchemeSpec::standard(ode, 0.1);
    const double c = 0.7;
    const StepState st({Point{0.0, 0.0}, Point{0.1, c * 0.1}, Point{0.2, c * 0.2}});
    const StepResult r = step(spec, st);
    CHECK(r.next.y == doctest::Approx(c * r.next.x).epsilon(1e-10));
}

TEST_CASE("inv_sim2 step on a circle satisfies both scheme equations") {
    // lower unit-circle arc, equal-chord seed
    auto arc = [](double x) { return -std::sqrt(1.0 - x * x); };
    const SchemeSpec spec = SchemeSpec::inv_sim2(0.0);
    const StepState st(
        {Point{-0.1, arc(-0.1)}, Point{0.0, arc(0.0)}, Point{0.1, arc(0.1)}});
    const StepResult r = step(spec, st);
    CHECK(r.report.converged);
    const Stencil4 s(st.p[0], st.p[1], st.p[2], r.next);
    const std::array<double, 2> res = scheme_equations(spec, s);
    CHECK(std::abs(res[0]) <= 10 * spec.newton.tol);
    CHECK(std::abs(res[1]) <= 10 * spec.newton.tol);
    // the new point sits near the circle (third-order contact)
    CHECK(std::abs(r.next.y - arc(r.next.x)) <= 1e-5);
}

TEST_CASE("run with zero steps returns the seed only") {
    const SchemeSpec spec = SchemeSpec::inv_sl2(nullptr);
    const StepState st = mobius_seed(0.0, 0.2);
    const RunResult rr = run(spec, st, 0);
    CHECK(rr.points.size() == 3);
    CHECK(!rr.halted);
}

TEST_CASE("inv_sl2 with F=0 propagates a Mobius function 100 steps to 1e-10") {
    const SchemeSpec spec = SchemeSpec::inv_sl2(nullptr);
    const StepState st = mobius_seed(0.0, 0.05);
    const RunResult rr = run(spec, st, 100);
    REQUIRE(!rr.halted);
    REQUIRE(rr.points.size() == 103);
    double worst = 0.0;
    for (const Point& p : rr.points) worst = std::max(worst, std::abs(p.y - mobius(p.x)));
    CHECK(worst <= 1e-10);
}

TEST_CASE("non-monotone seed is rejected immediately") {
    CHECK_THROWS_AS(StepState({Point{0, 0}, Point{0, 1}, Point{1, 2}}), OrderViolation);
}

TEST_CASE("seed_from_initial_data samples the reference solution") {
    // circle arc seed: all three points on x^2 + y^2 = 1
    const OdeSpec ode = OdeSpec::sim2(0.0);
    const SchemeSpec spec = SchemeSpec::inv_sim2(0.0);
    const StepState st =
        seed_from_initial_data(spec, ode, InitialData{0.0, -1.0, 0.0, 1.0}, 0.1);
    for (const Point& p : st.p)
        CHECK(p.x * p.x + p.y * p.y == doctest::Approx(1.0).epsilon(1e-11));

    // Mobius seed for the F=0 Schwarzian equation
    const OdeSpec sl2 = OdeSpec::sl2();
    const double d = 3.0;
    const StepState sm = seed_from_initial_data(
        SchemeSpec::inv_sl2(nullptr), sl2,
        InitialData{0.0, mobius(0.0), 5.0 / (d * d), -10.0 / (d * d * d)}, 0.1);
    for (const Point& p : sm.p)
        CHECK(p.y == doctest::Approx(mobius(p.x)).epsilon(1e-12));
}

TEST_CASE("seed with zero spacing is rejected") {
    CHECK_THROWS_AS(seed_from_initial_data(SchemeSpec::inv_sim2(0.0), OdeSpec::sim2(0.0),
                                           InitialData{0, -1, 0, 1}, 0.0),
                    DomainViolation);
}

TEST_CASE("inv_sim2 lattice keeps the geometric-chord condition at every step") {
    const OdeSpec ode = OdeSpec::sim2(1.0);
    const SchemeSpec spec = SchemeSpec::inv_sim2(1.0);
    const StepState seed =
        seed_from_initial_data(spec, ode, InitialData{0.0, 0.0, 0.0, 1.0}, 0.02);
    const RunResult rr = run(spec, seed, 15);
    REQUIRE(!rr.halted);
    for (size_t i = 0; i + 3 < rr.points.size(); ++i) {
        const Stencil4 s(rr.points[i], rr.points[i + 1], rr.points[i + 2],
                         rr.points[i + 3]);
        const Sim2Xi xi = sim2_xi(s);
        CHECK(std::abs(xi.xi[0] * xi.xi[2] - xi.xi[1] * xi.xi[1]) <= 1e-10);
    }
}

TEST_CASE("inv_gl2 lattice keeps its chord ratio at every step") {
    const OdeSpec ode = OdeSpec::gl2(-1.0, -1);
    SchemeSpec spec = SchemeSpec::inv_gl2(-1.0, -1);
    const StepState seed =
        seed_from_initial_data(spec, ode, InitialData{1.0, 1.0, 1.0, 0.3}, 0.05);
    spec.gamma = gl2_gamma_from_seed(seed);
    const RunResult rr = run(spec, seed, 20);
    REQUIRE(!rr.halted);
    for (size_t i = 0; i + 3 < rr.points.size(); ++i) {
        const Stencil4 s(rr.points[i], rr.points[i + 1], rr.points[i + 2],
                         rr.points[i + 3]);
        const Gl2Xi xi = gl2_xi(s);
        CHECK(xi.xi[0] / xi.xi[1] == doctest::Approx(spec.gamma).epsilon(1e-9));
    }
}

TEST_CASE("local truncation: inv_sl2 residual is O(eps^2) with the offset parameters") {
    // on-solution stencils; default (a,b,c) kills the first-order term
    const OdeSpec ode = OdeSpec::sl2([](double x) { return std::sin(x); });
    const SchemeSpec raised = SchemeSpec::inv_sl2(ode.F);          // (-1/4, 1/2, 1/4)
    const SchemeSpec plain = SchemeSpec::inv_sl2(ode.F, 0, 0, 0);  // first order
    const Jet3 j{0.4, 0.7, 0.6, 0.9, rhs(ode, 0.4, 0.7, 0.6, 0.9)};
    const std::array<double, 2> y45 = extend_jet(ode, j);
    auto residual_at = [&](const SchemeSpec& spec, double eps) {
        std::array<Point, 4> p;
        const std::array<double, 4> off{-eps, 0.0, eps, 2.0 * eps};  // uniform lattice
        for (int k = 0; k < 4; ++k)
            p[size_t(k)] = Point{j.x + off[size_t(k)],
                                 solution_taylor5(ode, j, y45, off[size_t(k)])};
        return std::abs(scheme_equations(spec, Stencil4(p))[0]);
    };
    double slope_r = 0.0, slope_p = 0.0;
    int n = 0;
    double prev_r = 0.0, prev_p = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double eps = 0.04 * std::pow(2.0, -k);
        const double er = residual_at(raised, eps), ep = residual_at(plain, eps);
        if (k > 0) {
            slope_r += std::log2(prev_r / er);
            slope_p += std::log2(prev_p / ep);
            ++n;
        }
        prev_r = er;
        prev_p = ep;
    }
    CHECK(slope_p / n >= 0.85);  // order >= 1
    CHECK(slope_r / n >= 1.85);  // order >= 2 after the parameter choice
}

TEST_CASE("invariant schemes converge under seed refinement with order >= 1") {
    const OdeSpec ode = OdeSpec::sim2(1.0);
    const SchemeSpec spec = SchemeSpec::inv_sim2(1.0);
    const InitialData init{0.0, 0.0, 0.0, 1.0};
    const double x_end = 0.2;
    double prev = 0.0, slope = 0.0;
    int n = 0;
    for (double eps : {0.05, 0.025, 0.0125}) {
        const StepState seed = seed_from_initial_data(spec, ode, init, eps);
        RunResult rr = run(spec, seed, 400);
        // take the first point past x_end and compare against the reference
        double err = -1.0;
        for (const Point& p : rr.points)
            if (p.x >= x_end) {
                err = std::abs(p.y - reference_jet_at(ode, init, p.x, 1e-12).y);
                break;
            }
        REQUIRE(err >= 0.0);
        if (prev > 0.0) {
            slope += std::log2(prev / err);
            ++n;
        }
        prev = err;
    }
    CHECK(slope / n >= 0.85);
}

TEST_CASE("transformed solved stencils still satisfy the inv_sl2 scheme") {
    std::mt19937_64 rng(19);
    const OdeSpec ode = OdeSpec::sl2([](double x) { return std::sin(x); });
    const SchemeSpec spec = SchemeSpec::inv_sl2(ode.F);
    const StepState seed =
        seed_from_initial_data(spec, ode, InitialData{0.3, 0.7, 0.6, 0.3}, 0.15);
    const RunResult rr = run(spec, seed, 12);
    REQUIRE(!rr.halted);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (size_t i = 0; i + 3 < rr.points.size(); ++i) {
        const Stencil4 s(rr.points[i], rr.points[i + 1], rr.points[i + 2],
                         rr.points[i + 3]);
        const std::array<double, 2> r0 = scheme_equations(spec, s);
        const GroupElement g(
            AlgebraId::Sl2y, {Flow{1, u(rng)}, Flow{3, u(rng)}, Flow{2, u(rng)}});
        Stencil4 t = s;
        try {
            t = apply_stencil(g, s);
        } catch (const Error&) {
            continue;
        }
        const std::array<double, 2> r1 = scheme_equations(spec, t);
        const double tol = std::max({spec.newton.tol, std::abs(r0[0]), std::abs(r0[1])});
        CHECK(std::abs(r1[0]) <= 10 * tol);
        CHECK(std::abs(r1[1]) <= 10 * tol);
    }
}

TEST_CASE("run halts cleanly when a step fails instead of emitting bad points") {
    // drive the K=1 blow-up solution far enough to force a halt
    const OdeSpec ode = OdeSpec::sim2(1.0);
    const SchemeSpec spec = SchemeSpec::inv_sim2(1.0);
    const StepState seed =
        seed_from_initial_data(spec, ode, InitialData{0.0, 0.0, 0.0, 1.0}, 0.05);
    const RunResult rr = run(spec, seed, 500);
    CHECK(rr.halted);
    for (size_t i = 1; i < rr.points.size(); ++i)
        CHECK(rr.points[i].x > rr.points[i - 1].x);
}
