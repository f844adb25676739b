#include <cmath>
#include <random>

#include "doctest.h"
#include "invdiff/invariants.hpp"
#include "invdiff/odes.hpp"

using namespace invdiff;

namespace {

double mobius(double x) { return (2.0 * x + 1.0) / (x + 3.0); }

Stencil4 from_fn(double (*f)(double), std::array<double, 4> xs) {
    return Stencil4(Point{xs[0], f(xs[0])}, Point{xs[1], f(xs[1])},
                    Point{xs[2], f(xs[2])}, Point{xs[3], f(xs[3])});
}

// log2 slope of err(eps) under halving, averaged over resolvable levels
template <typename ErrFn>
double observed_order(const ErrFn& err, double eps0, int levels) {
    double prev = 0.0, slope = 0.0;
    int n = 0;
    for (int k = 0; k < levels; ++k) {
        const double e = err(eps0 * std::pow(2.0, -k));
        if (k > 0 && e > 1e-13 && prev > 1e-13) {
            slope += std::log2(prev / e);
            ++n;
        }
        prev = e;
    }
    REQUIRE(n >= 2);
    return slope / n;
}

}  // namespace

TEST_CASE("sim2 xi on a collinear equispaced stencil") {
    const Stencil4 s(Point{0, 0}, Point{1, 0}, Point{2, 0}, Point{3, 0});
    const Sim2Xi xi = sim2_xi(s);
    for (int k = 0; k < 3; ++k) CHECK(xi.xi[size_t(k)] == doctest::Approx(1.0));
    CHECK(xi.xi[3] == 0.0);
    CHECK(xi.xi[4] == 0.0);

    const JPair j = sim2_j(s, AlphaWeight{0.3});
    CHECK(j.J1 == 0.0);
    CHECK(j.J2 == 0.0);
}

TEST_CASE("sim2 xi on the parabola stencil (0,0),(1,1),(2,4),(3,9)") {
    const Stencil4 s(Point{0, 0}, Point{1, 1}, Point{2, 4}, Point{3, 9});
    const Sim2Xi xi = sim2_xi(s);
    CHECK(xi.xi[0] == doctest::Approx(std::sqrt(26.0)));
    CHECK(xi.xi[1] == doctest::Approx(std::sqrt(10.0)));
    CHECK(xi.xi[2] == doctest::Approx(std::sqrt(2.0)));
    CHECK(xi.xi[3] == doctest::Approx(2.0));  // 5*1 - 3*1
    CHECK(xi.xi[4] == doctest::Approx(2.0));  // 3*1 - 1*1
}

TEST_CASE("sim2 xi is Euclidean invariant") {
    const Stencil4 s(Point{0, 0}, Point{1, 1}, Point{2, 4}, Point{3, 9});
    const Sim2Xi a = sim2_xi(s);
    const GroupElement g(AlgebraId::Sim2, {Flow{3, 0.25}, Flow{1, 1.7}, Flow{2, -0.9}});
    const Sim2Xi b = sim2_xi(apply_stencil(g, s));
    for (int k = 0; k < 5; ++k)
        CHECK(b.xi[size_t(k)] == doctest::Approx(a.xi[size_t(k)]).epsilon(1e-12));
}

TEST_CASE("sim2 J1 tends to the Euclidean curvature invariant") {
    // y = x^2/2 at x=0: I1 = y''/(1+y'^2)^{3/2} = 1
    const Jet3 j{0, 0, 0, 1, 0};
    const SpacingDirection dir{{1.0, 1.0, 1.0}};
    double prev = 1e9;
    for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
        const double J1 = sim2_j(stencil_from_jet(j, dir, eps), AlphaWeight{0.5}).J1;
        CHECK(std::abs(J1 - 1.0) < prev);
        prev = std::abs(J1 - 1.0);
    }
    CHECK(prev <= 1e-3);
}

TEST_CASE("sim2 dilation weights: xi scale by lambda, J1 by 1/lambda, J2 by 1/lambda^2") {
    const Stencil4 s(Point{0, 0}, Point{1, 1}, Point{2, 4}, Point{3, 9});
    const double lam = 1.7;
    Stencil4 t = s;
    for (Point& p : t.p) {
        p.x *= lam;
        p.y *= lam;
    }
    const Sim2Xi a = sim2_xi(s), b = sim2_xi(t);
    for (int k = 0; k < 3; ++k)
        CHECK(b.xi[size_t(k)] == doctest::Approx(lam * a.xi[size_t(k)]).epsilon(1e-12));
    for (int k = 3; k < 5; ++k)
        CHECK(b.xi[size_t(k)] == doctest::Approx(lam * lam * a.xi[size_t(k)]).epsilon(1e-12));
    const JPair ja = sim2_j(s, AlphaWeight{0.4}), jb = sim2_j(t, AlphaWeight{0.4});
    CHECK(jb.J1 == doctest::Approx(ja.J1 / lam).epsilon(1e-12));
    CHECK(jb.J2 == doctest::Approx(ja.J2 / (lam * lam)).epsilon(1e-12));
}

TEST_CASE("cross-ratio of y-values 0,1,2,3 is 4") {
    const Stencil4 s(Point{0, 0}, Point{1, 1}, Point{2, 2}, Point{3, 3});
    CHECK(sl2_cross_ratio(s) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("cross-ratio of y-values 0,1,3,6 is 5") {
    const Stencil4 s(Point{0, 0}, Point{1, 1}, Point{2, 3}, Point{3, 6});
    CHECK(sl2_cross_ratio(s) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("cross-ratio is Mobius invariant") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    const Stencil4 s(Point{0, 0.2}, Point{1, 0.9}, Point{2, 1.1}, Point{3, 1.8});
    const double R = sl2_cross_ratio(s);
    for (int i = 0; i < 30; ++i) {
        const GroupElement g(
            AlgebraId::Sl2y, {Flow{1, u(rng)}, Flow{3, u(rng)}, Flow{2, u(rng)}});
        CHECK(sl2_cross_ratio(apply_stencil(g, s)) == doctest::Approx(R).epsilon(1e-12));
    }
}

TEST_CASE("cross-ratio with a repeated y-value is degenerate") {
    const Stencil4 s(Point{0, 1}, Point{1, 1}, Point{2, 3}, Point{3, 6});
    CHECK_THROWS_AS(sl2_cross_ratio(s), DegenerateStencil);
}

TEST_CASE("sl2 J1 vanishes identically on Mobius data at arbitrary spacings") {
    const Stencil4 a = from_fn(mobius, {0.0, 0.7, 1.1, 2.4});
    const Stencil4 b = from_fn(mobius, {-1.5, -0.2, 0.3, 0.35});
    CHECK(std::abs(sl2_j1(a)) <= 1e-12);
    CHECK(std::abs(sl2_j1(b)) <= 1e-12);
    // y = x is a special Mobius function
    const Stencil4 c(Point{0, 0}, Point{0.3, 0.3}, Point{1.0, 1.0}, Point{1.1, 1.1});
    CHECK(std::abs(sl2_j1(c)) <= 1e-12);
}

TEST_CASE("sl2 J1 tends to the forcing on solutions of the Schwarzian equation") {
    const OdeSpec ode = OdeSpec::sl2([](double x) { return std::sin(x); });
    const double x = 0.8;
    const Jet3 j{x, 0.4, 0.9, 0.3, rhs(ode, x, 0.4, 0.9, 0.3)};
    const SpacingDirection dir{{1.0, 1.2, 0.9}};
    double prev = 1e9;
    for (double eps : {0.1, 0.05, 0.025, 0.0125, 0.00625}) {
        const double err = std::abs(sl2_j1(stencil_from_jet(j, dir, eps)) - std::sin(x));
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev <= 5e-3);
}

TEST_CASE("gl2 xi on x = 1,2,3,4 with y = 0,1,2,3") {
    const Stencil4 s(Point{1, 0}, Point{2, 1}, Point{3, 2}, Point{4, 3});
    const Gl2Xi xi = gl2_xi(s);
    CHECK(xi.xi[0] == doctest::Approx(1.0 / std::sqrt(12.0)));
    CHECK(xi.xi[1] == doctest::Approx(1.0 / std::sqrt(6.0)));
    CHECK(xi.xi[2] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(xi.xi[3] == doctest::Approx(2.0 / std::sqrt(8.0)));
    CHECK(xi.xi[4] == doctest::Approx(2.0 / std::sqrt(3.0)));
}

TEST_CASE("gl2 xi is invariant under the simultaneous scaling flow") {
    const Stencil4 s(Point{1, 0.2}, Point{2, 1.1}, Point{3, 1.9}, Point{4, 3.3});
    const Gl2Xi a = gl2_xi(s);
    const Gl2Xi b = gl2_xi(apply_stencil(GroupElement(AlgebraId::Gl2xy, {Flow{2, 0.6}}), s));
    for (int k = 0; k < 5; ++k)
        CHECK(b.xi[size_t(k)] == doctest::Approx(a.xi[size_t(k)]).epsilon(1e-13));
}

TEST_CASE("gl2 invariants on constant y are degenerate") {
    const Stencil4 s(Point{1, 2}, Point{2, 2}, Point{3, 2}, Point{4, 2});
    CHECK_THROWS_AS(gl2_j(s, AlphaWeight{}), DegenerateStencil);
}

TEST_CASE("gl2 invariants require positive abscissas") {
    const Stencil4 s(Point{-1, 0}, Point{1, 1}, Point{2, 2}, Point{3, 3});
    CHECK_THROWS_AS(gl2_xi(s), DomainViolation);
}

TEST_CASE("gl2 J1 tends to I1 = 1 on y = x at x = 1") {
    const Jet3 j{1, 1, 1, 0, 0};
    const SpacingDirection dir{{1.0, 1.0, 1.0}};
    double prev = 1e9;
    for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
        const double J1 = gl2_j(stencil_from_jet(j, dir, eps), AlphaWeight{0.5}).J1;
        CHECK(std::abs(J1 - 1.0) < prev);
        prev = std::abs(J1 - 1.0);
    }
    CHECK(prev <= 1e-3);
}

TEST_CASE("gl2 x-scaling weights: J1 by e^{2tau}, J2 by e^{3tau}") {
    const Stencil4 s(Point{1, 0.2}, Point{2, 1.1}, Point{3, 1.9}, Point{4, 3.3});
    const double tau = 0.5, lam = std::exp(tau);
    const Stencil4 t = apply_stencil(GroupElement(AlgebraId::Gl2xy, {Flow{4, tau}}), s);
    const Gl2Xi a = gl2_xi(s), b = gl2_xi(t);
    for (int k = 0; k < 5; ++k)
        CHECK(b.xi[size_t(k)] == doctest::Approx(a.xi[size_t(k)] / lam).epsilon(1e-12));
    const JPair ja = gl2_j(s, AlphaWeight{0.5}), jb = gl2_j(t, AlphaWeight{0.5});
    CHECK(jb.J1 == doctest::Approx(lam * lam * ja.J1).epsilon(1e-12));
    CHECK(jb.J2 == doctest::Approx(lam * lam * lam * ja.J2).epsilon(1e-12));
}

TEST_CASE("continuous invariants: circle top, Mobius jet, gl2 reference jet") {
    // unit circle at its top: y'=0, y''=-1, y'''=0
    const InvariantValues c = continuous_invariants(AlgebraId::Sim2, Jet3{0, 1, 0, -1, 0});
    CHECK(c.I1 == doctest::Approx(-1.0));
    CHECK(c.I2 == doctest::Approx(0.0));

    // Schwarzian of a Mobius function vanishes
    const double x = 0.5, d = x + 3.0;
    const Jet3 m{x, mobius(x), 5.0 / (d * d), -10.0 / (d * d * d), 30.0 / (d * d * d * d)};
    CHECK(std::abs(continuous_invariants(AlgebraId::Sl2y, m).I1) <= 1e-13);

    const InvariantValues g = continuous_invariants(AlgebraId::Gl2xy, Jet3{1, 0.7, 1, 0, 0});
    CHECK(g.I1 == doctest::Approx(1.0));
    CHECK(g.I2 == doctest::Approx(0.0));
}

TEST_CASE("discrete invariants converge to the continuous ones with order >= 1") {
    std::mt19937_64 rng(31);
    const SpacingDirection dir{{1.0, 1.15, 0.9}};
    const OdeSpec sim2 = OdeSpec::sim2(0.8);
    const OdeSpec gl2 = OdeSpec::gl2(-1.0, -1);
    for (int trial = 0; trial < 5; ++trial) {
        const Jet3 js = random_solution_jet(sim2, rng);
        const InvariantValues is = continuous_invariants(AlgebraId::Sim2, js);
        const double o1 = observed_order(
            [&](double eps) {
                const JPair j = sim2_j(stencil_from_jet(js, dir, eps), AlphaWeight{0.5});
                return std::abs(j.J1 - is.I1) + std::abs(j.J2 - is.I2);
            },
            0.05, 5);
        CHECK(o1 >= 0.85);

        const Jet3 jg = random_solution_jet(gl2, rng);
        const InvariantValues ig = continuous_invariants(AlgebraId::Gl2xy, jg);
        const double o2 = observed_order(
            [&](double eps) {
                const JPair j = gl2_j(stencil_from_jet(jg, dir, eps), AlphaWeight{0.5});
                return std::abs(j.J1 - ig.I1) + std::abs(j.J2 - ig.I2);
            },
            0.02, 5);
        CHECK(o2 >= 0.85);
    }
}

TEST_CASE("J1 limits do not depend on the blending weight alpha") {
    std::mt19937_64 rng(13);
    const OdeSpec sim2 = OdeSpec::sim2(0.8);
    const SpacingDirection dir{{1.0, 1.0, 1.0}};
    const Jet3 j = random_solution_jet(sim2, rng);
    const double gap_coarse =
        std::abs(sim2_j(stencil_from_jet(j, dir, 0.08), AlphaWeight{0.0}).J1 -
                 sim2_j(stencil_from_jet(j, dir, 0.08), AlphaWeight{1.0}).J1);
    const double gap_fine =
        std::abs(sim2_j(stencil_from_jet(j, dir, 0.01), AlphaWeight{0.0}).J1 -
                 sim2_j(stencil_from_jet(j, dir, 0.01), AlphaWeight{1.0}).J1);
    CHECK(gap_fine <= gap_coarse * 0.25);  // O(eps) shrink under 8x refinement
}
