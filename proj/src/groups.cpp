#include "invdiff/groups.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace invdiff {
namespace {

constexpr double kSingularTol = 1e-12;

Point flow_sim2(int gen, double tau, Point p) {
    switch (gen) {
        case 1: return {p.x + tau, p.y};
        case 2: return {p.x, p.y + tau};
        case 3: {
            const double c = std::cos(tau), s = std::sin(tau);
            return {p.x * c + p.y * s, -p.x * s + p.y * c};
        }
        case 4: {
            const double e = std::exp(tau);
            return {e * p.x, e * p.y};
        }
        default: throw DomainViolation("sim2: bad generator index");
    }
}

Point flow_sl2y(int gen, double tau, Point p) {
    switch (gen) {
        case 1: return {p.x, p.y + tau};
        case 2: return {p.x, std::exp(tau) * p.y};
        case 3: {
            const double d = 1.0 - tau * p.y;
            if (std::abs(d) <= kSingularTol)
                throw SingularTransform("sl2y: Mobius denominator vanishes");
            return {p.x, p.y / d};
        }
        case 4: return {p.x + tau, p.y};  // GL(2,R) extension, F = const
        default: throw DomainViolation("sl2y: bad generator index");
    }
}

Point flow_gl2xy(int gen, double tau, Point p) {
    switch (gen) {
        case 1: return {p.x, p.y + tau};
        case 2: {
            const double e = std::exp(tau);
            return {e * p.x, e * p.y};
        }
        case 3: {
            const double d = 1.0 - tau * p.y;
            if (std::abs(d) <= kSingularTol)
                throw SingularTransform("gl2xy: flow denominator vanishes");
            return {p.x / (d * d), p.y / d};
        }
        case 4: return {std::exp(tau) * p.x, p.y};
        default: throw DomainViolation("gl2xy: bad generator index");
    }
}

Point apply_flow(AlgebraId alg, const Flow& f, Point p) {
    switch (alg) {
        case AlgebraId::Sim2: return flow_sim2(f.generator, f.tau, p);
        case AlgebraId::Sl2y: return flow_sl2y(f.generator, f.tau, p);
        case AlgebraId::Gl2xy: return flow_gl2xy(f.generator, f.tau, p);
    }
    throw DomainViolation("unknown algebra");
}

int max_generator(AlgebraId alg) {
    // sl2y admits index 4 for the x-translation extension.
    return alg == AlgebraId::Sl2y ? 4 : generator_count(alg);
}

/// Derivatives (value, y', y'', y''') of the degree-4 interpolating
/// polynomial through five points, evaluated at the center node xs[2].
std::array<double, 4> interp_derivs(const std::array<double, 5>& xs,
                                    const std::array<double, 5>& ys) {
    // Newton divided differences.
    std::array<double, 5> c = ys;
    for (int j = 1; j < 5; ++j)
        for (int i = 4; i >= j; --i)
            c[i] = (c[i] - c[i - 1]) / (xs[i] - xs[i - j]);
    // Expand the Newton form in powers of u = x - xs[2] via Horner.
    std::array<double, 5> a{};  // monomial coefficients in u
    a[0] = c[4];
    int deg = 0;
    for (int k = 3; k >= 0; --k) {
        const double shift = xs[2] - xs[k];
        for (int i = deg + 1; i > 0; --i) a[i] = a[i - 1] + shift * a[i];
        a[0] = shift * a[0] + c[k];
        ++deg;
    }
    return {a[0], a[1], 2.0 * a[2], 6.0 * a[3]};
}

}  // namespace

int generator_count(AlgebraId algebra) {
    switch (algebra) {
        case AlgebraId::Sim2: return 4;
        case AlgebraId::Sl2y: return 3;
        case AlgebraId::Gl2xy: return 4;
    }
    return 0;
}

GroupElement::GroupElement(AlgebraId alg, std::vector<Flow> w)
    : algebra(alg), word(std::move(w)) {
    const int maxgen = max_generator(alg);
    for (const Flow& f : word) {
        if (f.generator < 1 || f.generator > maxgen)
            throw DomainViolation("generator index out of range");
        if (!std::isfinite(f.tau))
            throw DomainViolation("flow parameter must be finite");
    }
}

GroupElement GroupElement::inverse() const {
    GroupElement inv;
    inv.algebra = algebra;
    inv.word.reserve(word.size());
    for (auto it = word.rbegin(); it != word.rend(); ++it)
        inv.word.push_back(Flow{it->generator, -it->tau});
    return inv;
}

Point apply(const GroupElement& g, const Point& p) {
    Point q = p;
    for (const Flow& f : g.word) q = apply_flow(g.algebra, f, q);
    return q;
}

Stencil4 apply_stencil(const GroupElement& g, const Stencil4& s) {
    std::array<Point, 4> out;
    for (int k = 0; k < 4; ++k) out[k] = apply(g, s.p[k]);
    for (int k = 0; k < 3; ++k)
        if (!(out[k].x < out[k + 1].x))
            throw OrderViolation("transformed stencil abscissas are not increasing");
    return Stencil4(out);
}

Jet3 transform_jet(const GroupElement& g, const Jet3& j) {
    const Point base = apply(g, Point{j.x, j.y});

    constexpr int kLevels = 4;
    const double delta0_candidates[] = {0.2, 0.05, 0.0125, 0.003125};

    Jet3 best{};
    double best_err = std::numeric_limits<double>::infinity();
    bool any = false;
    const char* last_failure = "transform_jet: no usable sample spacing";

    for (double delta0 : delta0_candidates) {
        try {
            double est[kLevels][3];
            double deltas[kLevels];
            for (int l = 0; l < kLevels; ++l) {
                const double d = delta0 / double(1 << l);
                deltas[l] = d;
                std::array<double, 5> X{}, Y{};
                for (int m = -2; m <= 2; ++m) {
                    const double dx = m * d;
                    const Point q = apply(g, Point{j.x + dx, taylor3_eval(j, dx)});
                    X[m + 2] = q.x;
                    Y[m + 2] = q.y;
                }
                const bool inc = X[0] < X[1] && X[1] < X[2] && X[2] < X[3] && X[3] < X[4];
                const bool dec = X[0] > X[1] && X[1] > X[2] && X[2] > X[3] && X[3] > X[4];
                if (!inc && !dec)
                    throw NotAGraph("transformed samples are not monotone in x");
                const auto dv = interp_derivs(X, Y);
                est[l][0] = dv[1];
                est[l][1] = dv[2];
                est[l][2] = dv[3];
            }
            // Neville extrapolation of each derivative to delta -> 0.
            double extr[3], err[3];
            for (int k = 0; k < 3; ++k) {
                double T[kLevels][kLevels];
                for (int i = 0; i < kLevels; ++i) T[i][0] = est[i][k];
                for (int jcol = 1; jcol < kLevels; ++jcol)
                    for (int i = jcol; i < kLevels; ++i)
                        T[i][jcol] = (T[i][jcol - 1] * (-deltas[i - jcol]) -
                                      T[i - 1][jcol - 1] * (-deltas[i])) /
                                     (deltas[i] - deltas[i - jcol]);
                extr[k] = T[kLevels - 1][kLevels - 1];
                err[k] = std::abs(T[kLevels - 1][kLevels - 1] - T[kLevels - 1][kLevels - 2]);
                if (!std::isfinite(extr[k])) throw NotAGraph("derivative extrapolation diverged");
            }
            double max_rel = 0.0;
            for (int k = 0; k < 3; ++k)
                max_rel = std::max(max_rel, err[k] / (1.0 + std::abs(extr[k])));
            if (max_rel < best_err) {
                best_err = max_rel;
                best = Jet3{base.x, base.y, extr[0], extr[1], extr[2]};
                any = true;
            }
            if (max_rel <= 1e-10) break;
        } catch (const SingularTransform&) {
            last_failure = "transform_jet: samples hit a singular locus";
            continue;
        } catch (const NotAGraph&) {
            last_failure = "transform_jet: transformed curve is not a graph";
            continue;
        }
    }
    if (!any) throw NotAGraph(last_failure);
    return best;
}

GroupElement random_element(AlgebraId algebra, GeneratorSet set, double scale,
                            std::mt19937_64& rng) {
    std::vector<int> gens;
    switch (set) {
        case GeneratorSet::Full:
            for (int k = 1; k <= generator_count(algebra); ++k) gens.push_back(k);
            break;
        case GeneratorSet::Euclidean:
            if (algebra != AlgebraId::Sim2) throw DomainViolation("Euclidean subset needs Sim2");
            gens = {1, 2, 3};
            break;
        case GeneratorSet::MobiusY:
            if (algebra != AlgebraId::Sl2y) throw DomainViolation("MobiusY subset needs Sl2y");
            gens = {1, 2, 3};
            break;
        case GeneratorSet::Sl2Part:
            if (algebra != AlgebraId::Gl2xy) throw DomainViolation("Sl2Part subset needs Gl2xy");
            gens = {1, 2, 3};
            break;
        case GeneratorSet::Dilation:
            gens = {algebra == AlgebraId::Sl2y ? 2 : 4};
            break;
        case GeneratorSet::Translation:
            gens = algebra == AlgebraId::Sim2 ? std::vector<int>{1, 2} : std::vector<int>{1};
            break;
    }
    std::shuffle(gens.begin(), gens.end(), rng);
    std::uniform_real_distribution<double> u(-scale, scale);
    GroupElement g;
    g.algebra = algebra;
    for (int k : gens) g.word.push_back(Flow{k, u(rng)});
    return g;
}

}  // namespace invdiff
