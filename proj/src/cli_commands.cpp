#include "invdiff/cli_commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "invdiff/diffapprox.hpp"
#include "invdiff/invariants.hpp"
#include "invdiff/schemes.hpp"

namespace invdiff::cli {
namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& bytes) {
    try {
        return json::parse(bytes);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::string hex16(uint64_t d) {
    char b[20];
    std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(d));
    return b;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot write output: " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ConfigError("cannot move output into place: " + path);
}

std::function<double(double)> forcing_by_name(const std::string& name) {
    if (name == "zero") return nullptr;
    if (name == "sin") return [](double x) { return std::sin(x); };
    if (name == "cos") return [](double x) { return std::cos(x); };
    throw ConfigError("unknown forcing: " + name + " (use zero|sin|cos)");
}

OdeSpec parse_ode(const json& cfg) {
    const json& o = cfg.at("ode");
    const std::string alg = o.at("algebra").get<std::string>();
    if (alg == "sim2") return OdeSpec::sim2(o.at("K").get<double>());
    if (alg == "sl2")
        return OdeSpec::sl2(forcing_by_name(o.value("F", std::string("zero"))));
    if (alg == "gl2")
        return OdeSpec::gl2(o.value("A", -1.0), o.value("branch_sign", -1));
    throw ConfigError("unknown algebra: " + alg + " (use sim2|sl2|gl2)");
}

InitialData parse_initial(const json& cfg) {
    const json& i = cfg.at("initial");
    return InitialData{i.at("x0").get<double>(), i.at("y0").get<double>(),
                       i.at("y1").get<double>(), i.at("y2").get<double>()};
}

SchemeSpec make_scheme(const std::string& name, const json& cfg,
                       const OdeSpec& ode, double eps) {
    if (name == "inv_sim2") {
        if (ode.algebra != AlgebraId::Sim2) throw ConfigError("inv_sim2 needs a sim2 ode");
        return SchemeSpec::inv_sim2(ode.K, cfg.value("alpha", 0.5));
    }
    if (name == "inv_sl2") {
        if (ode.algebra != AlgebraId::Sl2y) throw ConfigError("inv_sl2 needs an sl2 ode");
        return SchemeSpec::inv_sl2(ode.F, cfg.value("a", -0.25), cfg.value("b", 0.5),
                                   cfg.value("c", 0.25));
    }
    if (name == "inv_gl2") {
        if (ode.algebra != AlgebraId::Gl2xy) throw ConfigError("inv_gl2 needs a gl2 ode");
        return SchemeSpec::inv_gl2(ode.A, ode.branch_sign, cfg.value("alpha", 0.5),
                                   cfg.value("gamma", 1.0));
    }
    if (name == "standard") return SchemeSpec::standard(ode, cfg.value("h", eps));
    throw ConfigError("unknown scheme: " + name +
                      " (use inv_sim2|inv_sl2|inv_gl2|standard)");
}

std::string default_invariant_scheme(AlgebraId algebra) {
    switch (algebra) {
        case AlgebraId::Sim2: return "inv_sim2";
        case AlgebraId::Sl2y: return "inv_sl2";
        case AlgebraId::Gl2xy: return "inv_gl2";
    }
    throw ConfigError("unknown algebra");
}

/// Seed state plus the spec with any data-dependent parameters resolved
/// (the adaptive-lattice ratio of inv_gl2 is measured from the seed unless
/// the config pins it).
StepState seed_scheme(SchemeSpec& spec, const OdeSpec& ode, const InitialData& init,
                      double eps, bool gamma_pinned) {
    const double seed_eps = spec.kind == SchemeKind::Standard ? spec.h : eps;
    StepState st = seed_from_initial_data(spec, ode, init, seed_eps);
    if (spec.kind == SchemeKind::InvGl2 && !gamma_pinned)
        spec.gamma = gl2_gamma_from_seed(st);
    return st;
}

double reference_y(const OdeSpec& ode, const InitialData& init, double x) {
    return reference_jet_at(ode, init, x, 1e-12).y;
}

FirstApproxId approx_id_by_name(const std::string& name) {
    if (name == "sim2_lattice") return FirstApproxId::Sim2Lattice;
    if (name == "sim2_eq") return FirstApproxId::Sim2Eq;
    if (name == "sl2_eq") return FirstApproxId::Sl2Eq;
    if (name == "gl2_lattice") return FirstApproxId::Gl2Lattice;
    if (name == "gl2_eq") return FirstApproxId::Gl2Eq;
    throw ConfigError("unknown first-approximation id: " + name);
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: config field error: %s\n", e.what());
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
    }
    return kExitConfigError;
}

// ---------------------------------------------------------------------------
// invariance suites

double rel_dev(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Random group element whose stencil image is admissible; the group action
/// can push abscissas out of order (or out of the gl2 domain), which is an
/// error for a single transform but merely a resample here.
template <typename Fn>
GroupElement admissible_element(AlgebraId alg, GeneratorSet set, double scale,
                                std::mt19937_64& rng, const Fn& ok) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        GroupElement g = random_element(alg, set, scale, rng);
        if (ok(g)) return g;
    }
    throw DomainViolation("no admissible group element found");
}

bool stencil_ok(const GroupElement& g, const Stencil4& s) {
    try {
        apply_stencil(g, s);
        return true;
    } catch (const Error&) {
        return false;
    }
}

struct SuiteResult {
    bool pass = true;
    std::vector<std::string> lines;

    void note(const std::string& line) { lines.push_back(line); }
    void check(bool ok, const std::string& line) {
        pass = pass && ok;
        lines.push_back(std::string(ok ? "  ok   " : "  FAIL ") + line);
    }
};

SuiteResult suite_discrete(int elements, std::mt19937_64& rng) {
    SuiteResult r;
    OdeSpec sim2 = OdeSpec::sim2(1.0);
    OdeSpec sl2 = OdeSpec::sl2([](double x) { return std::sin(x); });
    OdeSpec gl2 = OdeSpec::gl2(-1.0, -1);
    const SpacingDirection dir{{1.0, 1.2, 0.9}};

    double worst = 0.0;
    for (int i = 0; i < elements; ++i) {
        const Jet3 j = random_solution_jet(sim2, rng);
        const Stencil4 s = stencil_from_jet(j, dir, 0.15);
        const GroupElement g =
            admissible_element(AlgebraId::Sim2, GeneratorSet::Euclidean, 0.4, rng,
                               [&](const GroupElement& e) { return stencil_ok(e, s); });
        const Sim2Xi a = sim2_xi(s), b = sim2_xi(apply_stencil(g, s));
        for (int k = 0; k < 5; ++k) worst = std::max(worst, rel_dev(a.xi[size_t(k)], b.xi[size_t(k)]));
    }
    r.check(worst <= 1e-12, "sim2 xi invariant under E(2), worst rel dev " + fmt(worst));

    worst = 0.0;
    for (int i = 0; i < elements; ++i) {
        // Redraw until |J1| is solidly nonzero: J1 is a scaled difference of
        // two O(5) cross-ratio-like terms, and a relative comparison on a
        // near-cancelled value only measures rounding noise.
        Jet3 j = random_solution_jet(sl2, rng);
        Stencil4 s = stencil_from_jet(j, dir, 0.2);
        while (std::abs(sl2_j1(s)) < 0.05) {
            j = random_solution_jet(sl2, rng);
            s = stencil_from_jet(j, dir, 0.2);
        }
        const GroupElement g =
            admissible_element(AlgebraId::Sl2y, GeneratorSet::MobiusY, 0.4, rng,
                               [&](const GroupElement& e) { return stencil_ok(e, s); });
        // Apply the word to the ordinates in quad precision. Each flow with a
        // double parameter is exactly a group element, so the identity under
        // test is exact; rounding the composite map in double would leak
        // amplified noise into J1 through its near-cancelling numerator.
        wide::Vec4 xs, ys, yt;
        for (int k = 0; k < 4; ++k) {
            xs[size_t(k)] = s.p[size_t(k)].x;
            ys[size_t(k)] = s.p[size_t(k)].y;
            yt[size_t(k)] = ys[size_t(k)];
        }
        for (const Flow& f : g.word)
            for (wide::Real& y : yt) {
                if (f.generator == 1) y = y + wide::Real(f.tau);
                else if (f.generator == 2) y = y * wide::Real(std::exp(f.tau));
                else y = y / (wide::Real(1) - wide::Real(f.tau) * y);
            }
        auto qabs = [](wide::Real v) { return v < 0 ? -v : v; };
        auto qdev = [&](wide::Real a, wide::Real b) {
            return double(qabs(a - b) / std::max({qabs(a), qabs(b), wide::Real(1e-300)}));
        };
        auto cross = [](const wide::Vec4& y) {
            return (y[3] - y[1]) * (y[2] - y[0]) / ((y[3] - y[2]) * (y[1] - y[0]));
        };
        worst = std::max(worst, qdev(cross(ys), cross(yt)));
        worst = std::max(worst, qdev(wide::sl2_j1(xs, ys), wide::sl2_j1(xs, yt)));
    }
    r.check(worst <= 1e-12, "sl2 R and J1 invariant under Mobius-in-y, worst rel dev " + fmt(worst));

    worst = 0.0;
    for (int i = 0; i < elements; ++i) {
        const Jet3 j = random_solution_jet(gl2, rng);
        const Stencil4 s = stencil_from_jet(j, dir, 0.15);
        const GroupElement g =
            admissible_element(AlgebraId::Gl2xy, GeneratorSet::Sl2Part, 0.1, rng,
                               [&](const GroupElement& e) { return stencil_ok(e, s); });
        const Gl2Xi a = gl2_xi(s), b = gl2_xi(apply_stencil(g, s));
        for (int k = 0; k < 5; ++k) worst = std::max(worst, rel_dev(a.xi[size_t(k)], b.xi[size_t(k)]));
    }
    r.check(worst <= 1e-12, "gl2 xi invariant under SL(2,R) words, worst rel dev " + fmt(worst));
    return r;
}

std::vector<Stencil4> solved_stencils(const SchemeSpec& spec, const OdeSpec& ode,
                                      const InitialData& init, double eps, int steps) {
    SchemeSpec s = spec;
    StepState seed = seed_from_initial_data(s, ode, init, eps);
    if (s.kind == SchemeKind::InvGl2) s.gamma = gl2_gamma_from_seed(seed);
    RunResult rr = run(s, seed, steps);
    std::vector<Stencil4> out;
    for (size_t i = 0; i + 3 < rr.points.size(); ++i)
        out.emplace_back(rr.points[i], rr.points[i + 1], rr.points[i + 2], rr.points[i + 3]);
    if (out.empty()) throw DomainViolation("scheme run produced no stencils");
    return out;
}

SuiteResult suite_equivariance(int elements, std::mt19937_64& rng) {
    SuiteResult r;
    OdeSpec sim2 = OdeSpec::sim2(1.0);
    OdeSpec gl2 = OdeSpec::gl2(-1.0, -1);
    const SpacingDirection dir{{1.0, 1.2, 0.9}};
    const AlphaWeight w{0.5};
    std::uniform_real_distribution<double> tau(-0.5, 0.5);

    double worst = 0.0;
    for (int i = 0; i < elements; ++i) {
        const Stencil4 s = stencil_from_jet(random_solution_jet(sim2, rng), dir, 0.2);
        const double t = tau(rng), lam = std::exp(t);
        const Stencil4 st = apply_stencil(GroupElement(AlgebraId::Sim2, {Flow{4, t}}), s);
        const Sim2Xi a = sim2_xi(s), b = sim2_xi(st);
        const JPair ja = sim2_j(s, w), jb = sim2_j(st, w);
        for (int k = 0; k < 3; ++k) worst = std::max(worst, rel_dev(b.xi[size_t(k)], lam * a.xi[size_t(k)]));
        for (int k = 3; k < 5; ++k) worst = std::max(worst, rel_dev(b.xi[size_t(k)], lam * lam * a.xi[size_t(k)]));
        worst = std::max(worst, rel_dev(jb.J1, ja.J1 / lam));
        worst = std::max(worst, rel_dev(jb.J2, ja.J2 / (lam * lam)));
    }
    r.check(worst <= 1e-10,
            "sim2 dilation weights (xi1..3: +1, xi4..5: +2, J1: -1, J2: -2), worst rel dev " + fmt(worst));
    r.note("  note sim2 J1, J2 are dilation-equivariant with weights -1, -2, not invariant");

    worst = 0.0;
    for (int i = 0; i < elements; ++i) {
        const Stencil4 s = stencil_from_jet(random_solution_jet(gl2, rng), dir, 0.15);
        const double t = tau(rng), lam = std::exp(t);
        const Stencil4 st = apply_stencil(GroupElement(AlgebraId::Gl2xy, {Flow{4, t}}), s);
        const Gl2Xi a = gl2_xi(s), b = gl2_xi(st);
        const JPair ja = gl2_j(s, w), jb = gl2_j(st, w);
        for (int k = 0; k < 5; ++k) worst = std::max(worst, rel_dev(b.xi[size_t(k)], a.xi[size_t(k)] / lam));
        worst = std::max(worst, rel_dev(jb.J1, lam * lam * ja.J1));
        worst = std::max(worst, rel_dev(jb.J2, lam * lam * lam * ja.J2));
    }
    r.check(worst <= 1e-10,
            "gl2 X4 weights (xi: -1, J1: +2, J2: +3), worst rel dev " + fmt(worst));

    // Zero sets of the two weighted scheme equations are dilation-invariant:
    // transform solved stencils and re-evaluate the difference equation.
    const SchemeSpec sch_sim2 = SchemeSpec::inv_sim2(1.0);
    const SchemeSpec sch_gl2 = SchemeSpec::inv_gl2(-1.0, -1);
    const std::vector<Stencil4> sim2_solved =
        solved_stencils(sch_sim2, sim2, InitialData{0.0, 0.0, 0.0, 1.0}, 0.02, 20);
    const std::vector<Stencil4> gl2_solved =
        solved_stencils(sch_gl2, gl2, InitialData{1.0, 1.0, 1.0, 0.3}, 0.05, 40);
    worst = 0.0;
    SchemeSpec sch_gl2_run = sch_gl2;
    {
        // gamma of the solved gl2 lattice, measured from its own points
        const Stencil4& s0 = gl2_solved.front();
        sch_gl2_run.gamma = gl2_gamma_from_seed(StepState({s0.p[0], s0.p[1], s0.p[2]}));
    }
    for (int i = 0; i < elements; ++i) {
        const double t = tau(rng), lam = std::exp(t);
        const Stencil4& a = sim2_solved[size_t(i) % sim2_solved.size()];
        const Stencil4 at = apply_stencil(GroupElement(AlgebraId::Sim2, {Flow{4, t}}), a);
        worst = std::max(worst, std::abs(scheme_equations(sch_sim2, at)[0]) *
                                    std::min(1.0, lam * lam));
        const Stencil4& b = gl2_solved[size_t(i) % gl2_solved.size()];
        const Stencil4 bt = apply_stencil(GroupElement(AlgebraId::Gl2xy, {Flow{4, t}}), b);
        worst = std::max(worst, std::abs(scheme_equations(sch_gl2_run, bt)[0]) /
                                    std::max(1.0, lam * lam * lam));
    }
    r.check(worst <= 1e-9, "scheme-equation zero sets dilation-invariant on solved stencils, worst residual " + fmt(worst));
    return r;
}

SuiteResult suite_first_approx(int elements, std::mt19937_64& rng) {
    SuiteResult r;
    struct Case {
        FirstApproxId id;
        const char* name;
        OdeSpec ode;
        double h0, h1;
        double group_scale;
    };
    const std::vector<Case> cases = {
        {FirstApproxId::Sim2Lattice, "sim2_lattice", OdeSpec::sim2(1.3), 1e-3, 1.1e-3, 0.3},
        {FirstApproxId::Sim2Eq, "sim2_eq", OdeSpec::sim2(1.3), 1e-4, 1.3e-4, 0.25},
        {FirstApproxId::Sl2Eq, "sl2_eq",
         OdeSpec::sl2([](double x) { return std::sin(x); }), 4e-4, 1e-4, 0.4},
        {FirstApproxId::Gl2Lattice, "gl2_lattice", OdeSpec::gl2(-1.0, -1), 1e-3, 1e-3, 0.1},
        {FirstApproxId::Gl2Eq, "gl2_eq", OdeSpec::gl2(-1.0, -1), 1e-4, 1.3e-4, 0.05},
    };
    for (const Case& c : cases) {
        int failures = 0;
        double worst = 0.0;
        for (int i = 0; i < elements; ++i) {
            Jet3 j = random_solution_jet(c.ode, rng);
            if (c.id == FirstApproxId::Gl2Eq) {
                // keep I1 moderate: the cubic A^2 I1^3 amplifies the 1e-8
                // jet-transport error beyond the check tolerance otherwise
                while (continuous_invariants(AlgebraId::Gl2xy, j).I1 > 2.0)
                    j = random_solution_jet(c.ode, rng);
            }
            FirstApproxParams par;  // alpha = 1/2, (a,b,c) = 0, gamma solved below
            std::array<double, 3> h{};
            try {
                h = zero_set_spacings(c.id, c.ode, par, j, c.h0, c.h1);
            } catch (const Error&) {
                --i;  // jet without an admissible zero-set spacing: redraw
                continue;
            }
            const GroupElement g = admissible_element(
                c.ode.algebra, GeneratorSet::Full, c.group_scale, rng,
                [&](const GroupElement& e) {
                    try {
                        check_first_approx_invariance(c.id, c.ode, par, e, j, h);
                        return true;
                    } catch (const Error&) {
                        return false;
                    }
                });
            const FirstApproxCheck chk =
                check_first_approx_invariance(c.id, c.ode, par, g, j, h);
            if (!chk.zero_set_preserved) ++failures;
            worst = std::max(worst, std::abs(chk.value_transformed));
        }
        r.check(failures == 0, std::string(c.name) + " zero set preserved under full group, " +
                                   std::to_string(failures) + " failures, worst transformed value " +
                                   fmt(worst));
    }
    return r;
}

SuiteResult suite_schemes(int elements, std::mt19937_64& rng) {
    SuiteResult r;
    // Residual weights of the two scheme equations under the algebra's
    // dilation generator; every other generator leaves the residuals fixed.
    struct Weights {
        int dilation_gen = 0;
        double w_eq = 0.0, w_lat = 0.0;
    };
    struct Case {
        const char* name;
        SchemeSpec spec;
        OdeSpec ode;
        InitialData init;
        double eps;
        int steps;
        double group_scale;
        Weights weights;
    };
    // Coarser lattices than the other suites: the residuals amplify rounding
    // like 1/h^3, and the pass bar here is an absolute Newton tolerance.
    std::vector<Case> cases;
    cases.push_back({"inv_sim2", SchemeSpec::inv_sim2(1.0), OdeSpec::sim2(1.0),
                     InitialData{0.0, 0.0, 0.0, 1.0}, 0.1, 8, 0.3,
                     Weights{4, -2.0, 2.0}});
    auto sinf = [](double x) { return std::sin(x); };
    cases.push_back({"inv_sl2", SchemeSpec::inv_sl2(sinf), OdeSpec::sl2(sinf),
                     InitialData{0.3, 0.7, 0.6, 0.3}, 0.15, 15, 0.4, Weights{}});
    cases.push_back({"inv_gl2", SchemeSpec::inv_gl2(-1.0, -1), OdeSpec::gl2(-1.0, -1),
                     InitialData{1.0, 1.0, 1.0, 0.3}, 0.15, 8, 0.04,
                     Weights{4, 3.0, 0.0}});
    for (Case& c : cases) {
        StepState seed = seed_from_initial_data(c.spec, c.ode, c.init, c.eps);
        if (c.spec.kind == SchemeKind::InvGl2) c.spec.gamma = gl2_gamma_from_seed(seed);
        const RunResult rr = run(c.spec, seed, c.steps);
        std::vector<Stencil4> solved;
        for (size_t i = 0; i + 3 < rr.points.size(); ++i)
            solved.emplace_back(rr.points[i], rr.points[i + 1], rr.points[i + 2],
                                rr.points[i + 3]);
        const GeneratorSet set =
            c.spec.kind == SchemeKind::InvSl2 ? GeneratorSet::MobiusY : GeneratorSet::Full;
        // A stencil solved to tol must still solve the scheme to 10*tol after
        // the transform, where tol is the level the original stencil actually
        // reaches (floored at the Newton tolerance).
        double worst_ratio = 0.0;
        for (int i = 0; i < elements; ++i) {
            const Stencil4& s = solved[size_t(i) % solved.size()];
            const GroupElement g = admissible_element(
                c.ode.algebra, set, c.group_scale, rng,
                [&](const GroupElement& e) { return stencil_ok(e, s); });
            const std::array<double, 2> res0 = scheme_equations(c.spec, s);
            const std::array<double, 2> res =
                scheme_equations(c.spec, apply_stencil(g, s));
            double tau_d = 0.0;
            for (const Flow& fl : g.word)
                if (fl.generator == c.weights.dilation_gen) tau_d += fl.tau;
            const double tol = std::max({c.spec.newton.tol, std::abs(res0[0]),
                                         std::abs(res0[1])});
            worst_ratio = std::max(
                worst_ratio,
                std::max(std::abs(res[0]) / std::exp(c.weights.w_eq * tau_d),
                         std::abs(res[1]) / std::exp(c.weights.w_lat * tau_d)) /
                    tol);
        }
        r.check(worst_ratio <= 10.0,
                std::string(c.name) +
                    " transformed solved stencils still solve the scheme, worst residual ratio " +
                    fmt(worst_ratio) + " (limit 10)");
    }
    return r;
}

}  // namespace

uint64_t fnv1a_digest(const std::string& bytes) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

int cmd_solve(const std::string& config_path,
              const std::optional<std::string>& out_override,
              const std::optional<uint64_t>& seed_override) {
    return guarded([&]() -> int {
        (void)seed_override;  // recorded for reproducibility; solve is deterministic
        const std::string bytes = read_file(config_path);
        const json cfg = parse_json(bytes);
        const OdeSpec ode = parse_ode(cfg);
        const InitialData init = parse_initial(cfg);
        const int steps = cfg.at("steps").get<int>();
        if (steps < 0) throw ConfigError("steps must be >= 0");
        const double eps = cfg.value("eps", 0.1);
        SchemeSpec spec = make_scheme(cfg.at("scheme").get<std::string>(), cfg, ode, eps);
        const StepState seed = seed_scheme(spec, ode, init, eps, cfg.contains("gamma"));
        const RunResult rr = run(spec, seed, steps);

        std::ostringstream out;
        out << "# config " << hex16(fnv1a_digest(bytes)) << "\n";
        out << "step,x,y,y_ref,abs_err,newton_iters,h\n";
        for (size_t i = 0; i < rr.points.size(); ++i) {
            const Point& p = rr.points[i];
            const double y_ref = reference_y(ode, init, p.x);
            const int iters = i >= 3 ? rr.reports[i - 3].iterations : 0;
            const double h = i > 0 ? p.x - rr.points[i - 1].x : 0.0;
            out << i << ',' << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(y_ref) << ','
                << fmt(std::abs(p.y - y_ref)) << ',' << iters << ',' << fmt(h) << "\n";
        }
        std::string out_path = out_override ? *out_override
                                            : cfg.value("out", std::string());
        if (out_path.empty()) throw ConfigError("no output path (--out or config \"out\")");
        atomic_write(out_path, out.str());
        if (rr.halted)
            std::fprintf(stderr, "early halt at step %d: %s\n", rr.halt_index,
                         rr.halt_reason.c_str());
        return rr.halted ? kExitEarlyHalt : kExitOk;
    });
}

int cmd_compare(const std::string& config_path,
                const std::optional<std::string>& out_override,
                const std::optional<uint64_t>& seed_override) {
    return guarded([&]() -> int {
        (void)seed_override;
        const std::string bytes = read_file(config_path);
        const json cfg = parse_json(bytes);
        const OdeSpec ode = parse_ode(cfg);
        const InitialData init = parse_initial(cfg);
        const int steps = cfg.at("steps").get<int>();
        const double eps = cfg.value("eps", 0.1);
        SchemeSpec inv = make_scheme(
            cfg.value("invariant", default_invariant_scheme(ode.algebra)), cfg, ode, eps);
        SchemeSpec base =
            make_scheme(cfg.value("baseline", std::string("standard")), cfg, ode, eps);
        const StepState seed_inv = seed_scheme(inv, ode, init, eps, cfg.contains("gamma"));
        const StepState seed_base = seed_scheme(base, ode, init, eps, cfg.contains("gamma"));
        const RunResult ri = run(inv, seed_inv, steps);
        const RunResult rb = run(base, seed_base, steps);

        std::ostringstream out;
        out << "# config " << hex16(fnv1a_digest(bytes)) << "\n";
        out << "x,err_invariant,err_standard,ratio\n";
        const size_t n = std::min(ri.points.size(), rb.points.size());
        double max_ratio = 0.0, final_ratio = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double ei =
                std::abs(ri.points[i].y - reference_y(ode, init, ri.points[i].x));
            const double eb =
                std::abs(rb.points[i].y - reference_y(ode, init, rb.points[i].x));
            const double ratio = ei == eb ? 1.0 : eb / std::max(ei, 1e-300);
            out << fmt(ri.points[i].x) << ',' << fmt(ei) << ',' << fmt(eb) << ','
                << fmt(ratio) << "\n";
            if (i >= 3) {  // seed rows carry reference data on both sides
                max_ratio = std::max(max_ratio, ratio);
                final_ratio = ratio;
            }
        }
        std::string out_path = out_override ? *out_override
                                            : cfg.value("out", std::string());
        if (out_path.empty()) throw ConfigError("no output path (--out or config \"out\")");
        atomic_write(out_path, out.str());
        std::printf("compare: max_ratio=%s final_ratio=%s\n", fmt(max_ratio).c_str(),
                    fmt(final_ratio).c_str());
        return (ri.halted || rb.halted) ? kExitEarlyHalt : kExitOk;
    });
}

int cmd_diffapprox(const std::string& config_path,
                   const std::optional<std::string>& out_override,
                   const std::optional<uint64_t>& seed_override) {
    return guarded([&]() -> int {
        (void)seed_override;
        const std::string bytes = read_file(config_path);
        const json cfg = parse_json(bytes);
        const OdeSpec ode = parse_ode(cfg);
        const std::string id_name = cfg.at("id").get<std::string>();
        const FirstApproxId id = approx_id_by_name(id_name);
        const json& jj = cfg.at("jet");
        Jet3 jet{jj.at("x").get<double>(), jj.at("y").get<double>(),
                 jj.at("y1").get<double>(), jj.at("y2").get<double>(), 0.0};
        jet.y3 = rhs(ode, jet.x, jet.y, jet.y1, jet.y2);
        FirstApproxParams par;
        par.alpha = cfg.value("alpha", 0.5);
        par.a = cfg.value("a", 0.0);
        par.b = cfg.value("b", 0.0);
        par.c = cfg.value("c", 0.0);
        par.gamma = cfg.value("gamma", 1.0);
        SpacingDirection dir;
        if (cfg.contains("dir")) {
            const auto v = cfg.at("dir").get<std::vector<double>>();
            if (v.size() != 3) throw ConfigError("dir must have 3 entries");
            dir.alpha = {v[0], v[1], v[2]};
        }
        const double eps0 = cfg.value("eps0", 0.02);
        const int levels = cfg.value("levels", 7);

        const ResidualFunctional rf = residual_functional(id, ode, par);
        const ExpansionReport rep = extract_expansion(rf, ode, jet, dir, eps0, levels);
        const double cf = closed_form_c1(id, ode, par, jet, dir);
        const double scale = first_approx_scale(rep.c1, eps0, cf);
        const double rel_gap =
            std::abs(cf) > 0.0 ? std::abs(rep.c1 - cf) / std::abs(cf) : std::abs(rep.c1);

        json out;
        out["config_digest"] = hex16(fnv1a_digest(bytes));
        out["id"] = id_name;
        out["c0"] = rep.c0;
        out["c1"] = rep.c1;
        out["c2"] = rep.c2;
        out["fit_residual"] = rep.fit_residual;
        out["eps_grid"] = rep.eps_grid;
        out["closed_form_c1"] = cf;
        out["rel_gap"] = rel_gap;
        out["c1_below_threshold"] = std::abs(rep.c1) <= 1e-6 * scale;
        std::string out_path = out_override ? *out_override
                                            : cfg.value("out", std::string());
        if (out_path.empty()) throw ConfigError("no output path (--out or config \"out\")");
        atomic_write(out_path, out.dump(2) + "\n");
        return kExitOk;
    });
}

SuiteRun run_suite(const std::string& name, int elements, uint64_t seed) {
    if (elements <= 0) throw ConfigError("empty group-element count");
    std::mt19937_64 rng(seed);
    SuiteResult r;
    if (name == "discrete") r = suite_discrete(elements, rng);
    else if (name == "equivariance") r = suite_equivariance(elements, rng);
    else if (name == "first_approx") r = suite_first_approx(elements, rng);
    else if (name == "schemes") r = suite_schemes(elements, rng);
    else throw ConfigError("unknown suite: " + name);
    return SuiteRun{r.pass, r.lines};
}

int cmd_invariance(const std::string& config_path,
                   const std::optional<std::string>& out_override,
                   const std::optional<uint64_t>& seed_override) {
    return guarded([&]() -> int {
        const std::string bytes = read_file(config_path);
        const json cfg = parse_json(bytes);
        const int elements = cfg.at("elements").get<int>();
        if (elements <= 0) throw ConfigError("empty group-element count");
        const uint64_t seed =
            seed_override ? *seed_override : cfg.value("seed", uint64_t{1});
        std::vector<std::string> suites =
            cfg.value("suites", std::vector<std::string>{"discrete", "equivariance",
                                                         "first_approx", "schemes"});
        std::mt19937_64 rng(seed);
        std::ostringstream out;
        out << "# config " << hex16(fnv1a_digest(bytes)) << "\n";
        bool all_pass = true;
        for (const std::string& name : suites) {
            SuiteResult r;
            if (name == "discrete") r = suite_discrete(elements, rng);
            else if (name == "equivariance") r = suite_equivariance(elements, rng);
            else if (name == "first_approx") r = suite_first_approx(elements, rng);
            else if (name == "schemes") r = suite_schemes(elements, rng);
            else throw ConfigError("unknown suite: " + name);
            all_pass = all_pass && r.pass;
            out << "suite " << name << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
            for (const std::string& line : r.lines) out << line << "\n";
        }
        out << "invariance: " << (all_pass ? "PASS" : "FAIL") << "\n";
        std::fputs(out.str().c_str(), stdout);
        std::string out_path = out_override ? *out_override
                                            : cfg.value("out", std::string());
        if (!out_path.empty()) atomic_write(out_path, out.str());
        return all_pass ? kExitOk : kExitEarlyHalt;
    });
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"invariant difference schemes for third-order ODEs"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* desc;
        int (*fn)(const std::string&, const std::optional<std::string>&,
                  const std::optional<uint64_t>&);
    };
    const std::array<Sub, 4> subs = {{
        {"solve", "run one scheme and tabulate errors against the reference solution",
         cmd_solve},
        {"compare", "run an invariant scheme against a baseline on shared initial data",
         cmd_compare},
        {"diffapprox", "fit the eps-expansion of a scheme residual", cmd_diffapprox},
        {"invariance", "run the randomized invariance suites", cmd_invariance},
    }};

    struct Opts {
        std::string config;
        std::string out;
        uint64_t seed = 0;
        bool has_out = false, has_seed = false;
    };
    std::array<Opts, 4> opts;
    std::array<CLI::App*, 4> apps{};
    for (size_t i = 0; i < subs.size(); ++i) {
        CLI::App* sub = app.add_subcommand(subs[i].name, subs[i].desc);
        sub->add_option("--config", opts[i].config, "experiment config (JSON)")
            ->required();
        sub->add_option("--out", opts[i].out, "output path (overrides config)")
            ->each([&, i](const std::string&) { opts[i].has_out = true; });
        sub->add_option("--seed", opts[i].seed, "random seed (overrides config)")
            ->each([&, i](const std::string&) { opts[i].has_seed = true; });
        apps[i] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    for (size_t i = 0; i < subs.size(); ++i) {
        if (!apps[i]->parsed()) continue;
        const std::optional<std::string> out_opt =
            opts[i].has_out ? std::optional<std::string>(opts[i].out) : std::nullopt;
        const std::optional<uint64_t> seed_opt =
            opts[i].has_seed ? std::optional<uint64_t>(opts[i].seed) : std::nullopt;
        return subs[i].fn(opts[i].config, out_opt, seed_opt);
    }
    return kExitConfigError;
}

}  // namespace invdiff::cli
