#pragma once

#include <optional>
#include <string>
#include <vector>

#include "invdiff/invariants.hpp"
#include "invdiff/newton.hpp"
#include "invdiff/odes.hpp"

namespace invdiff {

enum class SchemeKind {
    InvSim2,  ///< geometric-chord lattice + similitude-invariant equation
    InvSl2,   ///< uniform lattice + cross-ratio equation (closed-form step)
    InvGl2,   ///< fixed-ratio lattice + GL(2,R)-invariant equation
    Standard, ///< uniform lattice, divided-difference collocation of the ODE
};

struct SchemeSpec {
    SchemeKind kind = SchemeKind::Standard;
    OdeSpec ode;                ///< underlying ODE (parameters K, F, A, branch)
    AlphaWeight weight;         ///< alpha blending in J1 (InvSim2 / InvGl2)
    double a = -0.25, b = 0.5, c = 0.25;  ///< InvSl2 evaluation-point offsets
    double gamma = 1.0;         ///< InvGl2 lattice ratio (often set from seed)
    double h = 0.1;             ///< Standard lattice spacing
    NewtonOptions newton;

    static SchemeSpec inv_sim2(double K, double alpha = 0.5);
    static SchemeSpec inv_sl2(std::function<double(double)> F, double a = -0.25,
                              double b = 0.5, double c = 0.25);
    static SchemeSpec inv_gl2(double A = -1.0, int branch_sign = -1,
                              double alpha = 0.5, double gamma = 1.0);
    static SchemeSpec standard(const OdeSpec& ode, double h);
};

/// The last three accepted points; a step produces the fourth.
struct StepState {
    std::array<Point, 3> p;

    StepState() = default;
    explicit StepState(const std::array<Point, 3>& pts) : p(pts) { validate(); }
    void validate() const;

    StepState advanced(const Point& next) const {
        return StepState({p[1], p[2], next});
    }
};

/// Residuals of the scheme's two equations on a full stencil: [0] is the
/// difference equation, [1] the lattice equation (0 when the lattice is
/// explicit, as for InvSl2 and Standard).
std::array<double, 2> scheme_equations(const SchemeSpec& spec, const Stencil4& s);

struct StepResult {
    Point next;
    NewtonReport report;
};

/// Advance one step: solve the scheme's equations for (x_{n+2}, y_{n+2}).
StepResult step(const SchemeSpec& spec, const StepState& st);

struct RunResult {
    std::vector<Point> points;          ///< seed points + accepted steps
    std::vector<NewtonReport> reports;  ///< one per attempted step
    bool halted = false;                ///< stopped before n_steps completed
    int halt_index = -1;                ///< step index at which the halt occurred
    std::string halt_reason;
};

/// Iterate `step`, halting cleanly on the first failure with the partial
/// trajectory retained.
RunResult run(const SchemeSpec& spec, const StepState& seed, int n_steps);

/// Three starting points sampled from the high-accuracy reference solution at
/// x0 - eps, x0, x0 + eps, so seeding error is negligible versus scheme error.
StepState seed_from_initial_data(const SchemeSpec& spec, const OdeSpec& ode,
                                 const InitialData& init, double eps);

/// Lattice ratio measured from a seed (the analogue of xi_1/xi_2 on the
/// lower point triple); used as the default gamma of inv_gl2 runs.
double gl2_gamma_from_seed(const StepState& seed);

}  // namespace invdiff
