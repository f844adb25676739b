#pragma once

#include <functional>
#include <random>
#include <vector>

#include "invdiff/core.hpp"
#include "invdiff/groups.hpp"

namespace invdiff {

/// One of the three invariant third-order ODEs, with its parameters.
struct OdeSpec {
    AlgebraId algebra = AlgebraId::Sim2;
    double K = 0.0;                          ///< Sim2 constant
    std::function<double(double)> F;         ///< Sl2y forcing (null means F = 0)
    double A = -1.0;                         ///< Gl2xy scale constant
    int branch_sign = -1;                    ///< sign of the square-root branch

    static OdeSpec sim2(double K);
    static OdeSpec sl2(std::function<double(double)> F = nullptr);
    static OdeSpec gl2(double A = -1.0, int branch_sign = -1);

    double forcing(double x) const { return F ? F(x) : 0.0; }
};

struct InitialData {
    double x0 = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;
    double y2 = 0.0;
};

/// Residual of the ODE at a jet:
///   Sim2:  (1+y'^2) y''' - 3 y' y''^2 - K y''^2
///   Sl2y:  (y'y''' - (3/2)y''^2)/y'^2 - F(x)
///   Gl2xy: I2 - sign*|A|*I1^(3/2)   (signed square-root branch)
double residual(const OdeSpec& spec, const Jet3& j);

/// The quadratic Gl2xy form x^4(y'y'''-3y''^2)^2 - A^2 y'(2xy''+y')^3,
/// exposed for cross-checks against the signed branch.
double gl2_quadratic_residual(const OdeSpec& spec, const Jet3& j);

/// y''' solved from the ODE on its branch. Throws DomainViolation outside
/// the equation's regularity domain.
double rhs(const OdeSpec& spec, double x, double y, double y1, double y2);

/// Fourth and fifth solution derivatives from the ODE's differential
/// consequences, obtained by differencing rhs along the local solution.
std::array<double, 2> extend_jet(const OdeSpec& spec, const Jet3& j);

/// y-value of the on-solution Taylor expansion (degree 5) at offset dx.
double solution_taylor5(const OdeSpec& spec, const Jet3& j, const std::array<double, 2>& y45,
                        double dx);

/// Adaptive fixed-order reference integration from init to x_target. The step
/// count is doubled until two refinement levels agree within tol per unit
/// interval. Returns jets at the finest-level grid points (first entry is the
/// initial jet).
std::vector<Jet3> reference_solve(const OdeSpec& spec, const InitialData& init,
                                  double x_target, double tol);

/// Final jet of reference_solve (the initial jet when x == init.x0).
Jet3 reference_jet_at(const OdeSpec& spec, const InitialData& init, double x, double tol);

/// Random jet satisfying the ODE exactly (y''' from rhs), drawn from a box
/// inside the equation's domain.
Jet3 random_solution_jet(const OdeSpec& spec, std::mt19937_64& rng);

}  // namespace invdiff
