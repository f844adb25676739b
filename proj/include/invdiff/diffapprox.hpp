#pragma once

#include <functional>
#include <vector>

#include "invdiff/invariants.hpp"
#include "invdiff/odes.hpp"

namespace invdiff {

/// The five closed-form first differential approximations: the leading
/// spacing-corrections of the two similitude scheme equations, the
/// cross-ratio equation, and the two GL(2,R) scheme equations.
enum class FirstApproxId {
    Sim2Lattice,
    Sim2Eq,
    Sl2Eq,
    Gl2Lattice,
    Gl2Eq,
};

/// Free parameters entering the scheme residuals and their closed forms
/// (ODE constants K, F, A live in the accompanying OdeSpec).
struct FirstApproxParams {
    double alpha = 0.5;            ///< J1 blending weight (Sim2Eq, Gl2Eq)
    double a = 0.0, b = 0.0, c = 0.0;  ///< Sl2Eq evaluation-point offsets
    double gamma = 1.0;            ///< Gl2Lattice ratio
};

struct ExpansionReport {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double fit_residual = 0.0;
    std::vector<double> eps_grid;
};

using StencilFunctional = std::function<double(const Stencil4&)>;
using WideStencilFunctional =
    std::function<wide::Real(const wide::Vec4& x, const wide::Vec4& y)>;

/// A scheme residual together with the power of eps dividing it before the
/// expansion fit (lattice residuals vanish at eps = 0, so their leading
/// coefficient only becomes visible after one division by eps), plus an
/// extended-precision twin the fit evaluates on its shrinking stencils.
struct ResidualFunctional {
    StencilFunctional f;
    int normalize_power = 0;
    WideStencilFunctional f_wide;
};

ResidualFunctional residual_functional(FirstApproxId id, const OdeSpec& ode,
                                       const FirstApproxParams& par);

/// Stencil sampled from the degree-5 on-solution Taylor expansion of the jet
/// (y'''' and y''''' from the ODE's differential consequences). Abscissas are
/// x - h[0], x, x + h[1], x + h[1] + h[2].
Stencil4 solution_stencil(const OdeSpec& ode, const Jet3& j,
                          const std::array<double, 2>& y45,
                          const std::array<double, 3>& h);

/// Evaluate the residual functional on shrinking on-solution stencils
/// h_k = dir.alpha * eps_k, eps_k = eps0 * 2^-k, divide by eps^normalize_power
/// and least-squares fit a polynomial in eps (cubic when levels >= 5, quartic
/// when levels >= 7). Stencils are built and evaluated in extended precision,
/// with ordinates sampled relative to the jet's base value; both measures keep
/// the rounding floor of the samples below the coefficients being fitted.
ExpansionReport extract_expansion(const ResidualFunctional& rf, const OdeSpec& ode,
                                  const Jet3& j, const SpacingDirection& dir,
                                  double eps0, int levels);

/// The closed-form first differential approximation evaluated verbatim at the
/// given jet and spacings h = (h_n, h_{n+1}, h_{n+2}).
double first_approx_value(FirstApproxId id, const OdeSpec& ode,
                          const FirstApproxParams& par, const Jet3& j,
                          const std::array<double, 3>& h);

/// eps-linear coefficient of first_approx_value along h = dir.alpha * eps,
/// divided by the same normalization as the fitted expansion, so that it is
/// directly comparable with ExpansionReport::c1. Extracted by exact
/// polynomial interpolation (the closed forms are cubic in eps at most).
double closed_form_c1(FirstApproxId id, const OdeSpec& ode,
                      const FirstApproxParams& par, const Jet3& j,
                      const SpacingDirection& dir);

/// Tolerance scale for comparisons involving this configuration.
double first_approx_scale(double c1, double eps0, double value);

/// Solve the free spacing h2 (or, for Gl2Lattice, the ratio gamma in `par`)
/// so that the closed form vanishes at the jet with spacings (h0, h1, h2).
/// For the equation forms the jet must already satisfy the ODE.
std::array<double, 3> zero_set_spacings(FirstApproxId id, const OdeSpec& ode,
                                        FirstApproxParams& par, const Jet3& j,
                                        double h0, double h1);

struct FirstApproxCheck {
    double value_original = 0.0;
    double value_transformed = 0.0;
    double tol = 0.0;              ///< 1e-6 * scale
    bool zero_set_preserved = true;
    double ratio = 0.0;            ///< transformed / original, when both nonzero
    bool has_ratio = false;
};

/// Zero-set preservation test: realize the spacings as an on-solution stencil
/// around the jet, transform stencil and jet, recompute spacings, and compare
/// the closed form before and after.
FirstApproxCheck check_first_approx_invariance(FirstApproxId id, const OdeSpec& ode,
                                               const FirstApproxParams& par,
                                               const GroupElement& g, const Jet3& j,
                                               const std::array<double, 3>& h);

}  // namespace invdiff
