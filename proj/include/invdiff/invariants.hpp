#pragma once

#include <array>

#include "invdiff/core.hpp"
#include "invdiff/groups.hpp"

namespace invdiff {

/// The five Euclidean four-point invariants: three chord lengths and the two
/// weighted second differences.
struct Sim2Xi {
    std::array<double, 5> xi{};  ///< xi[0..4] = xi_1 .. xi_5
};

/// The five SL(2,R) four-point invariants of the two-dimensional realization.
struct Gl2Xi {
    std::array<double, 5> xi{};
};

/// Weight alpha blending forward and backward second differences; beta = 1 - alpha.
struct AlphaWeight {
    double alpha = 0.5;
};

struct JPair {
    double J1 = 0.0;
    double J2 = 0.0;
};

Sim2Xi sim2_xi(const Stencil4& s);
JPair sim2_j(const Stencil4& s, AlphaWeight w);

/// Cross-ratio R of the four y-values. Throws DegenerateStencil when a
/// denominator vanishes.
double sl2_cross_ratio(const Stencil4& s);

/// Discrete invariant whose continuous limit is the Schwarzian expression
/// y'y''' - (3/2) y''^2 over y'^2. Vanishes identically on Mobius data.
double sl2_j1(const Stencil4& s);

/// Requires all abscissas > 0; throws DomainViolation otherwise.
Gl2Xi gl2_xi(const Stencil4& s);
JPair gl2_j(const Stencil4& s, AlphaWeight w);

/// Continuous differential invariants at a jet. Meaning per algebra:
///   Sim2:  I1, I2 (Euclidean), I = I2/I1^2 (full similitude)
///   Sl2y:  I1 = Schwarzian-type expression (I2, I unset)
///   Gl2xy: I1, I2 (SL(2,R)), I = I2/I1^(3/2) when I1 > 0
struct InvariantValues {
    double I1 = 0.0;
    double I2 = 0.0;
    double I = 0.0;
    bool has_ratio = false;
};

InvariantValues continuous_invariants(AlgebraId algebra, const Jet3& j);

/// Extended-precision kernels behind the four-point invariants, taking the
/// stencil as raw coordinate arrays. The expansion fit calls these directly:
/// the invariants divide near-cancelling differences by up to three powers of
/// the spacing, so double-precision evaluation noise (~1e-16/eps^3) would
/// swamp the eps^2..eps^4 coefficients being resolved. Quad precision keeps
/// the rounding floor orders of magnitude below every fitted coefficient.
namespace wide {

using Real = __float128;
using Vec4 = std::array<Real, 4>;

Real sqrt_q(Real v);  ///< quad square root (refined from sqrtl)

std::array<Real, 5> sim2_xi(const Vec4& x, const Vec4& y);
std::array<Real, 2> sim2_j(const Vec4& x, const Vec4& y, Real alpha);
Real sl2_j1(const Vec4& x, const Vec4& y);
std::array<Real, 5> gl2_xi(const Vec4& x, const Vec4& y);
std::array<Real, 2> gl2_j(const Vec4& x, const Vec4& y, Real alpha);

}  // namespace wide

}  // namespace invdiff
