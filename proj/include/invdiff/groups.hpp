#pragma once

#include <random>
#include <vector>

#include "invdiff/core.hpp"

namespace invdiff {

/// The three Lie algebra realizations acting on the (x, y) plane.
enum class AlgebraId {
    Sim2,   ///< translations, rotation, uniform dilation
    Sl2y,   ///< Mobius transformations of y alone (index 4 adds x-translation)
    Gl2xy,  ///< the two-dimensional gl(2,R) realization
};

/// Number of generators of the algebra (4, 3, 4).
int generator_count(AlgebraId algebra);

/// One step of a one-parameter flow: exp(tau * X_generator).
struct Flow {
    int generator = 1;  ///< 1-based generator index
    double tau = 0.0;
};

/// A finite group transformation, stored as a word of one-parameter flows
/// applied left to right.
struct GroupElement {
    AlgebraId algebra = AlgebraId::Sim2;
    std::vector<Flow> word;

    GroupElement() = default;
    GroupElement(AlgebraId alg, std::vector<Flow> w);

    /// Reversed word with negated parameters.
    GroupElement inverse() const;
};

Point apply(const GroupElement& g, const Point& p);

/// Pointwise action on all four stencil points. Throws OrderViolation if the
/// images are not increasing in x.
Stencil4 apply_stencil(const GroupElement& g, const Stencil4& s);

/// Third-order jet of the transformed curve at the transformed base point.
/// Computed by mapping samples of the jet's Taylor representative and
/// Richardson-extrapolating divided-difference derivatives; relative accuracy
/// about 1e-8 for smooth nonsingular transformations.
Jet3 transform_jet(const GroupElement& g, const Jet3& j);

/// Named generator subsets used by the invariance test suites.
enum class GeneratorSet {
    Full,        ///< all generators of the algebra
    Euclidean,   ///< Sim2 generators 1..3 (translations + rotation)
    MobiusY,     ///< Sl2y generators 1..3
    Sl2Part,     ///< Gl2xy generators 1..3
    Dilation,    ///< the algebra's dilation generator alone
    Translation, ///< x/y translations only
};

/// Random word over the chosen generator subset with parameters uniform in
/// [-scale, scale], one flow per generator in shuffled order.
GroupElement random_element(AlgebraId algebra, GeneratorSet set, double scale,
                            std::mt19937_64& rng);

}  // namespace invdiff
