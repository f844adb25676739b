#pragma once

#include <array>
#include <functional>

#include "invdiff/errors.hpp"

namespace invdiff {

struct NewtonReport {
    int iterations = 0;
    double final_residual_norm = 0.0;
    bool converged = false;
};

struct NewtonOptions {
    double tol = 1e-12;
    int max_iter = 50;
    double fd_rel = 1e-7;    ///< relative Jacobian perturbation
    int max_halvings = 20;   ///< damping: step halvings on residual increase
    double step_tol = 1e-13; ///< accept when the damped update stalls below this
};

/// Damped Newton for a scalar equation f(u) = 0 with finite-difference
/// derivative. Returns the root estimate; the report records convergence.
double newton_solve_1d(const std::function<double(double)>& f, double u0,
                       const NewtonOptions& opt, NewtonReport& report);

/// Damped Newton for a 2x2 system f(u) = 0.
std::array<double, 2> newton_solve_2d(
    const std::function<std::array<double, 2>(const std::array<double, 2>&)>& f,
    std::array<double, 2> u0, const NewtonOptions& opt, NewtonReport& report);

}  // namespace invdiff
