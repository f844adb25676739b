#include "invdiff/newton.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace invdiff {
namespace {

// NaN compares false, so treat any non-finite trial norm as an increase.
bool worse(double trial, double current) { return !(trial < current); }

double norm2(const std::array<double, 2>& v) { return std::hypot(v[0], v[1]); }

}  // namespace

double newton_solve_1d(const std::function<double(double)>& f, double u0,
                       const NewtonOptions& opt, NewtonReport& report) {
    double u = u0;
    double r = f(u);
    report = NewtonReport{};
    report.final_residual_norm = std::abs(r);
    for (int it = 0; it < opt.max_iter; ++it) {
        if (std::abs(r) <= opt.tol) {
            report.converged = true;
            return u;
        }
        const double du = opt.fd_rel * (std::abs(u) + 1.0);
        const double d = (f(u + du) - r) / du;
        if (d == 0.0 || !std::isfinite(d))
            break;
        double step = -r / d;
        double lambda = 1.0;
        double u_new = u + step;
        double r_new = f(u_new);
        int halves = 0;
        while (worse(std::abs(r_new), std::abs(r)) && halves < opt.max_halvings) {
            lambda *= 0.5;
            u_new = u + lambda * step;
            r_new = f(u_new);
            ++halves;
        }
        const bool stalled =
            std::abs(u_new - u) <= opt.step_tol * (1.0 + std::abs(u));
        u = u_new;
        r = r_new;
        ++report.iterations;
        report.final_residual_norm = std::abs(r);
        if (stalled) {
            // The update is below resolution: the residual has reached its
            // rounding floor and cannot improve further.
            report.converged = true;
            return u;
        }
    }
    report.converged = std::abs(r) <= opt.tol;
    return u;
}

std::array<double, 2> newton_solve_2d(
    const std::function<std::array<double, 2>(const std::array<double, 2>&)>& f,
    std::array<double, 2> u0, const NewtonOptions& opt, NewtonReport& report) {
    std::array<double, 2> u = u0;
    std::array<double, 2> r = f(u);
    report = NewtonReport{};
    report.final_residual_norm = norm2(r);
    for (int it = 0; it < opt.max_iter; ++it) {
        if (norm2(r) <= opt.tol) {
            report.converged = true;
            return u;
        }
        Eigen::Matrix2d J;
        for (int col = 0; col < 2; ++col) {
            std::array<double, 2> up = u;
            const double du = opt.fd_rel * (std::abs(u[col]) + 1.0);
            up[col] += du;
            const std::array<double, 2> rp = f(up);
            J(0, col) = (rp[0] - r[0]) / du;
            J(1, col) = (rp[1] - r[1]) / du;
        }
        Eigen::Vector2d rhs(-r[0], -r[1]);
        Eigen::Vector2d step = J.fullPivLu().solve(rhs);
        if (!step.allFinite()) break;
        double lambda = 1.0;
        std::array<double, 2> u_new{u[0] + step(0), u[1] + step(1)};
        std::array<double, 2> r_new = f(u_new);
        int halves = 0;
        while (worse(norm2(r_new), norm2(r)) && halves < opt.max_halvings) {
            lambda *= 0.5;
            u_new = {u[0] + lambda * step(0), u[1] + lambda * step(1)};
            r_new = f(u_new);
            ++halves;
        }
        const double unorm = std::max(std::abs(u[0]), std::abs(u[1]));
        const bool stalled =
            std::max(std::abs(u_new[0] - u[0]), std::abs(u_new[1] - u[1])) <=
            opt.step_tol * (1.0 + unorm);
        u = u_new;
        r = r_new;
        ++report.iterations;
        report.final_residual_norm = norm2(r);
        if (stalled) {
            report.converged = true;
            return u;
        }
    }
    report.converged = norm2(r) <= opt.tol;
    return u;
}

}  // namespace invdiff
