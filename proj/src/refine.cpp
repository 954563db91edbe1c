#include "refine.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace sdoa::detail {

std::pair<double, double> refine_minimum(const std::function<double(double, double)>& f, double ux,
                                         double uy, double h)
{
    double f0 = f(ux, uy);
    for (int it = 0; it < 80 && h > 1e-10; ++it) {
        const double fxp = f(ux + h, uy);
        const double fxm = f(ux - h, uy);
        const double fyp = f(ux, uy + h);
        const double fym = f(ux, uy - h);
        const double fpp = f(ux + h, uy + h);
        const double fpm = f(ux + h, uy - h);
        const double fmp = f(ux - h, uy + h);
        const double fmm = f(ux - h, uy - h);
        const Eigen::Vector2d g((fxp - fxm) / (2 * h), (fyp - fym) / (2 * h));
        Eigen::Matrix2d hess;
        hess(0, 0) = (fxp - 2 * f0 + fxm) / (h * h);
        hess(1, 1) = (fyp - 2 * f0 + fym) / (h * h);
        hess(0, 1) = hess(1, 0) = (fpp - fpm - fmp + fmm) / (4 * h * h);

        Eigen::Vector2d step = Eigen::Vector2d::Zero();
        if (hess(0, 0) > 0 && hess.determinant() > 0) {
            step = -hess.ldlt().solve(g);
            const double n = step.norm();
            if (n > 2 * h)
                step *= 2 * h / n;
        } else {
            // Not locally convex: take the best stencil point.
            const double vals[8] = {fxp, fxm, fyp, fym, fpp, fpm, fmp, fmm};
            const double dx[8] = {h, -h, 0, 0, h, h, -h, -h};
            const double dy[8] = {0, 0, h, -h, h, -h, h, -h};
            const int b = static_cast<int>(std::min_element(vals, vals + 8) - vals);
            step = {dx[b], dy[b]};
        }
        double nx = ux + step.x();
        double ny = uy + step.y();
        const double r = std::hypot(nx, ny);
        if (r > 1.0) {
            nx /= r;
            ny /= r;
        }
        const double f1 = f(nx, ny);
        if (f1 < f0) {
            const double moved = std::hypot(nx - ux, ny - uy);
            ux = nx;
            uy = ny;
            f0 = f1;
            h = std::clamp(moved, h / 8, h);
        } else {
            h /= 2;
        }
    }
    return {ux, uy};
}


} // namespace sdoa::detail
