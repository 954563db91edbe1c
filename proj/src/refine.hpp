#pragma once

#include <functional>
#include <utility>

namespace sdoa::detail {

// Minimises f over in-plane direction cosines (|u| <= 1) starting at (ux, uy) with a local
// quadratic model on a shrinking 3x3 stencil of initial half-width h.
std::pair<double, double> refine_minimum(const std::function<double(double, double)>& f, double ux,
                                         double uy, double h);

} // namespace sdoa::detail
