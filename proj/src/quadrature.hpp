#pragma once

#include <vector>

namespace nsci::detail {

struct GaussNodes {
    std::vector<double> x, w;
};

// Composite 20-point Gauss-Legendre rule with equal panels on [a, b].
GaussNodes gauss_panels(double a, double b, int panels);

}  // namespace nsci::detail
