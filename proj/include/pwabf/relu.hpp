#pragma once

#include <string>
#include <vector>

#include "pwabf/pwa.hpp"

namespace pwabf {

/// One-hidden-layer network x -> W2 max(0, W1 x + b1) + b2.
struct ReluNet {
    Mat W1;
    Vec b1;
    Mat W2;
    Vec b2;

    int input_dim() const { return static_cast<int>(W1.cols()); }
    int hidden_dim() const { return static_cast<int>(W1.rows()); }
};

Vec relu_forward(const ReluNet& net, const Point& x);

/// Exact PWA form of the network on a bounded box: one cell per feasible
/// activation pattern, found by depth-first sign enumeration with
/// infeasibility pruning. Patterns whose region has Chebyshev radius below
/// 1e-7 are discarded as lower-dimensional; their bit strings are appended
/// to `discarded` when given.
PwaDynamics enumerate_regions(const ReluNet& net, const HPolytope& box,
                              std::vector<std::string>* discarded = nullptr);

}  // namespace pwabf
