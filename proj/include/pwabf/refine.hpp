#pragma once

#include <set>
#include <vector>

#include "pwabf/pwa.hpp"

namespace pwabf {

/// One refinement decision: split `target` at `new_vertex` on `edge`,
/// re-triangulating every listed neighbor for conformity.
struct RefinementPlan {
    int target = -1;
    Edge edge;
    Point new_vertex;
    std::vector<int> neighbors;
    bool midpoint_fallback = false;  // bisector search found no sign change
};

/// Angle in [0, pi] between the owner-cell field at the edge endpoints.
/// A vanishing field at an endpoint scores maximal (pi): stationary
/// vertices take refinement priority.
double field_variation(const Edge& e, const PwaDynamics& d);

/// Point on the edge where the field direction bisects the endpoint
/// directions, found by scalar bisection. Falls back to the midpoint when
/// the angle-difference function has no sign change.
Point bisector_point(const Edge& e, const PwaDynamics& d, double tol = 1e-9,
                     bool* midpoint_fallback = nullptr);

/// Delaunay split of one cell at a boundary point; subcells inherit the
/// parent map.
std::vector<CellSpec> refine_cell(const Cell& cell, const Point& new_vertex);

/// Executes one plan per flagged cell (worst edge by field variation, ties
/// by lower vertex-id pair) and re-triangulates face-sharing neighbors so
/// the partition stays conforming. Dynamics values are unchanged.
PwaDynamics refine_partition(const PwaDynamics& d, const std::set<int>& flagged,
                             std::vector<RefinementPlan>* plans_out = nullptr);

}  // namespace pwabf
