#pragma once

#include <vector>

#include "pwabf/types.hpp"

namespace pwabf {

using Point = Vec;

/// Region {x : E x + e >= 0}. Rows are normalized to unit normals on
/// construction so tolerances read as geometric distances.
struct HPolytope {
    Mat E;
    Vec e;

    HPolytope() = default;
    HPolytope(Mat E_in, Vec e_in);

    int dim() const { return static_cast<int>(E.cols()); }
    int num_rows() const { return static_cast<int>(E.rows()); }
};

/// Convex polytope as an irredundant vertex list, sorted lexicographically.
struct VPolytope {
    std::vector<Point> vertices;

    VPolytope() = default;
    explicit VPolytope(std::vector<Point> pts);

    int dim() const { return vertices.empty() ? 0 : static_cast<int>(vertices[0].size()); }
    int num_vertices() const { return static_cast<int>(vertices.size()); }
};

/// A 1-face of a cell.
struct Edge {
    Point a;
    Point b;
    int owner = -1;  // cell id, -1 when detached
};

/// n+1 affinely independent points.
struct Simplex {
    std::vector<Point> vertices;

    int dim() const { return vertices.empty() ? 0 : static_cast<int>(vertices[0].size()); }
    double volume() const;
};

bool contains(const HPolytope& h, const Point& x, double tol = kGeomTol);

/// All extreme points of a bounded full-dimensional H-polytope, found by
/// enumerating basic solutions of n-subsets of facets. Worst-case
/// exponential, fine at the cell sizes this library works with.
VPolytope vertices_of(const HPolytope& h, double tol = kGeomTol);

/// Facet system of conv(v), derived from the boundary of a Delaunay
/// triangulation with coplanar facets merged.
HPolytope hrep_of(const VPolytope& v);

/// Delaunay triangulation by lifting onto the paraboloid and collecting
/// lower-hull facets by direct enumeration. Cospherical ties are broken
/// by a lexicographic symbolic perturbation so the result is deterministic
/// and independent of input order.
std::vector<Simplex> delaunay(const std::vector<Point>& points);

/// Same triangulation, returned as index tuples into `points`.
std::vector<std::vector<int>> delaunay_indices(const std::vector<Point>& points);

/// The 1-faces of a full-dimensional polytope.
std::vector<Edge> edges_of(const VPolytope& v);

double volume(const VPolytope& v);

/// Chebyshev center: the deepest interior point and its radius.
/// radius < 0 means empty, radius ~ 0 means not full-dimensional.
struct ChebyshevResult {
    Point center;
    double radius = -1.0;
};
ChebyshevResult chebyshev_center(const HPolytope& h);

/// Counter-clockwise ordering of 2-D points around their centroid.
std::vector<int> order_ccw(const std::vector<Point>& pts);

}  // namespace pwabf
