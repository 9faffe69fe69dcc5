#pragma once

#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pwabf/geometry.hpp"
#include "pwabf/types.hpp"

namespace pwabf {

/// One piece of the PWA map: xdot = A x + a on the region, which carries
/// both facet and vertex representations.
struct Cell {
    int id = -1;
    HPolytope hrep;
    VPolytope vrep;
    Mat A;
    Vec a;
    std::vector<int> vertex_ids;  // pool ids, aligned with vrep.vertices
};

/// Construction input for one cell; either representation may be omitted
/// and is then derived from the other.
struct CellSpec {
    Mat E;
    Vec e;
    std::vector<Point> vertices;
    Mat A;
    Vec a;
};

/// Bounded polytopal partition plus the affine map per cell. Immutable
/// after construction; refinement builds a new instance.
class PwaDynamics {
public:
    static PwaDynamics from_cells(const std::vector<CellSpec>& specs);

    int dim() const { return dim_; }
    int num_cells() const { return static_cast<int>(cells_.size()); }
    const Cell& cell(int id) const { return cells_.at(id); }
    const std::vector<Cell>& cells() const { return cells_; }

    const std::vector<Point>& vertex_pool() const { return pool_; }
    /// Sorted cell ids owning each pool vertex.
    const std::vector<std::vector<int>>& owners() const { return owners_; }

    /// Whether every cell containing the origin has it as a vertex.
    bool origin_is_vertex_where_contained() const;

private:
    int dim_ = 0;
    std::vector<Cell> cells_;
    std::vector<Point> pool_;
    std::vector<std::vector<int>> owners_;
};

struct ContinuityViolation {
    int cell_i = -1;
    int cell_j = -1;
    int vertex_id = -1;
    double gap = 0.0;
};

/// Compares A_i v + a_i across all owner pairs of every shared vertex.
/// An empty result certifies continuity of the PWA map.
std::vector<ContinuityViolation> check_continuity(const PwaDynamics& d,
                                                  double tol = kContinuityTol);

/// Index of the first-by-id cell containing x, or -1.
int locate_cell(const PwaDynamics& d, const Point& x, double tol = kGeomTol,
                int hint = -1);

Vec evaluate_dynamics(const PwaDynamics& d, const Point& x, double tol = kGeomTol);

/// I_dD, I_b and I_int over (cell id, pool vertex id) incidences.
struct IndexSets {
    std::set<int> boundary_cells;
    std::set<std::pair<int, int>> boundary_pairs;
    std::set<std::pair<int, int>> interior_pairs;
    std::set<int> boundary_vertices;  // pool ids on the domain boundary
};

IndexSets build_index_sets(const PwaDynamics& d);

/// One facet of one cell with its incident pool vertices.
struct FacetRecord {
    int cell = -1;
    int row = -1;
    std::vector<int> vertex_ids;  // sorted pool ids tight at the facet
    bool boundary = false;
};

struct FacetScan {
    std::vector<FacetRecord> facets;
    std::vector<std::string> violations;  // hanging facets, overlaps
};

/// Matches facets across cells combinatorially: a facet seen once whose
/// relative interior lies in no other cell is a domain-boundary facet;
/// anything else unmatched is a conformity violation.
FacetScan scan_facets(const PwaDynamics& d);

double total_volume(const PwaDynamics& d);

/// Uniform sample from the cell interior by rejection from the bounding box.
Point sample_in_cell(const Cell& c, std::mt19937_64& rng);

}  // namespace pwabf
