#include "pwabf/pwa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace pwabf {

namespace {

constexpr double kFacetTightTol = 1e-7;

// Quantized-grid index for merging vertices within kVertexMergeTol.
class VertexPoolBuilder {
public:
    explicit VertexPoolBuilder(int dim) : dim_(dim) {}

    int intern(const Point& p, std::vector<Point>& pool) {
        std::vector<long long> base(dim_);
        for (int i = 0; i < dim_; ++i)
            base[i] = static_cast<long long>(std::floor(p[i] / kVertexMergeTol));
        std::vector<long long> key(dim_);
        int found = -1;
        visit_neighbors(base, key, 0, [&](const std::vector<long long>& k) {
            if (found >= 0) return;
            auto it = buckets_.find(k);
            if (it == buckets_.end()) return;
            for (int idx : it->second)
                if ((pool[idx] - p).lpNorm<Eigen::Infinity>() <= kVertexMergeTol) {
                    found = idx;
                    return;
                }
        });
        if (found >= 0) return found;
        pool.push_back(p);
        int idx = static_cast<int>(pool.size()) - 1;
        buckets_[base].push_back(idx);
        return idx;
    }

private:
    template <typename F>
    void visit_neighbors(const std::vector<long long>& base, std::vector<long long>& key,
                         int d, const F& fn) {
        if (d == dim_) {
            fn(key);
            return;
        }
        for (long long off = -1; off <= 1; ++off) {
            key[d] = base[d] + off;
            visit_neighbors(base, key, d + 1, fn);
        }
    }

    int dim_;
    std::map<std::vector<long long>, std::vector<int>> buckets_;
};

struct BBox {
    Vec lo, hi;
    bool holds(const Point& p, double tol) const {
        return ((p - lo).array() >= -tol).all() && ((hi - p).array() >= -tol).all();
    }
};

BBox bbox_of(const VPolytope& v) {
    BBox b;
    b.lo = v.vertices[0];
    b.hi = v.vertices[0];
    for (const Point& p : v.vertices) {
        b.lo = b.lo.cwiseMin(p);
        b.hi = b.hi.cwiseMax(p);
    }
    return b;
}

}  // namespace

PwaDynamics PwaDynamics::from_cells(const std::vector<CellSpec>& specs) {
    if (specs.empty()) throw EmptyPartition("PwaDynamics: no cells");
    PwaDynamics d;

    for (std::size_t i = 0; i < specs.size(); ++i) {
        const CellSpec& s = specs[i];
        Cell c;
        c.id = static_cast<int>(i);
        if (s.E.rows() > 0 && !s.vertices.empty()) {
            c.hrep = HPolytope(s.E, s.e);
            c.vrep = VPolytope(s.vertices);
        } else if (s.E.rows() > 0) {
            c.hrep = HPolytope(s.E, s.e);
            c.vrep = vertices_of(c.hrep);
        } else if (!s.vertices.empty()) {
            c.vrep = VPolytope(s.vertices);
            c.hrep = hrep_of(c.vrep);
        } else {
            throw DegenerateInput("PwaDynamics: cell with neither representation");
        }
        if (i == 0) d.dim_ = c.vrep.dim();
        if (c.vrep.dim() != d.dim_ || c.hrep.dim() != d.dim_)
            throw DimensionMismatch("PwaDynamics: mixed cell dimensions");
        if (s.A.rows() != d.dim_ || s.A.cols() != d.dim_ || s.a.size() != d.dim_)
            throw DimensionMismatch("PwaDynamics: affine map has wrong shape");
        c.A = s.A;
        c.a = s.a;
        // Cross-check the two representations: vertices inside the facet
        // system, every facet supported by at least n vertices.
        for (const Point& v : c.vrep.vertices)
            if (!contains(c.hrep, v, kFacetTightTol))
                throw InvalidPartition("PwaDynamics: vertex outside facet system");
        for (int r = 0; r < c.hrep.num_rows(); ++r) {
            int tight = 0;
            for (const Point& v : c.vrep.vertices)
                if (std::abs(c.hrep.E.row(r).dot(v) + c.hrep.e[r]) <= kFacetTightTol) ++tight;
            if (tight < d.dim_)
                throw InvalidPartition("PwaDynamics: facet not supported by vertices");
        }
        d.cells_.push_back(std::move(c));
    }

    VertexPoolBuilder pool_builder(d.dim_);
    for (Cell& c : d.cells_) {
        c.vertex_ids.clear();
        for (const Point& v : c.vrep.vertices)
            c.vertex_ids.push_back(pool_builder.intern(v, d.pool_));
    }
    d.owners_.assign(d.pool_.size(), {});
    for (const Cell& c : d.cells_)
        for (int vid : c.vertex_ids) d.owners_[vid].push_back(c.id);
    for (auto& o : d.owners_) std::sort(o.begin(), o.end());
    return d;
}

bool PwaDynamics::origin_is_vertex_where_contained() const {
    Point zero = Point::Zero(dim_);
    for (const Cell& c : cells_) {
        if (!contains(c.hrep, zero, kGeomTol)) continue;
        bool vertex = false;
        for (const Point& v : c.vrep.vertices)
            if (v.lpNorm<Eigen::Infinity>() <= kVertexMergeTol) vertex = true;
        if (!vertex) return false;
    }
    return true;
}

std::vector<ContinuityViolation> check_continuity(const PwaDynamics& d, double tol) {
    std::vector<ContinuityViolation> out;
    const auto& pool = d.vertex_pool();
    for (std::size_t vid = 0; vid < pool.size(); ++vid) {
        const auto& own = d.owners()[vid];
        for (std::size_t a = 0; a < own.size(); ++a) {
            const Cell& ci = d.cell(own[a]);
            Vec fi = ci.A * pool[vid] + ci.a;
            for (std::size_t b = a + 1; b < own.size(); ++b) {
                const Cell& cj = d.cell(own[b]);
                double gap = (fi - (cj.A * pool[vid] + cj.a)).lpNorm<Eigen::Infinity>();
                if (gap > tol)
                    out.push_back({own[a], own[b], static_cast<int>(vid), gap});
            }
        }
    }
    return out;
}

int locate_cell(const PwaDynamics& d, const Point& x, double tol, int hint) {
    if (x.size() != d.dim()) throw DimensionMismatch("locate_cell: dimension mismatch");
    if (hint >= 0 && hint < d.num_cells() && contains(d.cell(hint).hrep, x, tol)) {
        // The hint may not be the first-by-id owner; scan below it.
        for (int i = 0; i < hint; ++i)
            if (contains(d.cell(i).hrep, x, tol)) return i;
        return hint;
    }
    for (int i = 0; i < d.num_cells(); ++i)
        if (contains(d.cell(i).hrep, x, tol)) return i;
    return -1;
}

Vec evaluate_dynamics(const PwaDynamics& d, const Point& x, double tol) {
    int id = locate_cell(d, x, tol);
    if (id < 0) throw OutOfDomain("evaluate_dynamics: point outside the partition");
    const Cell& c = d.cell(id);
    return c.A * x + c.a;
}

FacetScan scan_facets(const PwaDynamics& d) {
    FacetScan scan;
    std::map<std::vector<int>, std::vector<int>> by_key;  // facet key -> facet indices
    for (const Cell& c : d.cells()) {
        for (int r = 0; r < c.hrep.num_rows(); ++r) {
            FacetRecord rec;
            rec.cell = c.id;
            rec.row = r;
            for (std::size_t k = 0; k < c.vrep.vertices.size(); ++k)
                if (std::abs(c.hrep.E.row(r).dot(c.vrep.vertices[k]) + c.hrep.e[r]) <=
                    kFacetTightTol)
                    rec.vertex_ids.push_back(c.vertex_ids[k]);
            std::sort(rec.vertex_ids.begin(), rec.vertex_ids.end());
            by_key[rec.vertex_ids].push_back(static_cast<int>(scan.facets.size()));
            scan.facets.push_back(std::move(rec));
        }
    }

    std::vector<BBox> boxes;
    boxes.reserve(d.num_cells());
    for (const Cell& c : d.cells()) boxes.push_back(bbox_of(c.vrep));

    const auto& pool = d.vertex_pool();
    for (const auto& [key, idxs] : by_key) {
        if (idxs.size() == 2) continue;  // matched interior facet
        if (idxs.size() > 2) {
            std::ostringstream os;
            os << "facet shared by " << idxs.size() << " cells (overlap)";
            scan.violations.push_back(os.str());
            continue;
        }
        FacetRecord& rec = scan.facets[idxs[0]];
        Point centroid = Point::Zero(d.dim());
        for (int vid : rec.vertex_ids) centroid += pool[vid];
        centroid /= static_cast<double>(rec.vertex_ids.size());
        bool covered = false;
        for (const Cell& other : d.cells()) {
            if (other.id == rec.cell) continue;
            if (!boxes[other.id].holds(centroid, kGeomTol)) continue;
            if (contains(other.hrep, centroid, kGeomTol)) {
                covered = true;
                break;
            }
        }
        if (covered) {
            std::ostringstream os;
            os << "hanging facet of cell " << rec.cell << " (row " << rec.row
               << "): unmatched but covered by a neighbor";
            scan.violations.push_back(os.str());
        } else {
            rec.boundary = true;
        }
    }
    return scan;
}

IndexSets build_index_sets(const PwaDynamics& d) {
    FacetScan scan = scan_facets(d);
    if (!scan.violations.empty())
        throw InvalidPartition("build_index_sets: " + scan.violations.front());

    IndexSets idx;
    for (const FacetRecord& f : scan.facets) {
        if (!f.boundary) continue;
        idx.boundary_cells.insert(f.cell);
        for (int vid : f.vertex_ids) idx.boundary_vertices.insert(vid);
    }
    for (const Cell& c : d.cells()) {
        for (int vid : c.vertex_ids) {
            // Eq. 9 restricts I_b to boundary cells; a boundary-touching
            // vertex of an interior cell therefore lands in I_int.
            if (idx.boundary_cells.count(c.id) && idx.boundary_vertices.count(vid))
                idx.boundary_pairs.insert({c.id, vid});
            else
                idx.interior_pairs.insert({c.id, vid});
        }
    }
    return idx;
}

double total_volume(const PwaDynamics& d) {
    double v = 0.0;
    for (const Cell& c : d.cells()) v += volume(c.vrep);
    return v;
}

Point sample_in_cell(const Cell& c, std::mt19937_64& rng) {
    BBox b = bbox_of(c.vrep);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = static_cast<int>(b.lo.size());
    for (int attempt = 0; attempt < 100000; ++attempt) {
        Point p(n);
        for (int i = 0; i < n; ++i) p[i] = b.lo[i] + unif(rng) * (b.hi[i] - b.lo[i]);
        if (contains(c.hrep, p, -1e-12)) return p;
    }
    throw SamplingFailure("sample_in_cell: rejection sampling failed");
}

}  // namespace pwabf
