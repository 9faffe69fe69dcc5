#include "pwabf/refine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pwabf {

namespace {

constexpr double kZeroFieldTol = 1e-12;

double angle_between(const Vec& u, const Vec& v) {
    double nu = u.norm(), nv = v.norm();
    if (nu < kZeroFieldTol || nv < kZeroFieldTol) return M_PI;
    Vec a = u / nu, b = v / nv;
    return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

Vec field_at(const Cell& c, const Point& x) { return c.A * x + c.a; }

int pool_id_of(const Cell& c, const Point& p) {
    for (std::size_t k = 0; k < c.vrep.vertices.size(); ++k)
        if ((c.vrep.vertices[k] - p).lpNorm<Eigen::Infinity>() <= kVertexMergeTol)
            return c.vertex_ids[k];
    return -1;
}

std::vector<CellSpec> split_cell(const Cell& cell, const std::vector<Point>& new_pts) {
    std::vector<Point> pts = cell.vrep.vertices;
    for (const Point& p : new_pts) pts.push_back(p);
    std::vector<Simplex> simplices = delaunay(pts);
    double parent_vol = volume(cell.vrep);
    double sum = 0.0;
    std::vector<CellSpec> out;
    for (const Simplex& s : simplices) {
        double vol = s.volume();
        if (vol < 1e-12)
            throw DegenerateSubcell("refine: simplex volume below 1e-12");
        sum += vol;
        CellSpec spec;
        spec.vertices = s.vertices;
        spec.A = cell.A;
        spec.a = cell.a;
        out.push_back(std::move(spec));
    }
    if (std::abs(sum - parent_vol) > 1e-9 * std::max(1.0, parent_vol))
        throw DegenerateSubcell("refine: subcell volumes do not add up to the parent");
    return out;
}

}  // namespace

double field_variation(const Edge& e, const PwaDynamics& d) {
    if (e.owner < 0 || e.owner >= d.num_cells())
        throw DegenerateInput("field_variation: edge has no owner cell");
    const Cell& c = d.cell(e.owner);
    return angle_between(field_at(c, e.a), field_at(c, e.b));
}

Point bisector_point(const Edge& e, const PwaDynamics& d, double tol,
                     bool* midpoint_fallback) {
    const Cell& c = d.cell(e.owner);
    Vec fa = field_at(c, e.a);
    Vec fb = field_at(c, e.b);
    if (midpoint_fallback) *midpoint_fallback = false;
    if (angle_between(fa, fb) <= tol)
        throw DegenerateInput("bisector_point: field variation below tolerance");

    auto gap = [&](double t) {
        Point x = e.a + t * (e.b - e.a);
        Vec f = field_at(c, x);
        return angle_between(f, fa) - angle_between(f, fb);
    };
    double lo = 1e-9, hi = 1.0 - 1e-9;
    double glo = gap(lo), ghi = gap(hi);
    if (glo == 0.0) return e.a + lo * (e.b - e.a);
    if (ghi == 0.0) return e.a + hi * (e.b - e.a);
    if (glo * ghi > 0.0) {
        if (midpoint_fallback) *midpoint_fallback = true;
        return 0.5 * (e.a + e.b);
    }
    double t = 0.5;
    for (int it = 0; it < 100; ++it) {
        t = 0.5 * (lo + hi);
        double g = gap(t);
        if (std::abs(g) <= tol || hi - lo <= 1e-14) break;
        if ((g < 0.0) == (glo < 0.0))
            lo = t;
        else
            hi = t;
    }
    // Keep the split point clear of the endpoints.
    if (t < 0.01 || t > 0.99) {
        if (midpoint_fallback) *midpoint_fallback = true;
        t = 0.5;
    }
    return e.a + t * (e.b - e.a);
}

std::vector<CellSpec> refine_cell(const Cell& cell, const Point& new_vertex) {
    if (!contains(cell.hrep, new_vertex, kGeomTol))
        throw DegenerateInput("refine_cell: new vertex outside the cell");
    bool on_boundary = false;
    for (int r = 0; r < cell.hrep.num_rows(); ++r)
        if (std::abs(cell.hrep.E.row(r).dot(new_vertex) + cell.hrep.e[r]) <= 1e-7)
            on_boundary = true;
    if (!on_boundary)
        throw DegenerateInput("refine_cell: new vertex not on the cell boundary");
    for (const Point& v : cell.vrep.vertices)
        if ((v - new_vertex).lpNorm<Eigen::Infinity>() <= kVertexMergeTol)
            throw DegenerateInput("refine_cell: new vertex coincides with an existing one");
    return split_cell(cell, {new_vertex});
}

PwaDynamics refine_partition(const PwaDynamics& d, const std::set<int>& flagged,
                             std::vector<RefinementPlan>* plans_out) {
    if (flagged.empty()) throw DegenerateInput("refine_partition: nothing flagged");

    std::vector<RefinementPlan> plans;
    for (int id : flagged) {
        const Cell& c = d.cell(id);
        std::vector<Edge> edges = edges_of(c.vrep);
        for (Edge& e : edges) e.owner = id;

        RefinementPlan plan;
        plan.target = id;
        double best_var = -1.0;
        std::pair<int, int> best_key{-1, -1};
        for (const Edge& e : edges) {
            double var = field_variation(e, d);
            int ia = pool_id_of(c, e.a), ib = pool_id_of(c, e.b);
            std::pair<int, int> key{std::min(ia, ib), std::max(ia, ib)};
            if (var > best_var + 1e-12 ||
                (std::abs(var - best_var) <= 1e-12 && key < best_key)) {
                best_var = var;
                best_key = key;
                plan.edge = e;
            }
        }
        if (best_var > 1e-9) {
            plan.new_vertex =
                bisector_point(plan.edge, d, 1e-9, &plan.midpoint_fallback);
        } else {
            plan.new_vertex = 0.5 * (plan.edge.a + plan.edge.b);
            plan.midpoint_fallback = true;
        }
        for (const Cell& other : d.cells())
            if (other.id != id && contains(other.hrep, plan.new_vertex, kGeomTol))
                plan.neighbors.push_back(other.id);
        plans.push_back(std::move(plan));
    }

    std::map<int, std::vector<Point>> new_points;
    auto push_unique = [](std::vector<Point>& pts, const Point& p) {
        for (const Point& q : pts)
            if ((p - q).lpNorm<Eigen::Infinity>() <= kVertexMergeTol) return;
        pts.push_back(p);
    };
    for (const RefinementPlan& plan : plans) {
        push_unique(new_points[plan.target], plan.new_vertex);
        for (int nb : plan.neighbors) push_unique(new_points[nb], plan.new_vertex);
    }

    std::vector<CellSpec> specs;
    for (const Cell& c : d.cells()) {
        auto it = new_points.find(c.id);
        if (it == new_points.end()) {
            CellSpec spec;
            spec.E = c.hrep.E;
            spec.e = c.hrep.e;
            spec.vertices = c.vrep.vertices;
            spec.A = c.A;
            spec.a = c.a;
            specs.push_back(std::move(spec));
        } else {
            for (CellSpec& sub : split_cell(c, it->second)) specs.push_back(std::move(sub));
        }
    }
    PwaDynamics refined = PwaDynamics::from_cells(specs);
    if (refined.num_cells() <= d.num_cells())
        throw InvalidPartition("refine_partition: cell count did not increase");
    FacetScan scan = scan_facets(refined);
    if (!scan.violations.empty())
        throw InvalidPartition("refine_partition: refinement broke conformity: " +
                               scan.violations.front());
    if (plans_out) *plans_out = std::move(plans);
    return refined;
}

}  // namespace pwabf
