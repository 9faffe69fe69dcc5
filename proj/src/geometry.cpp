#include "pwabf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "pwabf/lp.hpp"

namespace pwabf {

namespace {

bool lex_less(const Point& a, const Point& b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

double coordinate_scale(const std::vector<Point>& pts) {
    double s = 1.0;
    for (const Point& p : pts) s = std::max(s, p.lpNorm<Eigen::Infinity>());
    return s;
}

int affine_rank(const std::vector<Point>& pts, double tol) {
    if (pts.size() < 2) return 0;
    Mat d(pts.size() - 1, pts[0].size());
    for (std::size_t i = 1; i < pts.size(); ++i) d.row(i - 1) = (pts[i] - pts[0]).transpose();
    Eigen::JacobiSVD<Mat> svd(d);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > tol) ++r;
    return r;
}

// Extreme points of a 2-D point set by monotone chain; higher dimensions
// fall back to a convex-combination feasibility LP per point.
std::vector<int> extreme_point_indices(const std::vector<Point>& pts) {
    const int n = static_cast<int>(pts[0].size());
    const int m = static_cast<int>(pts.size());
    if (n == 1) {
        int lo = 0, hi = 0;
        for (int i = 1; i < m; ++i) {
            if (pts[i][0] < pts[lo][0]) lo = i;
            if (pts[i][0] > pts[hi][0]) hi = i;
        }
        if (lo == hi) return {lo};
        return {lo, hi};
    }
    if (n == 2) {
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return lex_less(pts[a], pts[b]); });
        auto cross = [&](int o, int a, int b) {
            return (pts[a][0] - pts[o][0]) * (pts[b][1] - pts[o][1]) -
                   (pts[a][1] - pts[o][1]) * (pts[b][0] - pts[o][0]);
        };
        const double turn_tol = 1e-12 * coordinate_scale(pts) * coordinate_scale(pts);
        std::vector<int> hull;
        for (int pass = 0; pass < 2; ++pass) {
            std::size_t base = hull.size();
            for (int idx : order) {
                while (hull.size() >= base + 2 &&
                       cross(hull[hull.size() - 2], hull[hull.size() - 1], idx) <= turn_tol)
                    hull.pop_back();
                hull.push_back(idx);
            }
            hull.pop_back();
            std::reverse(order.begin(), order.end());
        }
        return hull;
    }
    // p_i is redundant iff it is a convex combination of the others;
    // phase-1 LP on the combination residual decides membership.
    const double scale = coordinate_scale(pts);
    std::vector<int> keep;
    for (int i = 0; i < m; ++i) {
        lp::Model lpm;
        std::vector<int> lambda;
        for (int j = 0; j < m; ++j)
            if (j != i) lambda.push_back(lpm.add_var(0.0, true));
        std::vector<int> sp(n + 1), sm(n + 1);
        for (int r = 0; r <= n; ++r) {
            sp[r] = lpm.add_var(1.0, true);
            sm[r] = lpm.add_var(1.0, true);
        }
        for (int r = 0; r <= n; ++r) {
            int row = lpm.add_row(lp::Sense::Equal, r < n ? pts[i][r] : 1.0);
            int col = 0;
            for (int j = 0; j < m; ++j) {
                if (j == i) continue;
                lpm.add_term(row, lambda[col++], r < n ? pts[j][r] : 1.0);
            }
            lpm.add_term(row, sp[r], 1.0);
            lpm.add_term(row, sm[r], -1.0);
        }
        lp::Solution sol = lp::solve(lpm);
        bool inside = sol.optimal() && sol.objective <= kGeomTol * scale;
        if (!inside) keep.push_back(i);
    }
    return keep;
}

}  // namespace

HPolytope::HPolytope(Mat E_in, Vec e_in) : E(std::move(E_in)), e(std::move(e_in)) {
    if (E.rows() != e.size())
        throw DimensionMismatch("HPolytope: row count of E must match length of e");
    for (int r = 0; r < E.rows(); ++r) {
        double nrm = E.row(r).norm();
        if (nrm < 1e-14) throw DegenerateInput("HPolytope: zero facet normal");
        E.row(r) /= nrm;
        e[r] /= nrm;
    }
}

VPolytope::VPolytope(std::vector<Point> pts) {
    if (pts.empty()) throw DegenerateInput("VPolytope: empty vertex list");
    const int n = static_cast<int>(pts[0].size());
    for (const Point& p : pts) {
        if (p.size() != n) throw DimensionMismatch("VPolytope: mixed dimensions");
        if (!p.allFinite()) throw DegenerateInput("VPolytope: nonfinite coordinate");
    }
    // Drop duplicates before the extreme-point filter.
    std::vector<Point> uniq;
    for (const Point& p : pts) {
        bool dup = false;
        for (const Point& q : uniq)
            if ((p - q).lpNorm<Eigen::Infinity>() <= kVertexMergeTol) {
                dup = true;
                break;
            }
        if (!dup) uniq.push_back(p);
    }
    std::vector<int> keep = extreme_point_indices(uniq);
    for (int i : keep) vertices.push_back(uniq[i]);
    std::sort(vertices.begin(), vertices.end(), lex_less);
}

double Simplex::volume() const {
    const int n = dim();
    if (static_cast<int>(vertices.size()) != n + 1)
        throw DegenerateInput("Simplex: needs n+1 vertices");
    Mat d(n, n);
    for (int i = 0; i < n; ++i) d.col(i) = vertices[i + 1] - vertices[0];
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    return std::abs(d.determinant()) / fact;
}

bool contains(const HPolytope& h, const Point& x, double tol) {
    if (x.size() != h.dim()) throw DimensionMismatch("contains: point dimension mismatch");
    return ((h.E * x + h.e).array() >= -tol).all();
}

ChebyshevResult chebyshev_center(const HPolytope& h) {
    const int n = h.dim();
    lp::Model m;
    std::vector<int> xs(n);
    for (int j = 0; j < n; ++j) xs[j] = m.add_var(0.0, false);
    int r = m.add_var(-1.0, false);  // maximize radius
    for (int row = 0; row < h.num_rows(); ++row) {
        int lr = m.add_row(lp::Sense::GreaterEq, -h.e[row]);
        for (int j = 0; j < n; ++j) m.add_term(lr, xs[j], h.E(row, j));
        m.add_term(lr, r, -1.0);  // unit-norm rows: distance slack is r itself
    }
    // Keep the LP bounded even for thin or empty regions.
    double bound = 1.0 + h.e.lpNorm<Eigen::Infinity>() * 10.0;
    int rbound = m.add_row(lp::Sense::LessEq, bound);
    m.add_term(rbound, r, 1.0);
    lp::Solution sol = lp::solve(m);
    ChebyshevResult out;
    if (!sol.optimal()) throw SolverFailure("chebyshev_center: LP did not solve");
    out.center = sol.x.head(n);
    out.radius = sol.x[n];
    return out;
}

namespace {

void check_bounded(const HPolytope& h) {
    const int n = h.dim();
    Eigen::JacobiSVD<Mat> svd(h.E);
    if (svd.singularValues().size() < n || svd.singularValues()[n - 1] < 1e-9)
        throw UnboundedPolytope("vertices_of: facet normals do not span the space");
    // Recession direction search: max sum(E d) over E d >= 0, |d| <= 1.
    lp::Model m;
    std::vector<int> ds(n);
    Vec colsum = h.E.colwise().sum();
    for (int j = 0; j < n; ++j) ds[j] = m.add_var(-colsum[j], false);
    for (int r = 0; r < h.num_rows(); ++r) {
        int row = m.add_row(lp::Sense::GreaterEq, 0.0);
        for (int j = 0; j < n; ++j) m.add_term(row, ds[j], h.E(r, j));
    }
    for (int j = 0; j < n; ++j) {
        int up = m.add_row(lp::Sense::LessEq, 1.0);
        m.add_term(up, ds[j], 1.0);
        int lo = m.add_row(lp::Sense::GreaterEq, -1.0);
        m.add_term(lo, ds[j], 1.0);
    }
    lp::Solution sol = lp::solve(m);
    if (!sol.optimal()) throw SolverFailure("vertices_of: recession LP did not solve");
    if (-sol.objective > 1e-7)
        throw UnboundedPolytope("vertices_of: recession direction exists");
}

void subsets_rec(int from, int k, int m, std::vector<int>& cur,
                 const std::function<void(const std::vector<int>&)>& fn) {
    if (k == 0) {
        fn(cur);
        return;
    }
    for (int i = from; i <= m - k; ++i) {
        cur.push_back(i);
        subsets_rec(i + 1, k - 1, m, cur, fn);
        cur.pop_back();
    }
}

void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> cur;
    subsets_rec(0, k, m, cur, fn);
}

}  // namespace

VPolytope vertices_of(const HPolytope& h, double tol) {
    const int n = h.dim();
    if (h.num_rows() < n + 1)
        throw UnboundedPolytope("vertices_of: too few facets to bound the region");
    check_bounded(h);
    ChebyshevResult cheb = chebyshev_center(h);
    if (cheb.radius < -tol) throw EmptyPolytope("vertices_of: empty region");
    if (cheb.radius < 1e-9) throw DegeneratePolytope("vertices_of: not full-dimensional");

    std::vector<Point> found;
    for_each_subset(h.num_rows(), n, [&](const std::vector<int>& rows) {
        Mat A(n, n);
        Vec b(n);
        for (int i = 0; i < n; ++i) {
            A.row(i) = h.E.row(rows[i]);
            b[i] = -h.e[rows[i]];
        }
        Eigen::FullPivLU<Mat> lu(A);
        lu.setThreshold(1e-9);
        if (!lu.isInvertible()) return;
        Point x = lu.solve(b);
        if (!x.allFinite()) return;
        if (!contains(h, x, tol)) return;
        for (const Point& q : found)
            if ((x - q).lpNorm<Eigen::Infinity>() <= 10 * tol) return;
        found.push_back(x);
    });
    if (static_cast<int>(found.size()) < n + 1)
        throw DegeneratePolytope("vertices_of: fewer than n+1 vertices found");
    return VPolytope(std::move(found));
}

std::vector<std::vector<int>> delaunay_indices(const std::vector<Point>& points) {
    const int m = static_cast<int>(points.size());
    if (m == 0) throw DegenerateInput("delaunay: no points");
    const int n = static_cast<int>(points[0].size());
    if (m < n + 1) throw DegenerateInput("delaunay: need at least n+1 points");
    for (const Point& p : points)
        if (p.size() != n) throw DimensionMismatch("delaunay: mixed dimensions");
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if ((points[i] - points[j]).lpNorm<Eigen::Infinity>() <= kVertexMergeTol)
                throw DegenerateInput("delaunay: duplicate points");
    if (affine_rank(points, 1e-9) < n)
        throw DegenerateInput("delaunay: points lie on a common hyperplane");

    // Lexicographic ranks drive the symbolic tie-break below.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return lex_less(points[a], points[b]); });
    std::vector<int> rank(m);
    for (int r = 0; r < m; ++r) rank[order[r]] = r;

    const double scale = coordinate_scale(points);
    const double lift_scale = std::max(1.0, scale * scale);
    const double tie_tol = 1e-9 * lift_scale;
    Vec lift(m);
    for (int i = 0; i < m; ++i) lift[i] = points[i].squaredNorm();

    // Cospherical ties: perturb the lift by an infinitesimal hierarchy
    // eps^(rank+1). The sign of lift_j - plane(p_j) under the perturbation
    // is decided by the smallest-rank index carrying a nonzero coefficient:
    // +1 for j itself, -lambda_i for the subset points, lambda being the
    // affine coordinates of p_j in the subset.
    auto tie_above = [&](const Eigen::FullPivLU<Mat>& lu_t, const std::vector<int>& s,
                         int j) {
        Vec rhs(n + 1);
        rhs.head(n) = points[j];
        rhs[n] = 1.0;
        Vec lambda = lu_t.solve(rhs);
        int best_rank = rank[j];
        double best_coef = 1.0;
        for (int i = 0; i <= n; ++i) {
            if (std::abs(lambda[i]) <= 1e-9) continue;
            if (rank[s[i]] < best_rank) {
                best_rank = rank[s[i]];
                best_coef = -lambda[i];
            }
        }
        return best_coef > 0.0;
    };

    std::vector<std::vector<int>> cells;
    for_each_subset(m, n + 1, [&](const std::vector<int>& s) {
        Mat A(n + 1, n + 1);
        Vec b(n + 1);
        for (int i = 0; i <= n; ++i) {
            A.row(i).head(n) = points[s[i]].transpose();
            A(i, n) = 1.0;
            b[i] = lift[s[i]];
        }
        Eigen::FullPivLU<Mat> lu(A);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) return;  // degenerate projection, not a facet
        Vec ab = lu.solve(b);
        Eigen::FullPivLU<Mat> lu_t(A.transpose());
        for (int j = 0; j < m; ++j) {
            if (std::find(s.begin(), s.end(), j) != s.end()) continue;
            double above = lift[j] - (points[j].dot(ab.head(n)) + ab[n]);
            if (above > tie_tol) continue;
            if (above < -tie_tol) return;  // strictly below: not a lower facet
            if (!tie_above(lu_t, s, j)) return;
        }
        cells.push_back(s);
    });
    if (cells.empty()) throw DegenerateInput("delaunay: no full-dimensional simplices");
    return cells;
}

std::vector<Simplex> delaunay(const std::vector<Point>& points) {
    std::vector<Simplex> out;
    for (const auto& idx : delaunay_indices(points)) {
        Simplex s;
        for (int i : idx) s.vertices.push_back(points[i]);
        out.push_back(std::move(s));
    }
    return out;
}

HPolytope hrep_of(const VPolytope& v) {
    const int n = v.dim();
    const auto& pts = v.vertices;
    if (static_cast<int>(pts.size()) < n + 1 || affine_rank(pts, 1e-9) < n)
        throw DegenerateInput("hrep_of: vertices are affinely dependent");
    Point centroid = Point::Zero(n);
    for (const Point& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());

    if (n == 1) {
        Mat E(2, 1);
        Vec e(2);
        E << 1.0, -1.0;
        e << -pts.front()[0], pts.back()[0];
        return HPolytope(E, e);
    }

    // Boundary facets of the Delaunay triangulation are the hull boundary;
    // merging coplanar ones yields the irredundant facet list.
    auto cells = delaunay_indices(pts);
    std::map<std::vector<int>, int> facet_count;
    for (const auto& cell : cells) {
        for (int drop = 0; drop <= n; ++drop) {
            std::vector<int> f;
            for (int i = 0; i <= n; ++i)
                if (i != drop) f.push_back(cell[i]);
            std::sort(f.begin(), f.end());
            facet_count[f]++;
        }
    }
    std::vector<std::pair<Vec, double>> planes;  // a, b with a·x + b >= 0 inside
    const double scale = coordinate_scale(pts);
    for (const auto& [f, count] : facet_count) {
        if (count != 1) continue;
        Mat d(n - 1, n);
        for (int i = 1; i < n; ++i) d.row(i - 1) = (pts[f[i]] - pts[f[0]]).transpose();
        Eigen::JacobiSVD<Mat> svd(d, Eigen::ComputeFullV);
        Vec normal = svd.matrixV().col(n - 1);
        double offset = -normal.dot(pts[f[0]]);
        if (normal.dot(centroid) + offset < 0) {
            normal = -normal;
            offset = -offset;
        }
        bool dup = false;
        for (const auto& [a, b] : planes)
            if ((a - normal).lpNorm<Eigen::Infinity>() < 1e-7 &&
                std::abs(b - offset) < 1e-7 * scale) {
                dup = true;
                break;
            }
        if (!dup) planes.emplace_back(normal, offset);
    }
    Mat E(planes.size(), n);
    Vec e(planes.size());
    for (std::size_t r = 0; r < planes.size(); ++r) {
        E.row(r) = planes[r].first.transpose();
        e[r] = planes[r].second;
    }
    return HPolytope(E, e);
}

std::vector<Edge> edges_of(const VPolytope& v) {
    const int n = v.dim();
    const auto& pts = v.vertices;
    if (static_cast<int>(pts.size()) < n + 1)
        throw DegenerateInput("edges_of: not full-dimensional");
    if (n == 1) return {Edge{pts.front(), pts.back(), -1}};
    HPolytope h = hrep_of(v);
    std::vector<Edge> out;
    const double tight_tol = 1e-7;
    std::vector<std::vector<int>> active(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int r = 0; r < h.num_rows(); ++r)
            if (std::abs(h.E.row(r).dot(pts[i]) + h.e[r]) <= tight_tol)
                active[i].push_back(r);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            std::vector<int> common;
            std::set_intersection(active[i].begin(), active[i].end(), active[j].begin(),
                                  active[j].end(), std::back_inserter(common));
            if (static_cast<int>(common.size()) < n - 1) continue;
            Mat nm(common.size(), n);
            for (std::size_t r = 0; r < common.size(); ++r) nm.row(r) = h.E.row(common[r]);
            Eigen::JacobiSVD<Mat> svd(nm);
            int rank = 0;
            for (int k = 0; k < svd.singularValues().size(); ++k)
                if (svd.singularValues()[k] > 1e-6) ++rank;
            if (rank == n - 1) out.push_back(Edge{pts[i], pts[j], -1});
        }
    }
    return out;
}

double volume(const VPolytope& v) {
    const int n = v.dim();
    if (static_cast<int>(v.vertices.size()) == n + 1) {
        Simplex s{v.vertices};
        return s.volume();
    }
    double vol = 0.0;
    for (const Simplex& s : delaunay(v.vertices)) vol += s.volume();
    return vol;
}

std::vector<int> order_ccw(const std::vector<Point>& pts) {
    if (pts.empty() || pts[0].size() != 2)
        throw DimensionMismatch("order_ccw: 2-D points required");
    Point c = Point::Zero(2);
    for (const Point& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    std::vector<int> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::atan2(pts[a][1] - c[1], pts[a][0] - c[0]) <
               std::atan2(pts[b][1] - c[1], pts[b][0] - c[0]);
    });
    return idx;
}

}  // namespace pwabf
