#pragma once

#include <cmath>
#include <random>

#include "pwabf/barrier.hpp"
#include "pwabf/pwa.hpp"

namespace pwabf::fixtures {

/// [-1,1]^2 split into four triangles by the diagonals, with the linear
/// field xdot = s * x on every cell. Cell order: top, right, bottom, left.
inline PwaDynamics square_four_triangles(double s) {
    auto pt = [](double x, double y) {
        Point p(2);
        p << x, y;
        return p;
    };
    Mat A = s * Mat::Identity(2, 2);
    Vec a = Vec::Zero(2);
    Point c = pt(0, 0);
    Point tl = pt(-1, 1), tr = pt(1, 1), br = pt(1, -1), bl = pt(-1, -1);
    std::vector<CellSpec> specs;
    for (const auto& tri : {std::vector<Point>{tl, tr, c}, {tr, br, c},
                            {bl, br, c}, {tl, bl, c}}) {
        CellSpec spec;
        spec.vertices = tri;
        spec.A = A;
        spec.a = a;
        specs.push_back(std::move(spec));
    }
    return PwaDynamics::from_cells(specs);
}

/// Hand witness for the contracting square fixture: h = 1 - 2*max|x_i| is
/// piecewise affine on the four triangles.
inline BarrierCandidate square_witness() {
    BarrierCandidate b;
    auto add = [&](double px, double py) {
        Vec p(2);
        p << px, py;
        b.p.push_back(p);
        b.q.push_back(1.0);
    };
    add(0, -2);  // top:    h = 1 - 2*x2
    add(-2, 0);  // right:  h = 1 - 2*x1
    add(0, 2);   // bottom: h = 1 + 2*x2
    add(2, 0);   // left:   h = 1 + 2*x1
    return b;
}

/// Pendulum stand-in: xdot1 = x2, xdot2 = sin_pwl(x1) - sat(3x1+3x2, 1.5)
/// on |x|_inf <= pi. The four-piece sine approximation interpolates sin at
/// multiples of pi/2; the feedback is applied stabilizing. Cells are the
/// sign regions of the breakline arrangement, so the map is continuous and
/// the origin is a partition vertex.
inline PwaDynamics pendulum_analogue() {
    const double pi = M_PI;
    // Breaklines g(x) = n.x + d = 0.
    struct Line {
        Vec n;
        double d;
    };
    std::vector<Line> lines;
    auto add_line = [&](double nx, double ny, double d) {
        Vec n(2);
        n << nx, ny;
        lines.push_back({n, d});
    };
    add_line(1, 0, pi / 2);   // x1 = -pi/2
    add_line(1, 0, 0);        // x1 = 0
    add_line(1, 0, -pi / 2);  // x1 = +pi/2
    add_line(0, 1, 0);        // x2 = 0
    add_line(1, 1, 0.5);      // 3x1+3x2 = -1.5
    add_line(1, 1, -0.5);     // 3x1+3x2 = +1.5

    auto sin_pwl = [&](double x1, double& slope, double& offset) {
        if (x1 <= -pi / 2) {
            slope = -2.0 / pi;
            offset = -2.0;
        } else if (x1 <= pi / 2) {
            slope = 2.0 / pi;
            offset = 0.0;
        } else {
            slope = -2.0 / pi;
            offset = 2.0;
        }
    };

    std::vector<CellSpec> specs;
    const int nl = static_cast<int>(lines.size());
    for (int mask = 0; mask < (1 << nl); ++mask) {
        Mat E(4 + nl, 2);
        Vec e(4 + nl);
        E.topRows(2) = Mat::Identity(2, 2);
        E.middleRows(2, 2) = -Mat::Identity(2, 2);
        e.head(4).setConstant(pi);
        for (int l = 0; l < nl; ++l) {
            double sgn = (mask >> l) & 1 ? 1.0 : -1.0;
            E.row(4 + l) = sgn * lines[l].n.transpose();
            e[4 + l] = sgn * lines[l].d;
        }
        HPolytope raw(E, e);
        ChebyshevResult cheb = chebyshev_center(raw);
        if (cheb.radius < 1e-6) continue;

        VPolytope vrep = vertices_of(raw);
        HPolytope clean = hrep_of(vrep);
        CellSpec spec;
        spec.vertices = vrep.vertices;
        spec.E = clean.E;
        spec.e = clean.e;

        double slope, offset;
        sin_pwl(cheb.center[0], slope, offset);
        double u = 3.0 * (cheb.center[0] + cheb.center[1]);
        spec.A = Mat::Zero(2, 2);
        spec.a = Vec::Zero(2);
        spec.A(0, 1) = 1.0;
        spec.A(1, 0) = slope;
        spec.a[1] = offset;
        if (u < -1.5) {
            spec.a[1] -= -1.5;  // saturated low: subtract constant input
        } else if (u > 1.5) {
            spec.a[1] -= 1.5;
        } else {
            spec.A(1, 0) -= 3.0;
            spec.A(1, 1) -= 3.0;
        }
        specs.push_back(std::move(spec));
    }
    return PwaDynamics::from_cells(specs);
}

/// Continuous random PWA system: Delaunay triangulation of random points
/// (plus the box corners and the origin) with a random field value per
/// vertex, interpolated affinely on each triangle.
inline PwaDynamics random_continuous_system(std::mt19937_64& rng, int n_interior) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto pt = [](double x, double y) {
        Point p(2);
        p << x, y;
        return p;
    };
    std::vector<Point> pts = {pt(-1, -1), pt(1, -1), pt(-1, 1), pt(1, 1), pt(0, 0)};
    while (static_cast<int>(pts.size()) < n_interior + 5) {
        Point cand = pt(unif(rng), unif(rng));
        bool close = false;
        for (const Point& p : pts)
            if ((p - cand).lpNorm<Eigen::Infinity>() < 0.08) close = true;
        if (!close) pts.push_back(cand);
    }
    std::vector<Vec> values(pts.size());
    for (auto& v : values) {
        v = Vec(2);
        v << unif(rng), unif(rng);
    }
    std::vector<CellSpec> specs;
    for (const auto& tri : delaunay_indices(pts)) {
        Mat lhs(3, 3);
        Mat rhs(3, 2);
        for (int i = 0; i < 3; ++i) {
            lhs.row(i) << pts[tri[i]][0], pts[tri[i]][1], 1.0;
            rhs.row(i) = values[tri[i]].transpose();
        }
        Mat sol = lhs.fullPivLu().solve(rhs);  // rows: A columns then offset
        CellSpec spec;
        spec.vertices = {pts[tri[0]], pts[tri[1]], pts[tri[2]]};
        spec.A = sol.topRows(2).transpose();
        spec.a = sol.row(2).transpose();
        specs.push_back(std::move(spec));
    }
    return PwaDynamics::from_cells(specs);
}

}  // namespace pwabf::fixtures
