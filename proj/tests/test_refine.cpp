#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "pwabf/refine.hpp"

using namespace pwabf;

namespace {

Point pt(double x, double y) {
    Point p(2);
    p << x, y;
    return p;
}

/// One cell whose affine field takes prescribed values at two points.
PwaDynamics field_on_triangle(const Vec& f00, const Vec& f10) {
    CellSpec s;
    s.vertices = {pt(0, 0), pt(1, 0), pt(0, 1)};
    s.A = Mat::Zero(2, 2);
    s.A.col(0) = f10 - f00;  // value varies along x1 only
    s.a = f00;
    return PwaDynamics::from_cells({s});
}

Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

}  // namespace

TEST_CASE("field_variation: right angle, aligned, opposed, stationary") {
    Edge e{pt(0, 0), pt(1, 0), 0};
    CHECK(field_variation(e, field_on_triangle(vec2(0, 1), vec2(1, 0))) ==
          doctest::Approx(M_PI / 2));
    CHECK(field_variation(e, field_on_triangle(vec2(1, 1), vec2(1, 1))) ==
          doctest::Approx(0.0));
    CHECK(field_variation(e, field_on_triangle(vec2(1, 0), vec2(-1, 0))) ==
          doctest::Approx(M_PI));
    CHECK(field_variation(e, field_on_triangle(vec2(0, 0), vec2(1, 0))) ==
          doctest::Approx(M_PI));
}

TEST_CASE("bisector_point: symmetric fields meet in the middle") {
    PwaDynamics d = field_on_triangle(vec2(0, 1), vec2(1, 0));
    Edge e{pt(0, 0), pt(1, 0), 0};
    Point star = bisector_point(e, d);
    CHECK(star[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(star[1] == doctest::Approx(0.0));
}

TEST_CASE("bisector_point: matches a dense grid scan") {
    PwaDynamics d = field_on_triangle(vec2(0, 1), vec2(2, 0));
    Edge e{pt(0, 0), pt(1, 0), 0};
    Point star = bisector_point(e, d);

    // Dense scan of the angle-difference zero crossing.
    const Cell& c = d.cell(0);
    auto angle = [](const Vec& u, const Vec& v) {
        Vec a = u / u.norm(), b = v / v.norm();
        return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
    };
    Vec fa = c.A * e.a + c.a, fb = c.A * e.b + c.a;
    double best_t = 0.0, best_gap = 1e100;
    for (int i = 1; i < 10000; ++i) {
        double t = i / 10000.0;
        Point x = e.a + t * (e.b - e.a);
        Vec f = c.A * x + c.a;
        double g = std::abs(angle(f, fa) - angle(f, fb));
        if (g < best_gap) {
            best_gap = g;
            best_t = t;
        }
    }
    CHECK(star[0] == doctest::Approx(best_t).epsilon(1e-4));
}

TEST_CASE("bisector_point: zero variation violates the precondition") {
    PwaDynamics d = field_on_triangle(vec2(1, 0), vec2(1, 0));
    Edge e{pt(0, 0), pt(1, 0), 0};
    CHECK_THROWS_AS(bisector_point(e, d), DegenerateInput);
}

TEST_CASE("refine_cell: triangle splits in two at an edge midpoint") {
    PwaDynamics d = field_on_triangle(vec2(0, 1), vec2(1, 0));
    auto subs = refine_cell(d.cell(0), pt(0.5, 0.0));
    CHECK(subs.size() == 2);
    double vol = 0.0;
    for (const auto& s : subs) vol += volume(VPolytope(s.vertices));
    CHECK(vol == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("refine_cell: square with an edge midpoint follows the Delaunay oracle") {
    CellSpec sq;
    sq.vertices = {pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 1)};
    sq.A = -Mat::Identity(2, 2);
    sq.a = Vec::Zero(2);
    PwaDynamics d = PwaDynamics::from_cells({sq});
    Point mid = pt(0.5, 0.0);
    auto expected = delaunay({pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 1), mid});
    auto subs = refine_cell(d.cell(0), mid);
    CHECK(subs.size() == expected.size());
    CHECK(subs.size() == 3);
}

TEST_CASE("refine_cell: dynamics inherited exactly") {
    PwaDynamics d = field_on_triangle(vec2(0.3, 1), vec2(1, -0.2));
    auto subs = refine_cell(d.cell(0), pt(0.5, 0.0));
    PwaDynamics refined = PwaDynamics::from_cells(subs);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        double a = unif(rng), b = unif(rng);
        if (a + b > 1.0) {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        Point x = pt(a, b);
        CHECK((evaluate_dynamics(d, x) - evaluate_dynamics(refined, x))
                  .lpNorm<Eigen::Infinity>() <= 1e-12);
    }
}

TEST_CASE("refine_cell: precondition failures") {
    PwaDynamics d = field_on_triangle(vec2(0, 1), vec2(1, 0));
    CHECK_THROWS_AS(refine_cell(d.cell(0), pt(0.25, 0.25)), DegenerateInput);  // interior
    CHECK_THROWS_AS(refine_cell(d.cell(0), pt(0, 0)), DegenerateInput);  // existing
}

TEST_CASE("refine_partition: conformity, volume, dynamics, growth") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    std::vector<RefinementPlan> plans;
    PwaDynamics r = refine_partition(d, {0}, &plans);

    REQUIRE(plans.size() == 1);
    CHECK(plans[0].target == 0);
    CHECK(r.num_cells() > d.num_cells());
    CHECK(scan_facets(r).violations.empty());
    CHECK(total_volume(r) == doctest::Approx(total_volume(d)).epsilon(1e-9));

    // Conformity-count oracle: original count minus touched cells plus
    // their split sizes.
    std::set<int> touched = {plans[0].target};
    for (int nb : plans[0].neighbors) touched.insert(nb);
    int expected = d.num_cells() - static_cast<int>(touched.size());
    for (int id : touched)
        expected += static_cast<int>(
            delaunay_indices([&] {
                std::vector<Point> pts = d.cell(id).vrep.vertices;
                pts.push_back(plans[0].new_vertex);
                return pts;
            }()).size());
    CHECK(r.num_cells() == expected);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        Point x = pt(unif(rng), unif(rng));
        CHECK((evaluate_dynamics(d, x) - evaluate_dynamics(r, x))
                  .lpNorm<Eigen::Infinity>() <= 1e-12);
    }

    // Refinement in the partition sense: every new cell is inside exactly
    // one old cell.
    for (const Cell& nc : r.cells()) {
        Point inner = Point::Zero(2);
        for (const Point& v : nc.vrep.vertices) inner += v;
        inner /= static_cast<double>(nc.vrep.vertices.size());
        int owners = 0;
        for (const Cell& oc : d.cells())
            if (contains(oc.hrep, inner, -1e-9)) ++owners;
        CHECK(owners == 1);
    }
}

TEST_CASE("refine_partition: flagging every cell of a two-cell partition") {
    CellSpec left, right;
    left.vertices = {pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 1)};
    right.vertices = {pt(1, 0), pt(2, 0), pt(1, 1), pt(2, 1)};
    left.A = right.A = -Mat::Identity(2, 2);
    left.a = right.a = Vec::Zero(2);
    PwaDynamics d = PwaDynamics::from_cells({left, right});
    PwaDynamics r = refine_partition(d, {0, 1});
    CHECK(r.num_cells() >= 4);
    CHECK(scan_facets(r).violations.empty());
    CHECK(total_volume(r) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("refine_partition: empty flag set rejected") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    CHECK_THROWS_AS(refine_partition(d, {}), DegenerateInput);
}
