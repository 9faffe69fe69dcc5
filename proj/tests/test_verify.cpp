#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pwabf/search.hpp"
#include "pwabf/verify.hpp"

using namespace pwabf;

namespace {

Point pt(double x) {
    Point p(1);
    p << x;
    return p;
}

Point pt(double x, double y) {
    Point p(2);
    p << x, y;
    return p;
}

/// 1-D cell [0,1] with xdot = s*x.
PwaDynamics interval_system(double s) {
    CellSpec c;
    c.vertices = {pt(0.0), pt(1.0)};
    c.A = Mat::Constant(1, 1, s);
    c.a = Vec::Zero(1);
    return PwaDynamics::from_cells({c});
}

BarrierCandidate interval_barrier() {
    BarrierCandidate b;
    b.p.push_back(Vec::Constant(1, -2.0));
    b.q.push_back(1.0);
    return b;
}

PwaDynamics linear_box(double s, double half) {
    CellSpec c;
    c.vertices = {pt(-half, -half), pt(half, -half), pt(-half, half), pt(half, half)};
    c.A = s * Mat::Identity(2, 2);
    c.a = Vec::Zero(2);
    return PwaDynamics::from_cells({c});
}

}  // namespace

TEST_CASE("evaluate_barrier: plain arithmetic and domain errors") {
    PwaDynamics d = linear_box(-1.0, 1.0);
    BarrierCandidate b;
    Vec p(2);
    p << -2, 0;
    b.p.push_back(p);
    b.q.push_back(1.0);
    CHECK(evaluate_barrier(b, d, pt(0.25, 0.0)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(evaluate_barrier(b, d, pt(3.0, 0.0)), OutOfDomain);
}

TEST_CASE("evaluate_barrier: shared-face values agree for continuous candidates") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    BarrierCandidate b = fixtures::square_witness();
    Point x = pt(0.5, 0.5);  // diagonal point shared by two triangles
    std::vector<double> values;
    for (const Cell& c : d.cells())
        if (contains(c.hrep, x, 1e-9)) values.push_back(b.value(c.id, x));
    REQUIRE(values.size() >= 2);
    for (double v : values) CHECK(v == doctest::Approx(values[0]).epsilon(1e-7));
}

TEST_CASE("check_certificate: hand-computed 1-D margins") {
    IndexSets idx1 = build_index_sets(interval_system(-1.0));
    CertificateReport rep = check_certificate(interval_barrier(), interval_system(-1.0),
                                              idx1, AlphaGain{1.0}, Epsilons{}, 8);
    // p(Av+a) + alpha*h is 1 at both endpoints.
    CHECK(rep.worst_nagumo_vertex == doctest::Approx(1.0));
    CHECK(rep.nagumo_vertex_ok);
    CHECK(rep.continuity_ok);
    CHECK(rep.boundary_ok);
    CHECK(rep.nagumo_sampled_ok);
    CHECK(rep.all_ok());
    CHECK(rep.violations.empty());

    PwaDynamics unstable = interval_system(1.0);
    CertificateReport bad = check_certificate(interval_barrier(), unstable,
                                              build_index_sets(unstable), AlphaGain{1.0},
                                              Epsilons{}, 8);
    CHECK(bad.worst_nagumo_vertex == doctest::Approx(-3.0));
    CHECK_FALSE(bad.nagumo_vertex_ok);
    CHECK_FALSE(bad.all_ok());
    CHECK(!bad.violations.empty());
}

TEST_CASE("check_certificate: accepts an LP-produced valid candidate") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    SynthesisResult res = synthesize(d, AlphaGain{1.0}, Epsilons{}, 60.0);
    REQUIRE(res.valid());
    CertificateReport rep = check_certificate(res.barrier, res.dynamics, res.index_sets,
                                              AlphaGain{1.0}, Epsilons{}, 64);
    CHECK(rep.all_ok());
}

TEST_CASE("simulate: linear decay matches the closed form") {
    PwaDynamics d = linear_box(-1.0, 2.0);
    Trajectory traj = simulate(d, pt(1.0, 1.0), 1.0, 1e-3);
    REQUIRE_FALSE(traj.exited);
    Point expect = std::exp(-1.0) * pt(1.0, 1.0);
    CHECK((traj.states.back() - expect).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("simulate: fourth-order convergence on the smooth fixture") {
    PwaDynamics d = linear_box(-1.0, 2.0);
    auto err = [&](double dt) {
        Trajectory t = simulate(d, pt(1.0, 1.0), 1.0, dt);
        return (t.states.back() - std::exp(-1.0) * pt(1.0, 1.0)).lpNorm<Eigen::Infinity>();
    };
    double e1 = err(0.02), e2 = err(0.01);
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);
}

TEST_CASE("simulate: equilibrium start stays put") {
    PwaDynamics d = linear_box(-1.0, 1.0);
    Trajectory traj = simulate(d, pt(0.0, 0.0), 0.5, 1e-2);
    for (const Point& x : traj.states) CHECK(x.lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("simulate: expanding flow exits and is flagged") {
    PwaDynamics d = linear_box(1.0, 1.0);
    Trajectory traj = simulate(d, pt(0.9, 0.9), 5.0, 1e-2, nullptr);
    CHECK(traj.exited);
    CHECK(traj.exit_time > 0.0);
    CHECK_THROWS_AS(simulate(d, pt(5.0, 0.0), 1.0, 1e-2), OutOfDomain);
}

TEST_CASE("simulate: barrier values recorded along the way") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    BarrierCandidate b = fixtures::square_witness();
    Trajectory traj = simulate(d, pt(0.2, 0.1), 1.0, 1e-3, &b);
    REQUIRE(traj.h.size() == traj.states.size());
    // h grows along contracting trajectories of this witness.
    CHECK(traj.h.back() > traj.h.front());

    // Lipschitz bound on consecutive h samples.
    double pmax = 0.0;
    for (const Vec& p : b.p) pmax = std::max(pmax, p.norm());
    double fmax = 0.0;
    for (const Cell& c : d.cells())
        for (const Point& v : c.vrep.vertices) fmax = std::max(fmax, (c.A * v + c.a).norm());
    for (std::size_t k = 1; k < traj.h.size(); ++k)
        CHECK(std::abs(traj.h[k] - traj.h[k - 1]) <= pmax * fmax * 1e-3 * 1.01 + 1e-12);
}

TEST_CASE("invariance_test: valid barrier keeps trajectories inside") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    SynthesisResult res = synthesize(d, AlphaGain{1.0}, Epsilons{}, 60.0);
    REQUIRE(res.valid());
    CHECK(invariance_test(res.dynamics, res.barrier, 20, 5.0, 1e-3, 0.05));
    CHECK(invariance_test(res.dynamics, res.barrier, 0, 5.0, 1e-3, 0.05));
}

TEST_CASE("invariance_test: trivial candidate on the expanding field fails") {
    PwaDynamics d = fixtures::square_four_triangles(1.0);
    BarrierCandidate trivial;
    for (int i = 0; i < 4; ++i) {
        trivial.p.push_back(Vec::Zero(2));
        trivial.q.push_back(1e-4);
    }
    CHECK_FALSE(invariance_test(d, trivial, 10, 10.0, 1e-3, 0.0));
}
