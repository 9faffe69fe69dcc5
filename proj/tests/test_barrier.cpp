#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "pwabf/barrier.hpp"

using namespace pwabf;

namespace {

/// Full LP variable vector for a candidate plus slack values.
Vec variable_vector(const BarrierLp& lp, const BarrierCandidate& cand,
                    const std::map<std::pair<int, int>, double>& tau_b,
                    const std::map<std::pair<int, int>, double>& tau_int) {
    Vec x = Vec::Zero(lp.model.num_vars());
    for (int i = 0; i < lp.num_cells; ++i) {
        x.segment(lp.p_base[i], lp.dim) = cand.p[i];
        x[lp.q_col[i]] = cand.q[i];
    }
    for (const auto& [key, col] : lp.tau_b_col) {
        auto it = tau_b.find(key);
        x[col] = it == tau_b.end() ? 0.0 : it->second;
    }
    for (const auto& [key, col] : lp.tau_int_col) {
        auto it = tau_int.find(key);
        x[col] = it == tau_int.end() ? 0.0 : it->second;
    }
    return x;
}

/// The constructive always-feasible point: p = 0, q = eps3/alpha, slacks
/// absorbing C1 and C2.
Vec lemma1_point(const BarrierLp& lp) {
    BarrierCandidate cand;
    double q0 = lp.eps.eps3 / lp.alpha.alpha_tilde;
    for (int i = 0; i < lp.num_cells; ++i) {
        cand.p.push_back(Vec::Zero(lp.dim));
        cand.q.push_back(q0);
    }
    std::map<std::pair<int, int>, double> tb, ti;
    for (const auto& [key, col] : lp.tau_b_col) tb[key] = q0 + lp.eps.eps1;
    for (const auto& [key, col] : lp.tau_int_col)
        ti[key] = std::max(0.0, lp.eps.eps2 - q0);
    return variable_vector(lp, cand, tb, ti);
}

PwaDynamics single_triangle() {
    CellSpec s;
    Point a(2), b(2), c(2);
    a << 0, 0;
    b << 1, 0;
    c << 0, 1;
    s.vertices = {a, b, c};
    s.A = -Mat::Identity(2, 2);
    s.a = Vec::Zero(2);
    return PwaDynamics::from_cells({s});
}

}  // namespace

TEST_CASE("assemble: single triangle row and variable counts") {
    PwaDynamics d = single_triangle();
    IndexSets idx = build_index_sets(d);
    BarrierLp lp = assemble(d, idx, AlphaGain{1.0}, Epsilons{});
    CHECK(lp.rows_c1 == 3);
    CHECK(lp.rows_c2 == 0);
    CHECK(lp.rows_c3 == 3);
    CHECK(lp.rows_c4 == 0);
    CHECK(lp.tau_b_col.size() == 3);
    CHECK(lp.tau_int_col.size() == 0);
}

TEST_CASE("assemble: split square constraint counts match the index sets") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    IndexSets idx = build_index_sets(d);
    BarrierLp lp = assemble(d, idx, AlphaGain{1.0}, Epsilons{});
    CHECK(lp.rows_c1 == static_cast<int>(idx.boundary_pairs.size()));
    CHECK(lp.rows_c2 == static_cast<int>(idx.interior_pairs.size()));
    CHECK(lp.rows_c3 == 12);  // three vertices per triangle
    // Continuity: the center vertex with four owners yields three
    // independent equalities, each corner with two owners yields one.
    CHECK(lp.rows_c4 == 3 + 4);
}

TEST_CASE("hand witness satisfies every assembled constraint") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    IndexSets idx = build_index_sets(d);
    BarrierLp lp = assemble(d, idx, AlphaGain{1.0}, Epsilons{});
    Vec x = variable_vector(lp, fixtures::square_witness(), {}, {});
    CHECK(lp.model.max_violation(x) <= 1e-9);
    // Scaling a feasible point up stays feasible: the margins are one-sided.
    for (double c : {2.0, 10.0}) {
        CHECK(lp.model.max_violation(c * x) <= 1e-9);
    }
}

TEST_CASE("solve: contracting field yields a valid barrier") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    IndexSets idx = build_index_sets(d);
    BarrierLp lp = assemble(d, idx, AlphaGain{1.0}, Epsilons{});
    auto [cand, rep] = solve(lp);
    CHECK(rep.sum_tau_b <= 1e-8);
    CHECK(is_valid(rep));
    for (const auto& [key, val] : rep.tau_b) CHECK(val >= -1e-12);
    for (const auto& [key, val] : rep.tau_int) CHECK(val >= -1e-12);
    // Continuity at the shared center vertex.
    Point center = Point::Zero(2);
    for (int i = 1; i < 4; ++i)
        CHECK(std::abs(cand.value(i, center) - cand.value(0, center)) < 1e-7);
}

TEST_CASE("solve: expanding field cannot be certified") {
    PwaDynamics d = fixtures::square_four_triangles(1.0);
    IndexSets idx = build_index_sets(d);
    BarrierLp lp = assemble(d, idx, AlphaGain{1.0}, Epsilons{});
    auto [cand, rep] = solve(lp);
    // The origin is a partition vertex, so the flow condition pins
    // h(0) >= eps3 while the boundary rows need h <= -eps1: boundary slack
    // cannot vanish.
    CHECK(rep.sum_tau_b > 1e-8);
    CHECK_FALSE(is_valid(rep));
}

TEST_CASE("solve: always feasible on random continuous systems") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        PwaDynamics d = fixtures::random_continuous_system(rng, 4 + trial);
        IndexSets idx = build_index_sets(d);
        BarrierLp lp = assemble(d, idx, AlphaGain{0.5}, Epsilons{});
        CHECK(lp.model.max_violation(lemma1_point(lp)) <= 1e-9);
        auto [cand, rep] = solve(lp);  // throws on solver failure
        CHECK(rep.objective >= -1e-9);
    }
}

TEST_CASE("is_valid thresholds") {
    SlackReport r;
    r.sum_tau_b = 0.0;
    CHECK(is_valid(r));
    r.sum_tau_b = 1e-9;
    CHECK(is_valid(r));
    r.sum_tau_b = 0.3;
    CHECK_FALSE(is_valid(r));
}

TEST_CASE("flagged_cells reads slacks disjunctively") {
    SlackReport r;
    CHECK(flagged_cells(r).empty());
    r.tau_b[{3, 7}] = 0.2;
    CHECK(flagged_cells(r) == std::set<int>{3});
    r.tau_int[{6, 2}] = 0.1;
    CHECK(flagged_cells(r) == std::set<int>{3, 6});
    r.tau_int[{9, 1}] = 1e-12;  // below tolerance
    CHECK(flagged_cells(r) == std::set<int>{3, 6});
}

TEST_CASE("maximality: interior slack cannot improve once tau_b is pinned") {
    PwaDynamics d = fixtures::square_four_triangles(-1.0);
    IndexSets idx = build_index_sets(d);
    BarrierLp lp = assemble(d, idx, AlphaGain{1.0}, Epsilons{});
    auto [cand, rep] = solve(lp);

    BarrierLp pinned = lp;
    std::vector<lp::Term> terms;
    for (const auto& [key, col] : pinned.tau_b_col) terms.push_back({col, 1.0});
    pinned.model.add_row(terms, lp::Sense::Equal, rep.sum_tau_b);
    auto [cand2, rep2] = solve(pinned);
    CHECK(rep2.sum_tau_int >= rep.sum_tau_int - 1e-8);
}

TEST_CASE("assemble validates inputs") {
    PwaDynamics d = single_triangle();
    IndexSets idx = build_index_sets(d);
    CHECK_THROWS_AS(assemble(d, idx, AlphaGain{-1.0}, Epsilons{}), DegenerateInput);
    CHECK_THROWS_AS(assemble(d, idx, AlphaGain{1.0}, Epsilons{0.0, 1e-4, 1e-4}),
                    DegenerateInput);
}
