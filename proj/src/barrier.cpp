#include "pwabf/barrier.hpp"

#include <algorithm>

namespace pwabf {

std::vector<std::string> BarrierLp::var_names() const {
    std::vector<std::string> names(model.num_vars());
    for (int i = 0; i < num_cells; ++i) {
        for (int j = 0; j < dim; ++j)
            names[p_base[i] + j] = "p" + std::to_string(i) + "_" + std::to_string(j);
        names[q_col[i]] = "q" + std::to_string(i);
    }
    for (const auto& [key, col] : tau_b_col)
        names[col] = "tb_" + std::to_string(key.first) + "_" + std::to_string(key.second);
    for (const auto& [key, col] : tau_int_col)
        names[col] = "ti_" + std::to_string(key.first) + "_" + std::to_string(key.second);
    return names;
}

BarrierLp assemble(const PwaDynamics& d, const IndexSets& idx, AlphaGain alpha,
                   Epsilons eps) {
    alpha.validate();
    eps.validate();
    if (d.num_cells() == 0) throw EmptyPartition("assemble: no cells");

    BarrierLp out;
    out.dim = d.dim();
    out.num_cells = d.num_cells();
    out.idx = idx;
    out.alpha = alpha;
    out.eps = eps;

    lp::Model& m = out.model;
    for (int i = 0; i < d.num_cells(); ++i) {
        out.p_base.push_back(m.num_vars());
        for (int j = 0; j < d.dim(); ++j) m.add_var(0.0, false);
        out.q_col.push_back(m.add_var(0.0, false));
    }
    for (const auto& pair : idx.boundary_pairs)
        out.tau_b_col[pair] = m.add_var(1.0, true);
    for (const auto& pair : idx.interior_pairs)
        out.tau_int_col[pair] = m.add_var(1.0, true);

    const auto& pool = d.vertex_pool();
    auto add_h_terms = [&](int row, int cell, const Point& v, double scale) {
        for (int j = 0; j < d.dim(); ++j)
            m.add_term(row, out.p_base[cell] + j, scale * v[j]);
        m.add_term(row, out.q_col[cell], scale);
    };

    // C1: h_i(v_k) - tau_b <= -eps1 on boundary pairs.
    for (const auto& [cell, vid] : idx.boundary_pairs) {
        int row = m.add_row(lp::Sense::LessEq, -eps.eps1);
        add_h_terms(row, cell, pool[vid], 1.0);
        m.add_term(row, out.tau_b_col.at({cell, vid}), -1.0);
        ++out.rows_c1;
    }
    // C2: h_i(v_k) + tau_int >= eps2 on interior pairs.
    for (const auto& [cell, vid] : idx.interior_pairs) {
        int row = m.add_row(lp::Sense::GreaterEq, eps.eps2);
        add_h_terms(row, cell, pool[vid], 1.0);
        m.add_term(row, out.tau_int_col.at({cell, vid}), 1.0);
        ++out.rows_c2;
    }
    // C3: p_i'(A_i v + a_i) + alpha h_i(v) >= eps3 at every incidence.
    for (int i = 0; i < d.num_cells(); ++i) {
        const Cell& c = d.cell(i);
        std::vector<int> vids = c.vertex_ids;
        std::sort(vids.begin(), vids.end());
        for (int vid : vids) {
            const Point& v = pool[vid];
            Vec flow = c.A * v + c.a;
            int row = m.add_row(lp::Sense::GreaterEq, eps.eps3);
            for (int j = 0; j < d.dim(); ++j)
                m.add_term(row, out.p_base[i] + j,
                           flow[j] + alpha.alpha_tilde * v[j]);
            m.add_term(row, out.q_col[i], alpha.alpha_tilde);
            ++out.rows_c3;
        }
    }
    // C4: continuity equalities, chained over the owners of each vertex.
    for (std::size_t vid = 0; vid < pool.size(); ++vid) {
        const auto& own = d.owners()[vid];
        for (std::size_t k = 0; k + 1 < own.size(); ++k) {
            int row = m.add_row(lp::Sense::Equal, 0.0);
            add_h_terms(row, own[k], pool[vid], 1.0);
            add_h_terms(row, own[k + 1], pool[vid], -1.0);
            ++out.rows_c4;
        }
    }

    // Constructive feasible point (the Lemma-1 witness) as warm start.
    Vec warm = Vec::Zero(m.num_vars());
    double q0 = eps.eps3 / alpha.alpha_tilde;
    for (int i = 0; i < d.num_cells(); ++i) warm[out.q_col[i]] = q0;
    for (const auto& [key, col] : out.tau_b_col) warm[col] = q0 + eps.eps1;
    for (const auto& [key, col] : out.tau_int_col)
        warm[col] = std::max(0.0, eps.eps2 - q0);
    m.set_warm_start(warm);
    return out;
}

std::pair<BarrierCandidate, SlackReport> solve(const BarrierLp& lp) {
    lp::Solution sol = lp::solve(lp.model);
    if (!sol.optimal())
        throw SolverFailure("barrier solve: interior-point method did not certify "
                            "optimality (relative gap " +
                            std::to_string(sol.rel_gap) + ")");
    BarrierCandidate cand;
    cand.p.resize(lp.num_cells);
    cand.q.resize(lp.num_cells);
    for (int i = 0; i < lp.num_cells; ++i) {
        cand.p[i] = sol.x.segment(lp.p_base[i], lp.dim);
        cand.q[i] = sol.x[lp.q_col[i]];
    }
    SlackReport rep;
    for (const auto& [key, col] : lp.tau_b_col) {
        rep.tau_b[key] = sol.x[col];
        rep.sum_tau_b += sol.x[col];
    }
    for (const auto& [key, col] : lp.tau_int_col) {
        rep.tau_int[key] = sol.x[col];
        rep.sum_tau_int += sol.x[col];
    }
    rep.objective = sol.objective;
    return {std::move(cand), std::move(rep)};
}

bool is_valid(const SlackReport& r, double tol) { return r.sum_tau_b <= tol; }

std::set<int> flagged_cells(const SlackReport& r, double tol) {
    std::set<int> out;
    for (const auto& [key, val] : r.tau_b)
        if (val > tol) out.insert(key.first);
    for (const auto& [key, val] : r.tau_int)
        if (val > tol) out.insert(key.first);
    return out;
}

}  // namespace pwabf
