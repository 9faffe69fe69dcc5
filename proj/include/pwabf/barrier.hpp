#pragma once

#include <map>
#include <set>
#include <utility>

#include "pwabf/lp.hpp"
#include "pwabf/pwa.hpp"

namespace pwabf {

/// Margins of the three inequality families in the synthesis LP.
struct Epsilons {
    double eps1 = 1e-4;
    double eps2 = 1e-4;
    double eps3 = 1e-4;

    void validate() const {
        if (eps1 <= 0 || eps2 <= 0 || eps3 <= 0)
            throw DegenerateInput("Epsilons: margins must be positive");
    }
};

/// Linear class-K gain alpha(h) = alpha_tilde * h.
struct AlphaGain {
    double alpha_tilde = 1.0;

    void validate() const {
        if (alpha_tilde <= 0) throw DegenerateInput("AlphaGain: gain must be positive");
    }
};

/// Per-cell affine barrier h_i(x) = p_i'x + q_i.
struct BarrierCandidate {
    std::vector<Vec> p;
    std::vector<double> q;

    double value(int cell, const Point& x) const { return p[cell].dot(x) + q[cell]; }
    int num_cells() const { return static_cast<int>(q.size()); }
};

/// Slack values of the solved relaxation, keyed by (cell, pool vertex).
struct SlackReport {
    std::map<std::pair<int, int>, double> tau_b;
    std::map<std::pair<int, int>, double> tau_int;
    double objective = 0.0;
    double sum_tau_b = 0.0;
    double sum_tau_int = 0.0;
};

/// Assembled synthesis LP with its variable layout. Constraint families:
///   C1  h_i(v_k) - tau_b  <= -eps1          on I_b
///   C2  h_i(v_k) + tau_int >= eps2          on I_int
///   C3  p_i'(A_i v_k + a_i) + alpha h_i(v_k) >= eps3   on every incidence
///   C4  h_i(v_k) = h_j(v_k)                 at shared vertices
///   C5  tau_b, tau_int >= 0
/// minimizing the slack sum. One slack per (cell, vertex) pair.
struct BarrierLp {
    lp::Model model;
    int dim = 0;
    int num_cells = 0;
    std::vector<int> p_base;  // column of p_i[0]
    std::vector<int> q_col;
    std::map<std::pair<int, int>, int> tau_b_col;
    std::map<std::pair<int, int>, int> tau_int_col;
    int rows_c1 = 0, rows_c2 = 0, rows_c3 = 0, rows_c4 = 0;
    IndexSets idx;
    AlphaGain alpha;
    Epsilons eps;

    std::vector<std::string> var_names() const;
};

BarrierLp assemble(const PwaDynamics& d, const IndexSets& idx, AlphaGain alpha,
                   Epsilons eps);

/// Solves the assembled LP to certified optimality. The warm start is the
/// constructive feasible point p = 0, q = eps3/alpha with slacks from C1/C2.
std::pair<BarrierCandidate, SlackReport> solve(const BarrierLp& lp);

/// Valid barrier iff the boundary slack sum vanishes.
bool is_valid(const SlackReport& r, double tol = kNonzeroTol);

/// Cells owning any boundary OR interior slack above tol.
std::set<int> flagged_cells(const SlackReport& r, double tol = kNonzeroTol);

}  // namespace pwabf
