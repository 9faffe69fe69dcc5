#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <vector>

#include "pwabf/types.hpp"

namespace pwabf::lp {

enum class Sense { LessEq, Equal, GreaterEq };

enum class Status { Optimal, IterationLimit, NumericalFailure };

struct Term {
    int col = 0;
    double coef = 0.0;
};

/// Row-oriented LP model: minimize cᵀx subject to linear rows and
/// optional nonnegativity per variable. Rows and columns keep their
/// insertion order, which fixes the solve deterministically.
class Model {
public:
    int add_var(double cost, bool nonneg);
    int add_row(Sense sense, double rhs);
    int add_row(const std::vector<Term>& terms, Sense sense, double rhs);
    void add_term(int row, int col, double coef);

    int num_vars() const { return static_cast<int>(cost_.size()); }
    int num_rows() const { return static_cast<int>(rhs_.size()); }

    double cost(int col) const { return cost_[col]; }
    bool nonneg(int col) const { return nonneg_[col]; }
    Sense sense(int row) const { return sense_[row]; }
    double rhs(int row) const { return rhs_[row]; }
    const std::vector<Term>& row(int r) const { return rows_[r]; }

    /// Starting guess for the primal variables (interior-point seed).
    void set_warm_start(const Vec& x0) { warm_ = x0; }
    const std::optional<Vec>& warm_start() const { return warm_; }

    double objective_value(const Vec& x) const;
    /// Largest violation of rows and sign bounds at x (0 when feasible).
    double max_violation(const Vec& x) const;

private:
    std::vector<double> cost_;
    std::vector<bool> nonneg_;
    std::vector<std::vector<Term>> rows_;
    std::vector<Sense> sense_;
    std::vector<double> rhs_;
    std::optional<Vec> warm_;
};

struct Options {
    double feas_tol = 1e-10;
    double gap_tol = 1e-10;
    // A stalled run below this accuracy still counts as optimal; this is
    // the certification threshold of the solver contract.
    double accept_tol = 1e-8;
    int max_iters = 200;
};

struct Solution {
    Status status = Status::NumericalFailure;
    Vec x;
    double objective = 0.0;
    double rel_gap = 0.0;
    double primal_infeas = 0.0;
    double dual_infeas = 0.0;
    int iterations = 0;

    bool optimal() const { return status == Status::Optimal; }
};

/// Primal-dual interior-point solve (Mehrotra predictor-corrector on the
/// regularized augmented system). Deterministic for a fixed model.
Solution solve(const Model& m, const Options& opt = {});

/// Writes the model in CPLEX LP text form (debugging aid).
std::string to_lp_format(const Model& m,
                         const std::vector<std::string>& var_names = {});

}  // namespace pwabf::lp
