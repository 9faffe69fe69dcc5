#include "pwabf/lp.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <cstdio>
#include <cstdlib>

namespace pwabf::lp {

int Model::add_var(double cost, bool nonneg) {
    cost_.push_back(cost);
    nonneg_.push_back(nonneg);
    return static_cast<int>(cost_.size()) - 1;
}

int Model::add_row(Sense sense, double rhs) {
    rows_.emplace_back();
    sense_.push_back(sense);
    rhs_.push_back(rhs);
    return static_cast<int>(rhs_.size()) - 1;
}

int Model::add_row(const std::vector<Term>& terms, Sense sense, double rhs) {
    int r = add_row(sense, rhs);
    rows_[r] = terms;
    return r;
}

void Model::add_term(int row, int col, double coef) {
    rows_[row].push_back({col, coef});
}

double Model::objective_value(const Vec& x) const {
    double v = 0.0;
    for (int j = 0; j < num_vars(); ++j) v += cost_[j] * x[j];
    return v;
}

double Model::max_violation(const Vec& x) const {
    double worst = 0.0;
    for (int j = 0; j < num_vars(); ++j)
        if (nonneg_[j]) worst = std::max(worst, -x[j]);
    for (int r = 0; r < num_rows(); ++r) {
        double lhs = 0.0;
        for (const Term& t : rows_[r]) lhs += t.coef * x[t.col];
        double gap = lhs - rhs_[r];
        switch (sense_[r]) {
            case Sense::LessEq: worst = std::max(worst, gap); break;
            case Sense::GreaterEq: worst = std::max(worst, -gap); break;
            case Sense::Equal: worst = std::max(worst, std::abs(gap)); break;
        }
    }
    return worst;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Standard computational form: min cᵀx s.t. Ax = b, x_j >= 0 for j in the
// bounded set, x_j free otherwise. Inequality rows get one slack column.
struct Standard {
    SpMat A;
    Vec b;
    Vec c;
    std::vector<bool> nonneg;  // per column
    int n_orig = 0;            // original columns come first
};

Standard to_standard(const Model& m) {
    Standard s;
    s.n_orig = m.num_vars();
    int ncols = m.num_vars();
    std::vector<Triplet> trips;
    s.nonneg.resize(m.num_vars());
    for (int j = 0; j < m.num_vars(); ++j) s.nonneg[j] = m.nonneg(j);

    s.b = Vec(m.num_rows());
    for (int r = 0; r < m.num_rows(); ++r) {
        for (const Term& t : m.row(r)) trips.emplace_back(r, t.col, t.coef);
        s.b[r] = m.rhs(r);
        if (m.sense(r) == Sense::LessEq) {
            trips.emplace_back(r, ncols, 1.0);
            s.nonneg.push_back(true);
            ++ncols;
        } else if (m.sense(r) == Sense::GreaterEq) {
            trips.emplace_back(r, ncols, -1.0);
            s.nonneg.push_back(true);
            ++ncols;
        }
    }
    s.c = Vec::Zero(ncols);
    for (int j = 0; j < m.num_vars(); ++j) s.c[j] = m.cost(j);
    s.A.resize(m.num_rows(), ncols);
    s.A.setFromTriplets(trips.begin(), trips.end());
    s.A.makeCompressed();
    return s;
}

struct Iterate {
    Vec x;  // primal
    Vec y;  // row duals
    Vec z;  // reduced costs, zero on free columns
};

// One augmented-system solve with iterative refinement against the
// unregularized KKT matrix.
class KktSolver {
public:
    KktSolver(const SpMat& A, const std::vector<bool>& nonneg)
        : A_(A), At_(A.transpose()), nonneg_(nonneg) {}

    /// Factorizes the regularized augmented matrix, escalating the
    /// regularization until the pivoting-free LDLT goes through. The
    /// refinement steps in solve() run against the unregularized system.
    bool factorize(const Vec& theta) {
        theta_ = theta;
        for (double reg = 1e-9; reg <= 1e-3; reg *= 100.0)
            if (factorize_with(theta, reg)) return true;
        return false;
    }

    bool factorize_with(const Vec& theta, double reg) {
        const int n = A_.cols();
        const int mrows = A_.rows();
        std::vector<Triplet> trips;
        trips.reserve(A_.nonZeros() * 2 + n + mrows);
        for (int j = 0; j < n; ++j) trips.emplace_back(j, j, -(theta[j] + reg));
        for (int k = 0; k < A_.outerSize(); ++k)
            for (SpMat::InnerIterator it(A_, k); it; ++it) {
                trips.emplace_back(n + it.row(), it.col(), it.value());
                trips.emplace_back(it.col(), n + it.row(), it.value());
            }
        for (int r = 0; r < mrows; ++r) trips.emplace_back(n + r, n + r, reg);
        SpMat K(n + mrows, n + mrows);
        K.setFromTriplets(trips.begin(), trips.end());
        K.makeCompressed();
        if (first_) {
            ldlt_.analyzePattern(K);
            first_ = false;
        }
        ldlt_.factorize(K);
        if (ldlt_.info() != Eigen::Success) return false;
        // A pivot-free LDLT can "succeed" with nonfinite entries; probe it.
        Vec probe = ldlt_.solve(Vec::Ones(n + mrows));
        return probe.allFinite();
    }

    // Solves [-Θ Aᵀ; A 0] [dx; dy] = [rx; ry] with monotone iterative
    // refinement against the unregularized system.
    void solve(const Vec& rx, const Vec& ry, Vec& dx, Vec& dy) const {
        const int n = A_.cols();
        const int mrows = A_.rows();
        Vec rhs(n + mrows);
        rhs.head(n) = rx;
        rhs.tail(mrows) = ry;
        auto residual = [&](const Vec& sol) {
            Vec res(n + mrows);
            res.head(n) = rx + theta_.cwiseProduct(sol.head(n)) - At_ * sol.tail(mrows);
            res.tail(mrows) = ry - A_ * sol.head(n);
            return res;
        };
        Vec sol = ldlt_.solve(rhs);
        Vec res = residual(sol);
        double best_norm = res.lpNorm<Eigen::Infinity>();
        Vec best = sol;
        const double target = 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>());
        for (int pass = 0; pass < 5 && best_norm > target; ++pass) {
            sol += ldlt_.solve(res);
            res = residual(sol);
            double norm = res.lpNorm<Eigen::Infinity>();
            if (norm >= best_norm) {
                sol = best;  // refinement started diverging
                break;
            }
            best_norm = norm;
            best = sol;
        }
        dx = sol.head(n);
        dy = sol.tail(mrows);
    }

private:
    const SpMat& A_;
    SpMat At_;
    const std::vector<bool>& nonneg_;
    Vec theta_;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
    bool first_ = true;
};

double max_step(const Vec& v, const Vec& dv, const std::vector<bool>& nonneg) {
    double alpha = 1.0 / 0.9995;
    for (int j = 0; j < v.size(); ++j) {
        if (!nonneg[j]) continue;
        if (dv[j] < 0.0) alpha = std::min(alpha, -v[j] / dv[j]);
    }
    return alpha;
}

Iterate starting_point(const Standard& s, const std::optional<Vec>& warm) {
    const int n = s.A.cols();
    Iterate it;
    it.x = Vec::Zero(n);
    if (warm && warm->size() == s.n_orig) it.x.head(s.n_orig) = *warm;
    it.y = Vec::Zero(s.A.rows());
    it.z = Vec::Zero(n);
    double shift = 1.0;
    for (int j = 0; j < n; ++j) {
        if (s.nonneg[j]) {
            it.x[j] = std::max(it.x[j], shift);
            it.z[j] = shift;
        }
    }
    return it;
}

}  // namespace

Solution solve(const Model& m, const Options& opt) {
    Solution out;
    if (m.num_rows() == 0 && m.num_vars() == 0) {
        out.status = Status::Optimal;
        out.x = Vec();
        return out;
    }
    Standard s = to_standard(m);
    const int n = s.A.cols();
    const int mrows = s.A.rows();

    std::vector<int> bounded;
    for (int j = 0; j < n; ++j)
        if (s.nonneg[j]) bounded.push_back(j);
    const double nb = std::max<std::size_t>(bounded.size(), 1);

    Iterate it = starting_point(s, m.warm_start());
    KktSolver kkt(s.A, s.nonneg);

    const double bnorm = 1.0 + s.b.lpNorm<Eigen::Infinity>();
    const double cnorm = 1.0 + s.c.lpNorm<Eigen::Infinity>();

    double best_err = std::numeric_limits<double>::infinity();
    Iterate best = it;
    int stall = 0;

    auto metrics = [&](const Iterate& p, double& pinf, double& dinf, double& gap) {
        Vec rp = s.b - s.A * p.x;
        Vec rd = s.c - s.A.transpose() * p.y - p.z;
        pinf = rp.lpNorm<Eigen::Infinity>() / bnorm;
        dinf = rd.lpNorm<Eigen::Infinity>() / cnorm;
        double pobj = s.c.dot(p.x);
        double dobj = s.b.dot(p.y);
        gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    };

    int iter = 0;
    for (; iter < opt.max_iters; ++iter) {
        double pinf, dinf, gap;
        metrics(it, pinf, dinf, gap);
        double err = std::max({pinf, dinf, gap});
        if (std::getenv("PWABF_LP_TRACE")) {
            double mu_dbg = 0.0;
            for (int j : bounded) mu_dbg += it.x[j] * it.z[j];
            mu_dbg /= nb;
            std::fprintf(stderr, "  it=%d pinf=%.2e dinf=%.2e gap=%.2e mu=%.2e ynorm=%.2e\n",
                         iter, pinf, dinf, gap, mu_dbg, it.y.lpNorm<Eigen::Infinity>());
        }
        if (err < best_err - 1e-16) {
            best_err = err;
            best = it;
            stall = 0;
        } else {
            ++stall;
        }
        if (pinf <= opt.feas_tol && dinf <= opt.feas_tol && gap <= opt.gap_tol) break;
        if (stall > 12) break;

        double mu = 0.0;
        for (int j : bounded) mu += it.x[j] * it.z[j];
        mu /= nb;

        Vec theta = Vec::Zero(n);
        for (int j : bounded)
            theta[j] = std::min(1e12, std::max(1e-12, it.z[j] / std::max(it.x[j], 1e-300)));
        if (!kkt.factorize(theta)) {
            out.status = Status::NumericalFailure;
            out.x = best.x.head(s.n_orig);
            out.objective = m.objective_value(out.x);
            out.iterations = iter;
            return out;
        }

        Vec rp = s.b - s.A * it.x;
        Vec rd = s.c - s.A.transpose() * it.y - it.z;

        // Affine (predictor) direction: complementarity target 0.
        Vec rx = rd;
        for (int j : bounded) rx[j] += it.z[j];  // rd - X^{-1}(-XZe)
        Vec dx_aff, dy_aff;
        kkt.solve(rx, rp, dx_aff, dy_aff);
        Vec dz_aff = Vec::Zero(n);
        for (int j : bounded)
            dz_aff[j] = (-it.x[j] * it.z[j] - it.z[j] * dx_aff[j]) / std::max(it.x[j], 1e-300);

        double ap = std::min(1.0, max_step(it.x, dx_aff, s.nonneg));
        double ad = std::min(1.0, max_step(it.z, dz_aff, s.nonneg));
        double mu_aff = 0.0;
        for (int j : bounded)
            mu_aff += (it.x[j] + ap * dx_aff[j]) * (it.z[j] + ad * dz_aff[j]);
        mu_aff /= nb;
        double sigma = (mu > 0.0) ? std::pow(mu_aff / mu, 3) : 0.0;
        sigma = std::min(1.0, std::max(0.0, sigma));

        // Corrector: target sigma*mu with Mehrotra's second-order term.
        rx = rd;
        for (int j : bounded) {
            double rc = sigma * mu - it.x[j] * it.z[j] - dx_aff[j] * dz_aff[j];
            rx[j] -= rc / std::max(it.x[j], 1e-300);
        }
        Vec dx, dy;
        kkt.solve(rx, rp, dx, dy);
        Vec dz = Vec::Zero(n);
        for (int j : bounded) {
            double rc = sigma * mu - it.x[j] * it.z[j] - dx_aff[j] * dz_aff[j];
            dz[j] = (rc - it.z[j] * dx[j]) / std::max(it.x[j], 1e-300);
        }

        ap = std::min(1.0, 0.9995 * max_step(it.x, dx, s.nonneg));
        ad = std::min(1.0, 0.9995 * max_step(it.z, dz, s.nonneg));

        // Centrality correctors: push outlier complementarity products
        // toward sigma*mu to enlarge the steps (helps degenerate endgames).
        for (int round = 0; round < 2; ++round) {
            double ap_t = std::min(1.0, 1.08 * ap + 0.08);
            double ad_t = std::min(1.0, 1.08 * ad + 0.08);
            double target = std::max(sigma * mu, 1e-2 * mu);
            Vec rx_c = Vec::Zero(n);
            bool any = false;
            for (int j : bounded) {
                double prod = (it.x[j] + ap_t * dx[j]) * (it.z[j] + ad_t * dz[j]);
                double want = std::min(std::max(prod, 0.1 * target), 10.0 * target);
                if (want != prod) {
                    rx_c[j] = -(want - prod) / std::max(it.x[j], 1e-300);
                    any = true;
                }
            }
            if (!any) break;
            Vec dx_c, dy_c;
            kkt.solve(rx_c, Vec::Zero(mrows), dx_c, dy_c);
            Vec dz_c = Vec::Zero(n);
            for (int j : bounded)
                dz_c[j] = (-rx_c[j] * std::max(it.x[j], 1e-300) - it.z[j] * dx_c[j]) /
                          std::max(it.x[j], 1e-300);
            Vec dx_n = dx + dx_c, dy_n = dy + dy_c, dz_n = dz + dz_c;
            double ap_n = std::min(1.0, 0.9995 * max_step(it.x, dx_n, s.nonneg));
            double ad_n = std::min(1.0, 0.9995 * max_step(it.z, dz_n, s.nonneg));
            if (ap_n + ad_n < ap + ad + 0.1) break;
            dx = dx_n;
            dy = dy_n;
            dz = dz_n;
            ap = ap_n;
            ad = ad_n;
        }
        if (ap < 1e-12 && ad < 1e-12) break;

        // Endgame safeguard: once nearly converged, refuse steps that blow
        // up the KKT error (ill-conditioned corrector directions do this);
        // halve until harmless or give up on this direction.
        Iterate next = it;
        bool stepped = false;
        for (int half = 0; half < 8; ++half) {
            next.x = it.x + ap * dx;
            next.y = it.y + ad * dy;
            next.z = it.z + ad * dz;
            double p2, d2, g2;
            metrics(next, p2, d2, g2);
            double err_new = std::max({p2, d2, g2});
            if (err >= 1e-6 || err_new <= 100.0 * err) {
                stepped = true;
                break;
            }
            ap *= 0.5;
            ad *= 0.5;
        }
        if (!stepped) break;
        it = next;
        for (int j : bounded) {
            it.x[j] = std::max(it.x[j], 1e-300);
            it.z[j] = std::max(it.z[j], 1e-300);
        }
    }

    double pinf, dinf, gap;
    metrics(it, pinf, dinf, gap);
    double err_final = std::max({pinf, dinf, gap});
    const Iterate& sol = (err_final <= best_err) ? it : best;
    metrics(sol, pinf, dinf, gap);

    out.x = sol.x.head(s.n_orig);
    out.objective = m.objective_value(out.x);
    out.rel_gap = gap;
    out.primal_infeas = pinf;
    out.dual_infeas = dinf;
    out.iterations = iter;
    if (pinf <= opt.accept_tol && dinf <= opt.accept_tol && gap <= opt.accept_tol)
        out.status = Status::Optimal;
    else if (iter >= opt.max_iters)
        out.status = Status::IterationLimit;
    else
        out.status = Status::NumericalFailure;
    return out;
}

std::string to_lp_format(const Model& m, const std::vector<std::string>& var_names) {
    auto name = [&](int j) {
        if (j < static_cast<int>(var_names.size()) && !var_names[j].empty())
            return var_names[j];
        return std::string("x") + std::to_string(j);
    };
    std::ostringstream os;
    os << "Minimize\n obj:";
    for (int j = 0; j < m.num_vars(); ++j) {
        double c = m.cost(j);
        if (c == 0.0) continue;
        os << (c >= 0 ? " + " : " - ") << std::abs(c) << " " << name(j);
    }
    os << "\nSubject To\n";
    for (int r = 0; r < m.num_rows(); ++r) {
        os << " c" << r << ":";
        for (const Term& t : m.row(r))
            os << (t.coef >= 0 ? " + " : " - ") << std::abs(t.coef) << " " << name(t.col);
        switch (m.sense(r)) {
            case Sense::LessEq: os << " <= "; break;
            case Sense::GreaterEq: os << " >= "; break;
            case Sense::Equal: os << " = "; break;
        }
        os << m.rhs(r) << "\n";
    }
    os << "Bounds\n";
    for (int j = 0; j < m.num_vars(); ++j)
        if (!m.nonneg(j)) os << " " << name(j) << " free\n";
    os << "End\n";
    return os.str();
}

}  // namespace pwabf::lp
