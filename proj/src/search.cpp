#include "pwabf/search.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>

namespace pwabf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool progress_enabled() {
    const char* v = std::getenv("PWA_LOG");
    return v == nullptr || std::string(v) != "quiet";
}

void log_progress(int iter, int cells, double sum_b, double sum_int, double elapsed) {
    if (!progress_enabled()) return;
    std::cerr << "synthesize: iter=" << iter << " cells=" << cells
              << " sum_tau_b=" << sum_b << " sum_tau_int=" << sum_int
              << " elapsed=" << elapsed << "s\n";
}

// Valid candidates admit upward rescaling (the epsilon constraints are
// one-sided), so present them with max vertex value >= 1 instead of the
// arbitrary interior-point optimum. The zero superlevel set is unchanged.
void normalize_valid(BarrierCandidate& cand, const PwaDynamics& d) {
    double hmax = -std::numeric_limits<double>::infinity();
    for (const Cell& c : d.cells())
        for (const Point& v : c.vrep.vertices)
            hmax = std::max(hmax, cand.value(c.id, v));
    if (hmax <= 1e-12 || hmax >= 1.0) return;
    double scale = 1.0 / hmax;
    for (auto& p : cand.p) p *= scale;
    for (auto& q : cand.q) q *= scale;
}

}  // namespace

SynthesisResult synthesize(const PwaDynamics& d, AlphaGain alpha, Epsilons eps,
                           double budget_s) {
    if (budget_s <= 0) throw DegenerateInput("synthesize: budget must be positive");
    alpha.validate();
    eps.validate();

    auto t0 = Clock::now();
    SynthesisResult res;
    res.initial_cells = d.num_cells();

    PwaDynamics current = d;
    int best_iter = -1;
    double best_sum = std::numeric_limits<double>::infinity();

    for (int iter = 0;; ++iter) {
        IndexSets idx = build_index_sets(current);
        auto lp_t0 = Clock::now();
        BarrierLp lp = assemble(current, idx, alpha, eps);
        auto [cand, rep] = solve(lp);
        double lp_secs = seconds_since(lp_t0);

        res.iterations = iter + 1;
        res.history.push_back(
            {current.num_cells(), rep.sum_tau_b, rep.sum_tau_int, lp_secs});
        log_progress(iter, current.num_cells(), rep.sum_tau_b, rep.sum_tau_int,
                     seconds_since(t0));

        if (rep.sum_tau_b < best_sum) {
            best_sum = rep.sum_tau_b;
            best_iter = iter;
            res.barrier = cand;
            res.dynamics = current;
            res.report = rep;
            res.index_sets = idx;
        }

        if (is_valid(rep)) {
            res.status = SynthesisStatus::Valid;
            res.barrier = std::move(cand);
            res.dynamics = std::move(current);
            res.report = std::move(rep);
            res.index_sets = std::move(idx);
            res.returned_best_iterate = false;
            normalize_valid(res.barrier, res.dynamics);
            break;
        }
        if (seconds_since(t0) >= budget_s) {
            res.status = SynthesisStatus::BudgetExhausted;
            res.returned_best_iterate = best_iter != iter;
            break;
        }

        std::set<int> flagged = flagged_cells(rep);
        if (flagged.empty()) {
            // Slack sum above tolerance but spread below the per-pair
            // threshold: refine the single worst offender.
            std::pair<int, int> worst{-1, -1};
            double worst_val = -1.0;
            for (const auto& [key, val] : rep.tau_b)
                if (val > worst_val) {
                    worst_val = val;
                    worst = key;
                }
            flagged.insert(worst.first);
        }
        current = refine_partition(current, flagged);
        if (seconds_since(t0) >= budget_s) {
            res.status = SynthesisStatus::BudgetExhausted;
            res.returned_best_iterate = best_iter != iter;
            break;
        }
    }
    res.final_cells = res.dynamics.num_cells();
    res.elapsed_seconds = seconds_since(t0);
    return res;
}

AlphaSearchResult bisect_alpha_with(const std::function<bool(double)>& probe,
                                    double alpha_lo, double alpha_hi,
                                    double alpha_tol) {
    if (!(alpha_lo > 0) || !(alpha_lo < alpha_hi) || !(alpha_tol > 0))
        throw DegenerateInput("bisect_alpha: invalid interval or tolerance");
    AlphaSearchResult res;
    auto run = [&](double a) {
        bool ok = probe(a);
        res.probes.push_back({a, ok});
        return ok;
    };
    if (!run(alpha_lo)) {
        res.status = AlphaSearchStatus::NoValidAlpha;
        return res;
    }
    if (run(alpha_hi)) {
        res.status = AlphaSearchStatus::FoundAtUpperEnd;
        res.best_alpha = alpha_hi;
        res.extend_interval_hint = true;
        return res;
    }
    double lo = alpha_lo, hi = alpha_hi;
    while (hi - lo > alpha_tol) {
        double mid = 0.5 * (lo + hi);
        if (run(mid))
            lo = mid;
        else
            hi = mid;
    }
    res.status = AlphaSearchStatus::Found;
    res.best_alpha = lo;
    return res;
}

AlphaSearchResult bisect_alpha(const PwaDynamics& d, double alpha_lo, double alpha_hi,
                               Epsilons eps, double alpha_tol,
                               double per_probe_budget_s) {
    std::map<double, SynthesisResult> results;
    auto probe = [&](double a) {
        SynthesisResult r = synthesize(d, AlphaGain{a}, eps, per_probe_budget_s);
        bool ok = r.valid();
        results.emplace(a, std::move(r));
        return ok;
    };
    AlphaSearchResult res = bisect_alpha_with(probe, alpha_lo, alpha_hi, alpha_tol);
    if (res.found()) res.best = std::move(results.at(res.best_alpha));
    return res;
}

}  // namespace pwabf
