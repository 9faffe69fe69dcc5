#pragma once

#include <functional>
#include <optional>

#include "pwabf/barrier.hpp"
#include "pwabf/refine.hpp"

namespace pwabf {

enum class SynthesisStatus { Valid, BudgetExhausted };

struct IterationLog {
    int cells = 0;
    double sum_tau_b = 0.0;
    double sum_tau_int = 0.0;
    double lp_seconds = 0.0;
};

struct SynthesisResult {
    SynthesisStatus status = SynthesisStatus::BudgetExhausted;
    BarrierCandidate barrier;
    PwaDynamics dynamics;  // partition the returned candidate lives on
    SlackReport report;
    IndexSets index_sets;
    int iterations = 0;
    int initial_cells = 0;
    int final_cells = 0;
    double elapsed_seconds = 0.0;
    std::vector<IterationLog> history;
    // On budget exhaustion the best (lowest boundary-slack) iterate is
    // returned, which may not be the last one.
    bool returned_best_iterate = false;

    bool valid() const { return status == SynthesisStatus::Valid; }
};

/// Solve-refine loop: assemble and solve the synthesis LP, return on a
/// vanishing boundary-slack sum, otherwise refine the flagged cells and
/// repeat until the wall-clock budget runs out. Valid candidates are
/// rescaled (scale-invariant) so the largest vertex value is at least 1.
SynthesisResult synthesize(const PwaDynamics& d, AlphaGain alpha, Epsilons eps,
                           double budget_s = 3600.0);

enum class AlphaSearchStatus { Found, FoundAtUpperEnd, NoValidAlpha };

struct AlphaProbe {
    double alpha = 0.0;
    bool valid = false;
};

struct AlphaSearchResult {
    AlphaSearchStatus status = AlphaSearchStatus::NoValidAlpha;
    double best_alpha = 0.0;  // meaningful unless NoValidAlpha
    std::optional<SynthesisResult> best;
    std::vector<AlphaProbe> probes;
    bool extend_interval_hint = false;  // upper endpoint already valid

    bool found() const { return status != AlphaSearchStatus::NoValidAlpha; }
};

/// Bisection core over an abstract validity probe. Probes the endpoints
/// first, then halves the (valid, invalid) bracket until it is narrower
/// than alpha_tol; returns the largest probed valid gain.
AlphaSearchResult bisect_alpha_with(const std::function<bool(double)>& probe,
                                    double alpha_lo, double alpha_hi,
                                    double alpha_tol);

/// Bisection over synthesize(). Every probe restarts from the original
/// partition so refinement tuned to one gain cannot bias another.
AlphaSearchResult bisect_alpha(const PwaDynamics& d, double alpha_lo,
                               double alpha_hi, Epsilons eps, double alpha_tol,
                               double per_probe_budget_s);

}  // namespace pwabf
