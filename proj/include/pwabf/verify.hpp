#pragma once

#include <string>
#include <vector>

#include "pwabf/barrier.hpp"
#include "pwabf/pwa.hpp"

namespace pwabf {

/// Solver-independent certificate check, recomputed from raw cell data.
struct CertificateReport {
    bool boundary_ok = false;
    bool continuity_ok = false;
    bool nagumo_vertex_ok = false;
    bool nagumo_sampled_ok = false;
    // Worst cases over their families (signed so tests can assert any
    // tolerance): largest boundary value, largest continuity gap, smallest
    // flow-condition margin at vertices and at sampled interior points.
    double worst_boundary_value = 0.0;
    double worst_continuity_gap = 0.0;
    double worst_nagumo_vertex = 0.0;
    double worst_nagumo_sampled = 0.0;
    std::vector<std::string> violations;

    bool all_ok() const {
        return boundary_ok && continuity_ok && nagumo_vertex_ok && nagumo_sampled_ok;
    }
};

double evaluate_barrier(const BarrierCandidate& b, const PwaDynamics& d, const Point& x,
                        double tol = kGeomTol);

/// Checks boundary nonpositivity on I_b, continuity at shared vertices,
/// the flow condition at every (cell, vertex) incidence and, redundantly,
/// at sampled interior points per cell (affinity makes the vertex check
/// sufficient; the sampled pass guards the data model).
CertificateReport check_certificate(const BarrierCandidate& b, const PwaDynamics& d,
                                    const IndexSets& idx, AlphaGain alpha, Epsilons eps,
                                    int samples_per_cell = 32);

struct Trajectory {
    std::vector<double> times;
    std::vector<Point> states;
    std::vector<double> h;  // empty when simulated without a barrier
    bool exited = false;
    double exit_time = 0.0;
};

/// Fixed-step RK4 on the PWA field with per-stage point location. Stops
/// with the exit flag once a stage point leaves the domain.
Trajectory simulate(const PwaDynamics& d, const Point& x0, double T, double dt,
                    const BarrierCandidate* b = nullptr);

/// Samples n_traj starts with h(x0) >= margin and simulates each; true iff
/// h never drops below -10*dt and no trajectory leaves the domain.
bool invariance_test(const PwaDynamics& d, const BarrierCandidate& b, int n_traj,
                     double T, double dt, double margin, std::uint64_t seed = 2024);

}  // namespace pwabf
