#include "pwabf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace pwabf {

double evaluate_barrier(const BarrierCandidate& b, const PwaDynamics& d, const Point& x,
                        double tol) {
    int id = locate_cell(d, x, tol);
    if (id < 0) throw OutOfDomain("evaluate_barrier: point outside the partition");
    return b.value(id, x);
}

CertificateReport check_certificate(const BarrierCandidate& b, const PwaDynamics& d,
                                    const IndexSets& idx, AlphaGain alpha, Epsilons eps,
                                    int samples_per_cell) {
    CertificateReport rep;
    const auto& pool = d.vertex_pool();
    const double tol = kContinuityTol;

    rep.worst_boundary_value = -std::numeric_limits<double>::infinity();
    for (const auto& [cell, vid] : idx.boundary_pairs) {
        double h = b.value(cell, pool[vid]);
        rep.worst_boundary_value = std::max(rep.worst_boundary_value, h);
        if (h > -eps.eps1 + tol) {
            std::ostringstream os;
            os << "boundary: h_" << cell << "(v" << vid << ") = " << h;
            rep.violations.push_back(os.str());
        }
    }
    rep.boundary_ok = rep.worst_boundary_value <= -eps.eps1 + tol;

    rep.worst_continuity_gap = 0.0;
    for (std::size_t vid = 0; vid < pool.size(); ++vid) {
        const auto& own = d.owners()[vid];
        for (std::size_t i = 0; i < own.size(); ++i)
            for (std::size_t j = i + 1; j < own.size(); ++j) {
                double gap =
                    std::abs(b.value(own[i], pool[vid]) - b.value(own[j], pool[vid]));
                rep.worst_continuity_gap = std::max(rep.worst_continuity_gap, gap);
                if (gap > tol) {
                    std::ostringstream os;
                    os << "continuity: cells " << own[i] << "," << own[j] << " at v"
                       << vid << " gap " << gap;
                    rep.violations.push_back(os.str());
                }
            }
    }
    rep.continuity_ok = rep.worst_continuity_gap <= tol;

    auto nagumo_margin = [&](const Cell& c, const Point& x) {
        Vec flow = c.A * x + c.a;
        return b.p[c.id].dot(flow) + alpha.alpha_tilde * b.value(c.id, x);
    };

    rep.worst_nagumo_vertex = std::numeric_limits<double>::infinity();
    for (const Cell& c : d.cells())
        for (const Point& v : c.vrep.vertices) {
            double m = nagumo_margin(c, v);
            rep.worst_nagumo_vertex = std::min(rep.worst_nagumo_vertex, m);
            if (m < eps.eps3 - tol) {
                std::ostringstream os;
                os << "flow condition: cell " << c.id << " vertex margin " << m;
                rep.violations.push_back(os.str());
            }
        }
    rep.nagumo_vertex_ok = rep.worst_nagumo_vertex >= eps.eps3 - tol;

    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    rep.worst_nagumo_sampled = std::numeric_limits<double>::infinity();
    for (const Cell& c : d.cells())
        for (int s = 0; s < samples_per_cell; ++s) {
            Point x = sample_in_cell(c, rng);
            double m = nagumo_margin(c, x);
            rep.worst_nagumo_sampled = std::min(rep.worst_nagumo_sampled, m);
            if (m < eps.eps3 - tol) {
                std::ostringstream os;
                os << "flow condition (sampled): cell " << c.id << " margin " << m;
                rep.violations.push_back(os.str());
            }
        }
    rep.nagumo_sampled_ok = rep.worst_nagumo_sampled >= eps.eps3 - tol;
    return rep;
}

Trajectory simulate(const PwaDynamics& d, const Point& x0, double T, double dt,
                    const BarrierCandidate* b) {
    if (dt <= 0 || T < 0) throw DegenerateInput("simulate: need T >= 0 and dt > 0");
    int hint = locate_cell(d, x0, kGeomTol);
    if (hint < 0) throw OutOfDomain("simulate: x0 outside the partition");

    Trajectory traj;
    auto record = [&](double t, const Point& x, int cell) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        if (b) traj.h.push_back(b->value(cell, x));
    };

    Point x = x0;
    record(0.0, x, hint);
    const long steps = std::lround(T / dt);
    for (long k = 0; k < steps; ++k) {
        double t = k * dt;
        // Classic RK4 with point location at every stage.
        auto field = [&](const Point& y, bool& ok) -> Vec {
            int id = locate_cell(d, y, kGeomTol, hint);
            if (id < 0) {
                ok = false;
                return Vec::Zero(d.dim());
            }
            hint = id;
            const Cell& c = d.cell(id);
            return c.A * y + c.a;
        };
        bool ok = true;
        Vec k1 = field(x, ok);
        Vec k2 = ok ? field(x + 0.5 * dt * k1, ok) : k1;
        Vec k3 = ok ? field(x + 0.5 * dt * k2, ok) : k1;
        Vec k4 = ok ? field(x + dt * k3, ok) : k1;
        Point next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        int next_cell = ok ? locate_cell(d, next, kGeomTol, hint) : -1;
        if (!ok || next_cell < 0) {
            traj.exited = true;
            traj.exit_time = t;
            return traj;
        }
        hint = next_cell;
        x = next;
        record((k + 1) * dt, x, next_cell);
    }
    return traj;
}

bool invariance_test(const PwaDynamics& d, const BarrierCandidate& b, int n_traj,
                     double T, double dt, double margin, std::uint64_t seed) {
    if (n_traj == 0) return true;
    // Domain bounding box for rejection sampling.
    Vec lo = d.vertex_pool().front(), hi = lo;
    for (const Point& v : d.vertex_pool()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double allowance = -10.0 * dt;

    long rejections = 0;
    for (int i = 0; i < n_traj; ++i) {
        Point x0(d.dim());
        int cell = -1;
        while (true) {
            for (int j = 0; j < d.dim(); ++j) x0[j] = lo[j] + unif(rng) * (hi[j] - lo[j]);
            cell = locate_cell(d, x0, kGeomTol);
            if (cell >= 0 && b.value(cell, x0) >= margin) break;
            if (++rejections > 100000)
                throw SamplingFailure(
                    "invariance_test: no starting points with the requested margin");
        }
        Trajectory traj = simulate(d, x0, T, dt, &b);
        if (traj.exited) return false;
        for (double h : traj.h)
            if (h < allowance) return false;
    }
    return true;
}

}  // namespace pwabf
