// pwabf: synthesis and verification of piecewise-affine barrier functions
// for continuous PWA dynamics on bounded polytopal partitions.
//
// Exit codes: 0 success, 2 budget exhausted, 3 certificate check failed,
// 4 no valid gain in the interval, 64 unreadable/malformed input,
// 65 partition hash mismatch, 66 start outside the domain,
// 67 too many neurons, 68 system not two-dimensional.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pwabf/io.hpp"
#include "pwabf/search.hpp"
#include "pwabf/verify.hpp"

namespace {

using namespace pwabf;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitBudget = 2;
constexpr int kExitCheckFailed = 3;
constexpr int kExitNoValidAlpha = 4;
constexpr int kExitBadInput = 64;
constexpr int kExitHashMismatch = 65;
constexpr int kExitOutOfDomain = 66;
constexpr int kExitTooManyNeurons = 67;
constexpr int kExitNotTwoDimensional = 68;

bool log_info() {
    const char* v = std::getenv("PWA_LOG");
    return v == nullptr || std::string(v) != "quiet";
}

Vec parse_csv_vector(const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    Vec v(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
    return v;
}

Epsilons parse_eps(const std::string& s) {
    Vec v = parse_csv_vector(s);
    if (v.size() == 1) return Epsilons{v[0], v[0], v[0]};
    if (v.size() == 3) return Epsilons{v[0], v[1], v[2]};
    throw DegenerateInput("--eps expects one or three comma-separated values");
}

/// Loads either a system file or a network file (converted on the fly).
PwaDynamics load_system_or_network(const std::string& path) {
    json j = io::load_json_file(path);
    if (io::looks_like_network(j)) {
        io::NetworkFile nf = io::load_network(path);
        return enumerate_regions(nf.net, nf.box);
    }
    return io::system_from_json(j);
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

int cmd_synthesize(const std::string& input, double alpha, const std::string& eps_str,
                   double budget_s, const std::string& out_prefix) {
    PwaDynamics d = load_system_or_network(input);
    Epsilons eps = parse_eps(eps_str);
    auto violations = check_continuity(d);
    if (!violations.empty()) {
        std::cerr << "input system is discontinuous (" << violations.size()
                  << " vertex gaps, worst " << violations.front().gap << ")\n";
        return kExitBadInput;
    }
    SynthesisResult res = synthesize(d, AlphaGain{alpha}, eps, budget_s);
    if (res.valid()) {
        std::string hash = io::partition_hash(res.dynamics);
        io::save_system(res.dynamics, out_prefix + ".system.json");
        io::save_barrier(res.barrier, AlphaGain{alpha}, eps, hash,
                         out_prefix + ".barrier.json");
        if (log_info())
            std::cerr << "valid barrier after " << res.iterations << " iterations, "
                      << res.initial_cells << " -> " << res.final_cells << " cells, "
                      << res.elapsed_seconds << "s\n";
        std::cout << out_prefix << ".barrier.json\n";
        return kExitOk;
    }
    json diag;
    diag["status"] = "budget_exhausted";
    diag["iterations"] = res.iterations;
    diag["initial_cells"] = res.initial_cells;
    diag["final_cells"] = res.final_cells;
    diag["elapsed_seconds"] = res.elapsed_seconds;
    diag["returned_best_iterate"] = res.returned_best_iterate;
    json hist = json::array();
    for (const IterationLog& it : res.history) {
        json h;
        h["cells"] = it.cells;
        h["sum_tau_b"] = it.sum_tau_b;
        h["sum_tau_int"] = it.sum_tau_int;
        h["lp_seconds"] = it.lp_seconds;
        hist.push_back(std::move(h));
    }
    diag["history"] = std::move(hist);
    io::write_text_file(out_prefix + ".diagnostics.json", io::canonical_dump(diag) + "\n");
    std::cerr << "no valid barrier within the budget; diagnostics written\n";
    return kExitBudget;
}

int cmd_check(const std::string& system_path, const std::string& barrier_path) {
    PwaDynamics d = io::load_system(system_path);
    io::BarrierFile bf = io::load_barrier(barrier_path);
    if (bf.partition_hash != io::partition_hash(d)) {
        std::cerr << "partition hash mismatch: barrier certifies a different "
                     "partition generation\n";
        return kExitHashMismatch;
    }
    if (bf.barrier.num_cells() != d.num_cells()) {
        std::cerr << "barrier has " << bf.barrier.num_cells() << " cells, system has "
                  << d.num_cells() << "\n";
        return kExitBadInput;
    }
    IndexSets idx = build_index_sets(d);
    CertificateReport rep = check_certificate(bf.barrier, d, idx, bf.alpha, bf.eps);
    std::cout << "boundary_ok " << (rep.boundary_ok ? "yes" : "no")
              << " (worst value " << rep.worst_boundary_value << ")\n"
              << "continuity_ok " << (rep.continuity_ok ? "yes" : "no")
              << " (worst gap " << rep.worst_continuity_gap << ")\n"
              << "nagumo_vertex_ok " << (rep.nagumo_vertex_ok ? "yes" : "no")
              << " (worst margin " << rep.worst_nagumo_vertex << ")\n"
              << "nagumo_sampled_ok " << (rep.nagumo_sampled_ok ? "yes" : "no")
              << " (worst margin " << rep.worst_nagumo_sampled << ")\n";
    for (const std::string& v : rep.violations) std::cerr << "violation: " << v << "\n";
    return rep.all_ok() ? kExitOk : kExitCheckFailed;
}

int cmd_simulate(const std::string& system_path, const std::string& x0_str, double T,
                 double dt, const std::string& barrier_path, const std::string& out_csv) {
    PwaDynamics d = io::load_system(system_path);
    Vec x0 = parse_csv_vector(x0_str);
    if (x0.size() != d.dim()) {
        std::cerr << "--x0 has dimension " << x0.size() << ", system is " << d.dim()
                  << "-dimensional\n";
        return kExitBadInput;
    }
    std::optional<io::BarrierFile> bf;
    if (!barrier_path.empty()) {
        bf = io::load_barrier(barrier_path);
        if (bf->partition_hash != io::partition_hash(d)) {
            std::cerr << "partition hash mismatch\n";
            return kExitHashMismatch;
        }
    }
    Trajectory traj;
    try {
        traj = simulate(d, x0, T, dt, bf ? &bf->barrier : nullptr);
    } catch (const OutOfDomain&) {
        std::cerr << "x0 lies outside the partition domain\n";
        return kExitOutOfDomain;
    }
    std::ostringstream csv;
    csv << "t";
    for (int i = 0; i < d.dim(); ++i) csv << ",x" << (i + 1);
    csv << ",h\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        csv << csv_number(traj.times[k]);
        for (int i = 0; i < d.dim(); ++i) csv << "," << csv_number(traj.states[k][i]);
        csv << ",";
        if (!traj.h.empty()) csv << csv_number(traj.h[k]);
        csv << "\n";
    }
    io::write_text_file(out_csv, csv.str());
    if (traj.exited && log_info())
        std::cerr << "trajectory left the domain at t=" << traj.exit_time << "\n";
    return kExitOk;
}

int cmd_bisect_alpha(const std::string& system_path, const std::string& interval_str,
                     double alpha_tol, double probe_budget_s, const std::string& eps_str,
                     const std::string& out_prefix) {
    PwaDynamics d = load_system_or_network(system_path);
    Vec interval = parse_csv_vector(interval_str);
    if (interval.size() != 2) {
        std::cerr << "--interval expects lo,hi\n";
        return kExitBadInput;
    }
    Epsilons eps = parse_eps(eps_str);
    AlphaSearchResult res =
        bisect_alpha(d, interval[0], interval[1], eps, alpha_tol, probe_budget_s);
    for (const AlphaProbe& p : res.probes)
        std::cout << "probe alpha=" << p.alpha << " " << (p.valid ? "valid" : "invalid")
                  << "\n";
    if (!res.found()) {
        std::cerr << "no valid gain in the interval (lower endpoint already fails)\n";
        return kExitNoValidAlpha;
    }
    std::cout << "best alpha " << res.best_alpha << "\n";
    if (res.extend_interval_hint)
        std::cerr << "upper endpoint is valid; consider extending the interval\n";
    if (!out_prefix.empty() && res.best) {
        std::string hash = io::partition_hash(res.best->dynamics);
        io::save_system(res.best->dynamics, out_prefix + ".system.json");
        io::save_barrier(res.best->barrier, AlphaGain{res.best_alpha}, eps, hash,
                         out_prefix + ".barrier.json");
    }
    return kExitOk;
}

int cmd_relu2pwa(const std::string& network_path, const std::string& out_path) {
    io::NetworkFile nf = io::load_network(network_path);
    PwaDynamics d = enumerate_regions(nf.net, nf.box);
    io::save_system(d, out_path);
    std::cout << d.num_cells() << "\n";
    return kExitOk;
}

int cmd_levelset(const std::string& system_path, const std::string& barrier_path,
                 const std::string& out_csv) {
    PwaDynamics d = io::load_system(system_path);
    if (d.dim() != 2) {
        std::cerr << "level-set export needs a two-dimensional system\n";
        return kExitNotTwoDimensional;
    }
    io::BarrierFile bf = io::load_barrier(barrier_path);
    if (bf.partition_hash != io::partition_hash(d)) {
        std::cerr << "partition hash mismatch\n";
        return kExitHashMismatch;
    }
    std::ostringstream csv;
    csv << "cell,x0,y0,x1,y1\n";
    for (const Cell& c : d.cells()) {
        // Zero crossings of h on the polygon boundary, walked in CCW order.
        std::vector<int> order = order_ccw(c.vrep.vertices);
        std::vector<Point> crossings;
        const std::size_t m = order.size();
        for (std::size_t k = 0; k < m; ++k) {
            const Point& a = c.vrep.vertices[order[k]];
            const Point& b = c.vrep.vertices[order[(k + 1) % m]];
            double ha = bf.barrier.value(c.id, a);
            double hb = bf.barrier.value(c.id, b);
            if (ha == 0.0) crossings.push_back(a);
            if ((ha < 0.0 && hb > 0.0) || (ha > 0.0 && hb < 0.0)) {
                double t = ha / (ha - hb);
                crossings.push_back(a + t * (b - a));
            }
        }
        std::vector<Point> uniq;
        for (const Point& p : crossings) {
            bool dup = false;
            for (const Point& q : uniq)
                if ((p - q).lpNorm<Eigen::Infinity>() < 1e-10) dup = true;
            if (!dup) uniq.push_back(p);
        }
        if (uniq.size() == 2)
            csv << c.id << "," << csv_number(uniq[0][0]) << "," << csv_number(uniq[0][1])
                << "," << csv_number(uniq[1][0]) << "," << csv_number(uniq[1][1]) << "\n";
    }
    io::write_text_file(out_csv, csv.str());
    return kExitOk;
}

int cmd_dump_lp(const std::string& system_path, double alpha, const std::string& eps_str,
                const std::string& out_path) {
    PwaDynamics d = load_system_or_network(system_path);
    IndexSets idx = build_index_sets(d);
    BarrierLp lp = assemble(d, idx, AlphaGain{alpha}, parse_eps(eps_str));
    io::write_text_file(out_path, lp::to_lp_format(lp.model, lp.var_names()));
    std::cout << lp.model.num_rows() << " rows, " << lp.model.num_vars() << " columns\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piecewise-affine barrier synthesis for PWA dynamics"};
    app.require_subcommand(1);

    std::string input, system_path, barrier_path, out, x0_str, interval_str;
    std::string eps_str = "1e-4";
    double alpha = 1.0, budget_s = 3600.0, T = 10.0, dt = 1e-3;
    double alpha_tol = 0.05, probe_budget_s = 300.0;

    auto* syn = app.add_subcommand("synthesize", "Search for a valid barrier");
    syn->add_option("input", input, "System or network JSON file")->required();
    syn->add_option("--alpha", alpha, "Linear class-K gain")->required();
    syn->add_option("--eps", eps_str, "eps1[,eps2,eps3] margins");
    syn->add_option("--budget-s", budget_s, "Wall-clock budget in seconds");
    syn->add_option("--out", out, "Output prefix")->required();

    auto* chk = app.add_subcommand("check", "Verify a barrier certificate");
    chk->add_option("system", system_path, "System JSON file")->required();
    chk->add_option("barrier", barrier_path, "Barrier JSON file")->required();

    auto* sim = app.add_subcommand("simulate", "Integrate the PWA flow");
    sim->add_option("system", system_path, "System JSON file")->required();
    sim->add_option("--x0", x0_str, "Initial state, comma separated")->required();
    sim->add_option("--T", T, "Horizon in seconds");
    sim->add_option("--dt", dt, "Step size in seconds");
    sim->add_option("--barrier", barrier_path, "Barrier JSON file (records h)");
    sim->add_option("--out", out, "Output CSV path")->required();

    auto* bis = app.add_subcommand("bisect-alpha", "Largest valid class-K gain");
    bis->add_option("system", system_path, "System or network JSON file")->required();
    bis->add_option("--interval", interval_str, "lo,hi gain interval")->required();
    bis->add_option("--alpha-tol", alpha_tol, "Bracket width tolerance");
    bis->add_option("--probe-budget-s", probe_budget_s, "Budget per probe");
    bis->add_option("--eps", eps_str, "eps1[,eps2,eps3] margins");
    bis->add_option("--out", out, "Output prefix for the best barrier");

    auto* r2p = app.add_subcommand("relu2pwa", "Exact PWA form of a ReLU network");
    r2p->add_option("network", input, "Network JSON file")->required();
    r2p->add_option("--out", out, "Output system JSON path")->required();

    auto* lvl = app.add_subcommand("levelset", "Zero level set segments (2-D)");
    lvl->add_option("system", system_path, "System JSON file")->required();
    lvl->add_option("barrier", barrier_path, "Barrier JSON file")->required();
    lvl->add_option("--out", out, "Output CSV path")->required();

    auto* dlp = app.add_subcommand("dump-lp", "Write the synthesis LP in text form");
    dlp->add_option("system", system_path, "System or network JSON file")->required();
    dlp->add_option("--alpha", alpha, "Linear class-K gain")->required();
    dlp->add_option("--eps", eps_str, "eps1[,eps2,eps3] margins");
    dlp->add_option("--out", out, "Output .lp path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (syn->parsed()) return cmd_synthesize(input, alpha, eps_str, budget_s, out);
        if (chk->parsed()) return cmd_check(system_path, barrier_path);
        if (sim->parsed())
            return cmd_simulate(system_path, x0_str, T, dt, barrier_path, out);
        if (bis->parsed())
            return cmd_bisect_alpha(system_path, interval_str, alpha_tol, probe_budget_s,
                                    eps_str, out);
        if (r2p->parsed()) return cmd_relu2pwa(input, out);
        if (lvl->parsed()) return cmd_levelset(system_path, barrier_path, out);
        if (dlp->parsed()) return cmd_dump_lp(system_path, alpha, eps_str, out);
    } catch (const TooManyNeurons& ex) {
        std::cerr << ex.what() << "\n";
        return kExitTooManyNeurons;
    } catch (const OutOfDomain& ex) {
        std::cerr << ex.what() << "\n";
        return kExitOutOfDomain;
    } catch (const Error& ex) {
        std::cerr << ex.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& ex) {
        std::cerr << ex.what() << "\n";
        return kExitBadInput;
    }
    return kExitBadInput;
}
