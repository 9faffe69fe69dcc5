#include "pwabf/relu.hpp"

#include <algorithm>

namespace pwabf {

namespace {

constexpr double kMinCellRadius = 1e-7;

struct Enumerator {
    const ReluNet& net;
    const HPolytope& box;
    std::vector<std::string>* discarded;
    std::vector<CellSpec> cells;
    std::vector<int> signs;  // -1 inactive, +1 active, per decided neuron

    double partial_radius() const {
        int extra = 0;
        for (std::size_t j = 0; j < signs.size(); ++j)
            if (net.W1.row(j).norm() >= 1e-12) ++extra;
        Mat E(box.num_rows() + extra, box.dim());
        Vec e(box.num_rows() + extra);
        E.topRows(box.num_rows()) = box.E;
        e.head(box.num_rows()) = box.e;
        int r = box.num_rows();
        for (std::size_t j = 0; j < signs.size(); ++j) {
            if (net.W1.row(j).norm() < 1e-12) continue;
            E.row(r) = signs[j] * net.W1.row(j);
            e[r] = signs[j] * net.b1[j];
            ++r;
        }
        return chebyshev_center(HPolytope(E, e)).radius;
    }

    void emit_cell() {
        const int n = net.input_dim();
        Vec sigma(net.hidden_dim());
        for (int j = 0; j < net.hidden_dim(); ++j) sigma[j] = signs[j] > 0 ? 1.0 : 0.0;
        Mat gated = sigma.asDiagonal() * net.W1;
        CellSpec spec;
        spec.A = net.W2 * gated;
        spec.a = net.W2 * sigma.cwiseProduct(net.b1) + net.b2;
        int extra = 0;
        for (int j = 0; j < net.hidden_dim(); ++j)
            if (net.W1.row(j).norm() >= 1e-12) ++extra;
        Mat E(box.num_rows() + extra, n);
        Vec e(box.num_rows() + extra);
        E.topRows(box.num_rows()) = box.E;
        e.head(box.num_rows()) = box.e;
        int r = box.num_rows();
        for (int j = 0; j < net.hidden_dim(); ++j) {
            if (net.W1.row(j).norm() < 1e-12) continue;
            E.row(r) = signs[j] * net.W1.row(j);
            e[r] = signs[j] * net.b1[j];
            ++r;
        }
        // Rebuild an irredundant facet system through the vertex set.
        VPolytope vrep = vertices_of(HPolytope(E, e));
        spec.vertices = vrep.vertices;
        HPolytope clean = hrep_of(vrep);
        spec.E = clean.E;
        spec.e = clean.e;
        cells.push_back(std::move(spec));
    }

    void dfs(int neuron) {
        if (neuron == net.hidden_dim()) {
            emit_cell();
            return;
        }
        // Inactive branch first: lexicographic pattern order with 0 < 1.
        for (int s : {-1, +1}) {
            if (net.W1.row(neuron).norm() < 1e-12) {
                // Constant neuron: only the sign of its bias is feasible.
                int forced = net.b1[neuron] >= 0.0 ? +1 : -1;
                if (s != forced) continue;
            }
            signs.push_back(s);
            double radius = partial_radius();
            if (radius > kMinCellRadius)
                dfs(neuron + 1);
            else if (radius > 1e-9 && discarded)
                record_discard();  // nonempty but lower-dimensional subtree
            signs.pop_back();
        }
    }

    void record_discard() {
        std::string bits;
        for (int s : signs) bits.push_back(s > 0 ? '1' : '0');
        discarded->push_back(bits);
    }
};

}  // namespace

Vec relu_forward(const ReluNet& net, const Point& x) {
    Vec h = (net.W1 * x + net.b1).cwiseMax(0.0);
    return net.W2 * h + net.b2;
}

PwaDynamics enumerate_regions(const ReluNet& net, const HPolytope& box,
                              std::vector<std::string>* discarded) {
    if (net.hidden_dim() > 25)
        throw TooManyNeurons("enumerate_regions: more than 25 hidden neurons");
    if (net.hidden_dim() < 1 || net.W2.cols() != net.hidden_dim() ||
        net.b1.size() != net.hidden_dim() || net.W2.rows() != net.b2.size() ||
        box.dim() != net.input_dim())
        throw DimensionMismatch("enumerate_regions: inconsistent network shapes");
    vertices_of(box);  // rejects unbounded or empty boxes up front

    Enumerator en{net, box, discarded, {}, {}};
    en.dfs(0);
    if (en.cells.empty()) throw EmptyPartition("enumerate_regions: no feasible pattern");
    return PwaDynamics::from_cells(en.cells);
}

}  // namespace pwabf
