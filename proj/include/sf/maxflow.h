#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sf {

/// Binary MRF with per-node unary costs and nonnegative Potts pairwise weights.
/// Labels: 0 = background, 1 = foreground. Solvable exactly by min-cut.
class BinaryMrf {
public:
    enum Constraint : uint8_t { kFree = 0, kForceBackground = 1, kForceForeground = 2 };

    explicit BinaryMrf(int num_nodes)
        : cost0_(num_nodes, 0.0), cost1_(num_nodes, 0.0), constraint_(num_nodes, kFree) {}

    int num_nodes() const { return static_cast<int>(cost0_.size()); }

    void set_unary(int node, double cost_background, double cost_foreground) {
        cost0_[node] = cost_background;
        cost1_[node] = cost_foreground;
    }
    void add_unary(int node, double cost_background, double cost_foreground) {
        cost0_[node] += cost_background;
        cost1_[node] += cost_foreground;
    }
    double cost0(int node) const { return cost0_[node]; }
    double cost1(int node) const { return cost1_[node]; }

    /// Potts weight >= 0 between two nodes; negative weights are rejected.
    void add_edge(int a, int b, double weight) {
        if (weight < 0) throw std::invalid_argument("BinaryMrf: negative pairwise weight");
        edges_.push_back({a, b, weight});
    }

    void set_constraint(int node, Constraint c) { constraint_[node] = c; }
    Constraint constraint(int node) const { return constraint_[node]; }

    struct Edge {
        int a, b;
        double weight;
    };
    const std::vector<Edge>& edges() const { return edges_; }

    /// Energy of a labeling under this MRF (constraints not enforced here).
    double energy(const std::vector<uint8_t>& labels) const;

private:
    std::vector<double> cost0_, cost1_;
    std::vector<Constraint> constraint_;
    std::vector<Edge> edges_;
};

struct MinCutResult {
    std::vector<uint8_t> labels;  // 0 / 1 per node
    double energy = 0.0;
};

/// Globally optimal labeling via augmenting-path max-flow (BK-style trees).
class GraphCutSolver {
public:
    explicit GraphCutSolver(const BinaryMrf& mrf);

    MinCutResult solve();

    /// Re-solve after unary updates. Topology (edge set, node count) must be
    /// unchanged; result is identical to a fresh solve.
    MinCutResult resolve(const BinaryMrf& updated);

private:
    void build(const BinaryMrf& mrf);
    double maxflow();

    struct Arc {
        int head;     // target node
        int sister;   // index of reverse arc
        double cap;   // residual capacity
    };

    int n_ = 0;
    size_t num_edges_ = 0;
    std::vector<Arc> arcs_;
    std::vector<int> first_;     // adjacency: first arc per node (chained via next_)
    std::vector<int> next_;
    std::vector<double> excess_;  // >0: source surplus, <0: sink surplus (t-link residual)
    std::vector<uint8_t> side_;
    double const_term_ = 0.0;
    BinaryMrf mrf_copy_;
};

inline MinCutResult min_cut(const BinaryMrf& mrf) { return GraphCutSolver(mrf).solve(); }

}  // namespace sf
