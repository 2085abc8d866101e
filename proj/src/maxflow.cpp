#include "sf/maxflow.h"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>

namespace sf {

double BinaryMrf::energy(const std::vector<uint8_t>& labels) const {
    double e = 0.0;
    for (int i = 0; i < num_nodes(); ++i) e += labels[i] ? cost1_[i] : cost0_[i];
    for (const Edge& edge : edges_)
        if (labels[edge.a] != labels[edge.b]) e += edge.weight;
    return e;
}

GraphCutSolver::GraphCutSolver(const BinaryMrf& mrf) : mrf_copy_(mrf) { build(mrf); }

void GraphCutSolver::build(const BinaryMrf& mrf) {
    n_ = mrf.num_nodes();
    num_edges_ = mrf.edges().size();
    excess_.assign(n_, 0.0);
    side_.assign(n_, 0);
    const_term_ = 0.0;

    arcs_.clear();
    first_.assign(n_, -1);
    next_.clear();

    auto add_arc = [&](int a, int b, double cap_ab, double cap_ba) {
        const int ia = static_cast<int>(arcs_.size());
        arcs_.push_back({b, ia + 1, cap_ab});
        arcs_.push_back({a, ia, cap_ba});
        next_.push_back(first_[a]);
        first_[a] = ia;
        next_.push_back(first_[b]);
        first_[b] = ia + 1;
    };

    // Accumulate effective unaries (node costs plus folded fixed-neighbor edge
    // costs) per free node, then collapse each pair to a single terminal
    // excess. Taking the min only after summing keeps the reported energy
    // equal to the labeling's energy under the original costs.
    std::vector<double> eff0(n_, 0.0), eff1(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        const auto c = mrf.constraint(i);
        if (c == BinaryMrf::kForceBackground) {
            side_[i] = 1;  // permanently source side (label 0)
            const_term_ += mrf.cost0(i);
            continue;
        }
        if (c == BinaryMrf::kForceForeground) {
            side_[i] = 2;  // permanently sink side (label 1)
            const_term_ += mrf.cost1(i);
            continue;
        }
        eff0[i] = mrf.cost0(i);
        eff1[i] = mrf.cost1(i);
    }

    for (const auto& e : mrf.edges()) {
        const bool a_fixed = side_[e.a] != 0, b_fixed = side_[e.b] != 0;
        if (a_fixed && b_fixed) {
            if (side_[e.a] != side_[e.b]) const_term_ += e.weight;
            continue;
        }
        if (a_fixed || b_fixed) {
            const int free_node = a_fixed ? e.b : e.a;
            const int fixed_side = a_fixed ? side_[e.a] : side_[e.b];
            // Disagreeing with a fixed label-0 neighbor costs w when free takes 1.
            if (fixed_side == 2) eff0[free_node] += e.weight;
            if (fixed_side == 1) eff1[free_node] += e.weight;
            continue;
        }
        add_arc(e.a, e.b, e.weight, e.weight);
    }

    for (int i = 0; i < n_; ++i) {
        if (side_[i] != 0) continue;
        const_term_ += std::min(eff0[i], eff1[i]);
        excess_[i] = eff1[i] - eff0[i];  // >0: source cap, <0: sink cap
    }
}

double GraphCutSolver::maxflow() {
    // Dinic with implicit terminals held in excess_.
    const double inf = std::numeric_limits<double>::infinity();
    double flow = 0.0;

    // Saturate trivial source->node->sink pairs is not needed; handled by phases.
    std::vector<int> level(n_);
    std::vector<int> iter(n_);

    auto bfs = [&]() {
        std::fill(level.begin(), level.end(), -1);
        std::queue<int> q;
        for (int i = 0; i < n_; ++i) {
            if (side_[i] == 0 && excess_[i] > 0) {
                level[i] = 0;
                q.push(i);
            }
        }
        bool reached_sink = false;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            if (excess_[u] < 0) reached_sink = true;
            for (int a = first_[u]; a != -1; a = next_[a]) {
                const Arc& arc = arcs_[a];
                if (arc.cap > 0 && level[arc.head] < 0) {
                    level[arc.head] = level[u] + 1;
                    q.push(arc.head);
                }
            }
        }
        return reached_sink;
    };

    std::function<double(int, double)> dfs = [&](int u, double limit) -> double {
        if (excess_[u] < 0) {
            const double pushed = std::min(limit, -excess_[u]);
            excess_[u] += pushed;
            return pushed;
        }
        for (int& a = iter[u]; a != -1; a = next_[a]) {
            Arc& arc = arcs_[a];
            if (arc.cap > 0 && level[arc.head] == level[u] + 1) {
                const double pushed = dfs(arc.head, std::min(limit, arc.cap));
                if (pushed > 0) {
                    arc.cap -= pushed;
                    arcs_[arc.sister].cap += pushed;
                    return pushed;
                }
            }
        }
        level[u] = -1;
        return 0.0;
    };

    while (bfs()) {
        for (int i = 0; i < n_; ++i) iter[i] = first_[i];
        for (int i = 0; i < n_; ++i) {
            if (side_[i] != 0) continue;
            while (excess_[i] > 0) {
                const double pushed = dfs(i, excess_[i]);
                if (pushed <= 0) break;
                excess_[i] -= pushed;
                flow += pushed;
            }
        }
    }
    return flow;
}

MinCutResult GraphCutSolver::solve() {
    const double flow = maxflow();

    // Residual reachability from remaining source excess: reachable = label 0.
    std::vector<uint8_t> reachable(n_, 0);
    std::queue<int> q;
    for (int i = 0; i < n_; ++i) {
        if (side_[i] == 0 && excess_[i] > 0) {
            reachable[i] = 1;
            q.push(i);
        }
    }
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int a = first_[u]; a != -1; a = next_[a]) {
            const Arc& arc = arcs_[a];
            if (arc.cap > 0 && !reachable[arc.head]) {
                reachable[arc.head] = 1;
                q.push(arc.head);
            }
        }
    }

    MinCutResult res;
    res.labels.assign(n_, 0);
    for (int i = 0; i < n_; ++i) {
        if (side_[i] == 1) res.labels[i] = 0;
        else if (side_[i] == 2) res.labels[i] = 1;
        else res.labels[i] = reachable[i] ? 0 : 1;
    }
    res.energy = const_term_ + flow;
    return res;
}

MinCutResult GraphCutSolver::resolve(const BinaryMrf& updated) {
    if (updated.num_nodes() != mrf_copy_.num_nodes() ||
        updated.edges().size() != num_edges_)
        throw std::invalid_argument("GraphCutSolver::resolve: topology changed");
    for (size_t i = 0; i < num_edges_; ++i) {
        if (updated.edges()[i].a != mrf_copy_.edges()[i].a ||
            updated.edges()[i].b != mrf_copy_.edges()[i].b)
            throw std::invalid_argument("GraphCutSolver::resolve: topology changed");
    }
    mrf_copy_ = updated;
    build(updated);
    return solve();
}

}  // namespace sf
