#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "treedyn/tree.hpp"

namespace oracle {

// Brute-force path metric: splice both points into the edge they sit on and
// walk the resulting graph. Independent of the sparse-table machinery.
template <class R>
R distance(const treedyn::MetricTree<R>& T, treedyn::TreePoint<R> p, treedyn::TreePoint<R> q) {
    using treedyn::EdgeId;
    p = T.canonical(p);
    q = T.canonical(q);
    int V = T.vertex_count();
    int P = V, Q = V + 1;
    struct Arc {
        int to;
        R w;
    };
    std::vector<std::vector<Arc>> adj(static_cast<std::size_t>(V + 2));
    auto link = [&](int u, int v, const R& w) {
        adj[static_cast<std::size_t>(u)].push_back({v, w});
        adj[static_cast<std::size_t>(v)].push_back({u, w});
    };
    for (EdgeId e = 0; e < T.edge_count(); ++e) {
        const auto& ed = T.edge(e);
        std::vector<std::pair<R, int>> cuts{{R(0), ed.a}, {ed.length, ed.b}};
        if (p.edge == e) cuts.push_back({p.offset, P});
        if (q.edge == e) cuts.push_back({q.offset, Q});
        std::sort(cuts.begin(), cuts.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
            link(cuts[k].second, cuts[k + 1].second, cuts[k + 1].first - cuts[k].first);
    }
    // the spliced graph is still a tree; depth-first from P finds Q once
    std::vector<char> seen(adj.size(), 0);
    std::vector<std::pair<int, R>> stack{{P, R(0)}};
    seen[static_cast<std::size_t>(P)] = 1;
    while (!stack.empty()) {
        auto [u, d] = stack.back();
        stack.pop_back();
        if (u == Q) return d;
        for (const auto& a : adj[static_cast<std::size_t>(u)]) {
            if (seen[static_cast<std::size_t>(a.to)]) continue;
            seen[static_cast<std::size_t>(a.to)] = 1;
            stack.push_back({a.to, d + a.w});
        }
    }
    throw treedyn::InternalError("oracle: point graph is disconnected");
}

// Reachability by paths of length >= 1 (Floyd-Warshall on bit rows).
inline std::vector<std::vector<char>> transitive_closure(
    const std::vector<std::vector<int>>& arcs) {
    auto n = arcs.size();
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (std::size_t u = 0; u < n; ++u)
        for (int v : arcs[u]) reach[u][static_cast<std::size_t>(v)] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t u = 0; u < n; ++u) {
            if (!reach[u][k]) continue;
            const auto& rk = reach[k];
            auto& ru = reach[u];
            for (std::size_t v = 0; v < n; ++v)
                if (rk[v]) ru[v] = 1;
        }
    return reach;
}

// xorshift64*: portable deterministic stream for test instance generation
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next() {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        return state * 0x2545f4914f6cdd1dull;
    }
    // uniform in [0, bound)
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

}  // namespace oracle
