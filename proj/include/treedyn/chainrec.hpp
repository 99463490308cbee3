#pragma once

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

#include "treedyn/parallel.hpp"
#include "treedyn/plmap.hpp"

namespace treedyn {

// Finite cell cover of the tree: centers spaced at most mesh/2 apart along
// every edge, vertices always included, so every point lies within mesh/2 of
// some center.
template <class R>
struct SampleGrid {
    TreePtr<R> tree;
    R mesh;
    std::vector<TreePoint<R>> centers;  // canonical, unique
    // per edge: (offset, cell) covering the whole edge incl. both endpoints
    std::vector<std::vector<std::pair<R, int>>> by_edge;
    bool short_edge_warning = false;

    int size() const { return static_cast<int>(centers.size()); }
};

template <class R>
SampleGrid<R> build_grid(TreePtr<R> tree, const R& mesh) {
    if (!tree) throw InputError("grid: null tree");
    if (!(mesh > R(0))) throw InputError("grid: mesh must be positive");
    SampleGrid<R> g;
    g.tree = tree;
    g.mesh = mesh;
    const MetricTree<R>& T = *tree;
    g.by_edge.resize(static_cast<std::size_t>(T.edge_count()));
    std::vector<int> vertex_cell(static_cast<std::size_t>(T.vertex_count()), -1);
    R half = mesh / R(2);
    auto intern = [&](const TreePoint<R>& p) {
        TreePoint<R> c = T.canonical(p);
        VertexId v = T.vertex_at(c);
        if (v >= 0 && vertex_cell[static_cast<std::size_t>(v)] >= 0)
            return vertex_cell[static_cast<std::size_t>(v)];
        int idx = static_cast<int>(g.centers.size());
        g.centers.push_back(c);
        if (v >= 0) vertex_cell[static_cast<std::size_t>(v)] = idx;
        return idx;
    };
    for (EdgeId e = 0; e < T.edge_count(); ++e) {
        const R& len = T.edge(e).length;
        if (len < half) g.short_edge_warning = true;
        long long K = 1;
        {
            // smallest K with len / K <= mesh / 2
            R q = len / half;
            K = static_cast<long long>(NumTraits<R>::to_double(q));
            while (R(K) < q) ++K;
            while (K > 1 && R(K - 1) >= q) --K;
        }
        auto& cover = g.by_edge[static_cast<std::size_t>(e)];
        for (long long j = 0; j <= K; ++j) {
            R off = len * R(j) / R(K);
            cover.push_back({off, intern({e, off})});
        }
    }
    return g;
}

// Globally nearest center. Every vertex is a center, so the nearest one is
// found among centers on the point's own edge. Ties break toward the smaller
// cell index.
template <class R>
int nearest_cell(const SampleGrid<R>& grid, const TreePoint<R>& p) {
    TreePoint<R> c = grid.tree->canonical(p);
    const auto& cover = grid.by_edge[static_cast<std::size_t>(c.edge)];
    auto it = std::lower_bound(cover.begin(), cover.end(), c.offset,
                               [](const std::pair<R, int>& a, const R& x) { return a.first < x; });
    int best = -1;
    R best_d{};
    auto consider = [&](typename std::vector<std::pair<R, int>>::const_iterator q) {
        if (q == cover.end()) return;
        R d = NumTraits<R>::abs(q->first - c.offset);
        if (best < 0 || d < best_d || (d == best_d && q->second < best)) {
            best = q->second;
            best_d = d;
        }
    };
    consider(it);
    if (it != cover.begin()) consider(std::prev(it));
    return best;
}

template <class R>
std::vector<TreePoint<R>> restrict_samples(const SampleGrid<R>& grid,
                                           const std::vector<int>& cells) {
    std::vector<TreePoint<R>> out;
    out.reserve(cells.size());
    for (int c : cells) {
        if (c < 0 || c >= grid.size()) throw InputError("restrict: cell index out of range");
        out.push_back(grid.centers[static_cast<std::size_t>(c)]);
    }
    return out;
}

// Directed graph on grid cells: arc u -> v when f(center_u) lands within
// epsilon of center_v. Paths in this graph are exactly the epsilon-chains
// through cell centers.
template <class R>
struct EpsChainGraph {
    std::shared_ptr<const SampleGrid<R>> grid;
    R epsilon;
    std::vector<std::vector<int>> arcs;  // sorted
    std::vector<int> scc_id;             // reverse topological numbering
    int scc_count = 0;
    std::vector<char> cyclic;  // cell lies on some cycle (self-loop or bigger)
    bool epsilon_below_mesh = false;
};

namespace detail {

// Iterative Tarjan; scc ids come out in reverse topological order.
inline void strongly_connected(const std::vector<std::vector<int>>& adj,
                               std::vector<int>& scc_id, int& scc_count) {
    int n = static_cast<int>(adj.size());
    scc_id.assign(static_cast<std::size_t>(n), -1);
    scc_count = 0;
    std::vector<int> index(static_cast<std::size_t>(n), -1);
    std::vector<int> low(static_cast<std::size_t>(n), 0);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    struct Frame {
        int v;
        std::size_t next;
    };
    std::vector<Frame> call;
    int counter = 0;
    for (int root = 0; root < n; ++root) {
        if (index[static_cast<std::size_t>(root)] >= 0) continue;
        call.push_back({root, 0});
        index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
        stack.push_back(root);
        on_stack[static_cast<std::size_t>(root)] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            auto v = static_cast<std::size_t>(f.v);
            if (f.next < adj[v].size()) {
                int w = adj[v][f.next++];
                auto wi = static_cast<std::size_t>(w);
                if (index[wi] < 0) {
                    index[wi] = low[wi] = counter++;
                    stack.push_back(w);
                    on_stack[wi] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[wi] && index[wi] < low[v]) {
                    low[v] = index[wi];
                }
            } else {
                if (low[v] == index[v]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[static_cast<std::size_t>(w)] = 0;
                        scc_id[static_cast<std::size_t>(w)] = scc_count;
                        if (w == f.v) break;
                    }
                    ++scc_count;
                }
                int parent_low = low[v];
                call.pop_back();
                if (!call.empty()) {
                    auto p = static_cast<std::size_t>(call.back().v);
                    if (parent_low < low[p]) low[p] = parent_low;
                }
            }
        }
    }
}

}  // namespace detail

template <class R>
EpsChainGraph<R> build_eps_chain_graph(const PLTreeMap<R>& map,
                                       std::shared_ptr<const SampleGrid<R>> grid,
                                       const R& epsilon) {
    if (!grid) throw InputError("chain graph: null grid");
    if (&map.tree() != grid->tree.get())
        throw InputError("chain graph: map and grid use different trees");
    if (epsilon < grid->mesh / R(2))
        throw InputError("chain graph: epsilon below mesh/2 makes every cell isolated");
    EpsChainGraph<R> g;
    g.grid = grid;
    g.epsilon = epsilon;
    g.epsilon_below_mesh = epsilon < grid->mesh;
    auto n = static_cast<std::size_t>(grid->size());
    g.arcs.assign(n, {});
    const auto& centers = grid->centers;
    parallel_for(n, [&](std::size_t u) {
        TreePoint<R> fu = map.evaluate(centers[u]);
        for (std::size_t v = 0; v < n; ++v)
            if (distance(map.tree(), fu, centers[v]) < epsilon)
                g.arcs[u].push_back(static_cast<int>(v));
    });
    detail::strongly_connected(g.arcs, g.scc_id, g.scc_count);
    g.cyclic.assign(n, 0);
    std::vector<int> scc_size(static_cast<std::size_t>(g.scc_count), 0);
    for (std::size_t u = 0; u < n; ++u) ++scc_size[static_cast<std::size_t>(g.scc_id[u])];
    for (std::size_t u = 0; u < n; ++u) {
        if (scc_size[static_cast<std::size_t>(g.scc_id[u])] > 1)
            g.cyclic[u] = 1;
        else if (std::binary_search(g.arcs[u].begin(), g.arcs[u].end(), static_cast<int>(u)))
            g.cyclic[u] = 1;
    }
    return g;
}

// Cells through which some epsilon-chain returns to itself.
template <class R>
std::vector<int> chain_recurrent_cells(const EpsChainGraph<R>& graph) {
    std::vector<int> out;
    for (std::size_t u = 0; u < graph.cyclic.size(); ++u)
        if (graph.cyclic[u]) out.push_back(static_cast<int>(u));
    return out;
}

// Cells whose center returns to the mesh-dilated cell within the horizon.
template <class R>
std::vector<int> nonwandering_estimate(const PLTreeMap<R>& map, const SampleGrid<R>& grid,
                                       int horizon) {
    if (horizon < 1) throw InputError("nonwandering: horizon must be at least 1");
    auto n = static_cast<std::size_t>(grid.size());
    R bound = grid.mesh * R(3) / R(2);
    std::vector<char> flag(n, 0);
    parallel_for(n, [&](std::size_t u) {
        TreePoint<R> p = grid.centers[u];
        for (int k = 0; k < horizon; ++k) {
            p = map.evaluate(p);
            if (distance(map.tree(), p, grid.centers[u]) <= bound) {
                flag[u] = 1;
                break;
            }
        }
    });
    std::vector<int> out;
    for (std::size_t u = 0; u < n; ++u)
        if (flag[u]) out.push_back(static_cast<int>(u));
    return out;
}

}  // namespace treedyn
