#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "treedyn/numeric.hpp"

namespace treedyn {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;

template <class R>
struct Edge {
    VertexId a = -1;
    VertexId b = -1;
    R length{};
};

// A position on the tree: edge id + arc-length offset from the edge's first vertex.
template <class R>
struct TreePoint {
    EdgeId edge = -1;
    R offset{};
};

template <class R>
struct PathSegment {
    EdgeId edge = -1;
    R from{};  // entry offset
    R to{};    // exit offset
};

// Finite metric tree. Immutable after build(); distance queries are O(1) via an
// Euler-tour LCA table, so the estimator loops can hammer them.
template <class R>
class MetricTree {
  public:
    static MetricTree build(int vertex_count, std::vector<Edge<R>> edges) {
        MetricTree t;
        t.edges_ = std::move(edges);
        t.vertex_count_ = vertex_count;
        t.validate_structure();
        t.index();
        return t;
    }

    int vertex_count() const { return vertex_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const Edge<R>& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
    const std::vector<EdgeId>& incident(VertexId v) const {
        return incident_[static_cast<std::size_t>(v)];
    }

    bool valid_edge(EdgeId e) const { return e >= 0 && e < edge_count(); }

    void check_point(const TreePoint<R>& p) const {
        if (!valid_edge(p.edge))
            throw InputError("invalid edge id " + std::to_string(p.edge));
        if (p.offset < R(0) || p.offset > edge(p.edge).length)
            throw InputError("point offset out of bounds on edge " + std::to_string(p.edge));
    }

    R total_length() const {
        R s{};
        for (const auto& e : edges_) s += e.length;
        return s;
    }

    // Canonical form: vertex-coincident points live on the smallest incident
    // edge id, at the matching endpoint. Makes point equality decidable.
    TreePoint<R> canonical(TreePoint<R> p) const {
        check_point(p);
        VertexId v = -1;
        if (p.offset == R(0))
            v = edge(p.edge).a;
        else if (p.offset == edge(p.edge).length)
            v = edge(p.edge).b;
        else
            return p;
        return vertex_point(v);
    }

    TreePoint<R> vertex_point(VertexId v) const {
        EdgeId e = incident_[static_cast<std::size_t>(v)].front();
        return {e, edge(e).a == v ? R(0) : edge(e).length};
    }

    bool same_point(const TreePoint<R>& p, const TreePoint<R>& q) const {
        TreePoint<R> cp = canonical(p), cq = canonical(q);
        return cp.edge == cq.edge && cp.offset == cq.offset;
    }

    // Vertex at an endpoint offset, or -1 for an interior point.
    VertexId vertex_at(const TreePoint<R>& p) const {
        if (p.offset == R(0)) return edge(p.edge).a;
        if (p.offset == edge(p.edge).length) return edge(p.edge).b;
        return -1;
    }

    R vertex_distance(VertexId u, VertexId v) const {
        VertexId w = lca(u, v);
        return depth_len_[u] + depth_len_[v] - depth_len_[w] - depth_len_[w];
    }

    VertexId lca(VertexId u, VertexId v) const {
        int iu = euler_pos_[static_cast<std::size_t>(u)];
        int iv = euler_pos_[static_cast<std::size_t>(v)];
        if (iu > iv) std::swap(iu, iv);
        int k = log2_[static_cast<std::size_t>(iv - iu + 1)];
        int x = sparse_[static_cast<std::size_t>(k)][static_cast<std::size_t>(iu)];
        int y = sparse_[static_cast<std::size_t>(k)][static_cast<std::size_t>(iv - (1 << k) + 1)];
        VertexId vx = euler_[static_cast<std::size_t>(x)];
        VertexId vy = euler_[static_cast<std::size_t>(y)];
        return depth_int_[static_cast<std::size_t>(vx)] <= depth_int_[static_cast<std::size_t>(vy)] ? vx : vy;
    }

    VertexId parent(VertexId v) const { return parent_[static_cast<std::size_t>(v)]; }
    EdgeId parent_edge(VertexId v) const { return parent_edge_[static_cast<std::size_t>(v)]; }
    const R& depth_length(VertexId v) const { return depth_len_[static_cast<std::size_t>(v)]; }

  private:
    void validate_structure() {
        if (vertex_count_ < 1) throw InputError("tree needs at least one vertex");
        if (static_cast<int>(edges_.size()) != vertex_count_ - 1)
            throw InputError("not a tree: edge count must be vertex count - 1");
        for (const auto& e : edges_) {
            if (e.a < 0 || e.a >= vertex_count_ || e.b < 0 || e.b >= vertex_count_)
                throw InputError("edge endpoint out of range");
            if (e.a == e.b) throw InputError("self-loop edge");
            if (!(e.length > R(0))) throw InputError("edge length must be positive");
        }
        incident_.assign(static_cast<std::size_t>(vertex_count_), {});
        for (EdgeId i = 0; i < static_cast<EdgeId>(edges_.size()); ++i) {
            incident_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(i)].a)].push_back(i);
            incident_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(i)].b)].push_back(i);
        }
        // connectivity (acyclicity then follows from the edge count)
        std::vector<char> seen(static_cast<std::size_t>(vertex_count_), 0);
        std::vector<VertexId> stack{0};
        seen[0] = 1;
        int reached = 1;
        while (!stack.empty()) {
            VertexId v = stack.back();
            stack.pop_back();
            for (EdgeId e : incident_[static_cast<std::size_t>(v)]) {
                VertexId w = other_end(e, v);
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ++reached;
                    stack.push_back(w);
                }
            }
        }
        if (reached != vertex_count_) throw InputError("not a tree: graph is disconnected");
    }

    VertexId other_end(EdgeId e, VertexId v) const {
        const auto& ed = edges_[static_cast<std::size_t>(e)];
        return ed.a == v ? ed.b : ed.a;
    }

    void index() {
        const auto n = static_cast<std::size_t>(vertex_count_);
        parent_.assign(n, -1);
        parent_edge_.assign(n, -1);
        depth_int_.assign(n, 0);
        depth_len_.assign(n, R(0));
        euler_pos_.assign(n, -1);
        euler_.clear();
        euler_.reserve(2 * n);

        // iterative Euler tour from vertex 0
        struct Frame {
            VertexId v;
            std::size_t next = 0;
        };
        std::vector<Frame> st;
        st.push_back({0, 0});
        euler_.push_back(0);
        euler_pos_[0] = 0;
        while (!st.empty()) {
            Frame& f = st.back();
            const auto& inc = incident_[static_cast<std::size_t>(f.v)];
            bool descended = false;
            while (f.next < inc.size()) {
                EdgeId e = inc[f.next++];
                VertexId w = other_end(e, f.v);
                if (w == parent_[static_cast<std::size_t>(f.v)]) continue;
                parent_[static_cast<std::size_t>(w)] = f.v;
                parent_edge_[static_cast<std::size_t>(w)] = e;
                depth_int_[static_cast<std::size_t>(w)] = depth_int_[static_cast<std::size_t>(f.v)] + 1;
                depth_len_[static_cast<std::size_t>(w)] =
                    depth_len_[static_cast<std::size_t>(f.v)] + edges_[static_cast<std::size_t>(e)].length;
                euler_pos_[static_cast<std::size_t>(w)] = static_cast<int>(euler_.size());
                euler_.push_back(w);
                st.push_back({w, 0});
                descended = true;
                break;
            }
            if (!descended) {
                st.pop_back();
                if (!st.empty()) euler_.push_back(st.back().v);
            }
        }
        // parent_[0] stays -1; give vertex 0 no parent edge.
        parent_[0] = 0;

        // sparse table of argmin-depth over the euler walk
        const int m = static_cast<int>(euler_.size());
        log2_.assign(static_cast<std::size_t>(m) + 1, 0);
        for (int i = 2; i <= m; ++i)
            log2_[static_cast<std::size_t>(i)] = log2_[static_cast<std::size_t>(i / 2)] + 1;
        int levels = log2_[static_cast<std::size_t>(m)] + 1;
        sparse_.assign(static_cast<std::size_t>(levels), std::vector<int>(static_cast<std::size_t>(m)));
        for (int i = 0; i < m; ++i) sparse_[0][static_cast<std::size_t>(i)] = i;
        for (int k = 1; k < levels; ++k) {
            for (int i = 0; i + (1 << k) <= m; ++i) {
                int x = sparse_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i)];
                int y = sparse_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i + (1 << (k - 1)))];
                sparse_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
                    depth_int_[static_cast<std::size_t>(euler_[static_cast<std::size_t>(x)])] <=
                            depth_int_[static_cast<std::size_t>(euler_[static_cast<std::size_t>(y)])]
                        ? x
                        : y;
            }
        }
    }

    int vertex_count_ = 0;
    std::vector<Edge<R>> edges_;
    std::vector<std::vector<EdgeId>> incident_;

    std::vector<VertexId> parent_;
    std::vector<EdgeId> parent_edge_;
    std::vector<int> depth_int_;
    std::vector<R> depth_len_;
    std::vector<VertexId> euler_;
    std::vector<int> euler_pos_;
    std::vector<int> log2_;
    std::vector<std::vector<int>> sparse_;
};

// Arc length of the unique path between two points.
template <class R>
R distance(const MetricTree<R>& tree, const TreePoint<R>& p, const TreePoint<R>& q) {
    tree.check_point(p);
    tree.check_point(q);
    if (p.edge == q.edge) return NumTraits<R>::abs(p.offset - q.offset);
    const auto& ep = tree.edge(p.edge);
    const auto& eq = tree.edge(q.edge);
    // Any path leaves p's edge through one endpoint and enters q's edge through one.
    R best{};
    bool first = true;
    const VertexId pv[2] = {ep.a, ep.b};
    const R pd[2] = {p.offset, ep.length - p.offset};
    const VertexId qv[2] = {eq.a, eq.b};
    const R qd[2] = {q.offset, eq.length - q.offset};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            R cand = pd[i] + tree.vertex_distance(pv[i], qv[j]) + qd[j];
            if (first || cand < best) {
                best = cand;
                first = false;
            }
        }
    }
    return best;
}

namespace detail {

// Full-edge segments along the vertex path u -> v.
template <class R>
void append_vertex_path(const MetricTree<R>& tree, VertexId u, VertexId v,
                        std::vector<PathSegment<R>>& out) {
    VertexId w = tree.lca(u, v);
    std::vector<PathSegment<R>> down;
    for (VertexId x = u; x != w; x = tree.parent(x)) {
        EdgeId e = tree.parent_edge(x);
        const auto& ed = tree.edge(e);
        // traversed from x toward parent(x)
        if (ed.a == x)
            out.push_back({e, R(0), ed.length});
        else
            out.push_back({e, ed.length, R(0)});
    }
    for (VertexId x = v; x != w; x = tree.parent(x)) {
        EdgeId e = tree.parent_edge(x);
        const auto& ed = tree.edge(e);
        // traversed from parent(x) toward x
        if (ed.a == x)
            down.push_back({e, ed.length, R(0)});
        else
            down.push_back({e, R(0), ed.length});
    }
    out.insert(out.end(), down.rbegin(), down.rend());
}

}  // namespace detail

// Ordered segments of the unique arc from p to q; empty when p == q.
template <class R>
std::vector<PathSegment<R>> path_between(const MetricTree<R>& tree, const TreePoint<R>& p,
                                         const TreePoint<R>& q) {
    tree.check_point(p);
    tree.check_point(q);
    TreePoint<R> cp = tree.canonical(p), cq = tree.canonical(q);
    std::vector<PathSegment<R>> out;
    if (cp.edge == cq.edge) {
        if (cp.offset != cq.offset) out.push_back({cp.edge, cp.offset, cq.offset});
        return out;
    }
    const auto& ep = tree.edge(cp.edge);
    const auto& eq = tree.edge(cq.edge);
    const VertexId pv[2] = {ep.a, ep.b};
    const R pd[2] = {cp.offset, ep.length - cp.offset};
    const VertexId qv[2] = {eq.a, eq.b};
    const R qd[2] = {cq.offset, eq.length - cq.offset};
    int bi = 0, bj = 0;
    R best{};
    bool first = true;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            R cand = pd[i] + tree.vertex_distance(pv[i], qv[j]) + qd[j];
            if (first || cand < best) {
                best = cand;
                bi = i;
                bj = j;
                first = false;
            }
        }
    }
    if (pd[bi] != R(0)) out.push_back({cp.edge, cp.offset, bi == 0 ? R(0) : ep.length});
    detail::append_vertex_path(tree, pv[bi], qv[bj], out);
    if (qd[bj] != R(0)) out.push_back({cq.edge, bj == 0 ? R(0) : eq.length, cq.offset});
    return out;
}

template <class R>
R path_length(const std::vector<PathSegment<R>>& path) {
    R s{};
    for (const auto& seg : path) s += NumTraits<R>::abs(seg.to - seg.from);
    return s;
}

// Number of connected components the point's removal creates.
template <class R>
int valence(const MetricTree<R>& tree, const TreePoint<R>& p) {
    TreePoint<R> c = tree.canonical(p);
    VertexId v = tree.vertex_at(c);
    if (v < 0) return 2;
    return static_cast<int>(tree.incident(v).size());
}

template <class R>
std::pair<std::vector<TreePoint<R>>, std::vector<TreePoint<R>>> endpoints_and_branchpoints(
    const MetricTree<R>& tree) {
    std::vector<TreePoint<R>> ends, branches;
    if (tree.vertex_count() == 1) {
        return {ends, branches};  // degenerate single-vertex tree has no edges
    }
    for (VertexId v = 0; v < tree.vertex_count(); ++v) {
        std::size_t deg = tree.incident(v).size();
        if (deg == 1)
            ends.push_back(tree.vertex_point(v));
        else if (deg > 2)
            branches.push_back(tree.vertex_point(v));
    }
    return {ends, branches};
}

}  // namespace treedyn
