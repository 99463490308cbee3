#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "treedyn/plmap.hpp"
#include "treedyn/tree.hpp"

namespace treedyn {

// Closed connected subtree, described by at most one closed interval per edge.
// A single vertex is the degenerate interval [0,0] or [len,len] on some
// incident edge.
template <class R>
struct Subtree {
    std::map<EdgeId, std::pair<R, R>> intervals;
};

// Surviving portion of a source edge after collapsing: source offsets in
// [src_lo, src_hi] map to target_edge at offset - shift.
template <class R>
struct EdgePart {
    R src_lo, src_hi;
    EdgeId target_edge;
    R shift;
};

// Monotone quotient that collapses a connected subtree to a single vertex.
template <class R>
class QuotientProjection {
public:
    const MetricTree<R>& source() const { return *source_; }
    const MetricTree<R>& target() const { return *target_; }
    const TreePtr<R>& source_ptr() const { return source_; }
    const TreePtr<R>& target_ptr() const { return target_; }
    VertexId collapsed_vertex() const { return collapsed_vertex_; }

    // -1 for vertices inside the collapsed region.
    VertexId map_vertex(VertexId v) const { return vertex_map_[static_cast<std::size_t>(v)]; }

    const std::pair<R, R>* region_interval(EdgeId e) const {
        auto it = region_.find(e);
        return it == region_.end() ? nullptr : &it->second;
    }

    const std::vector<EdgePart<R>>& parts(EdgeId e) const {
        return parts_[static_cast<std::size_t>(e)];
    }

    bool in_region(const TreePoint<R>& p) const {
        TreePoint<R> c = source_->canonical(p);
        auto it = region_.find(c.edge);
        if (it != region_.end() && it->second.first <= c.offset && c.offset <= it->second.second)
            return true;
        // vertex representations can sit on an edge without an interval
        VertexId v = source_->vertex_at(c);
        return v >= 0 && vertex_map_[static_cast<std::size_t>(v)] == collapsed_vertex_ &&
               vertex_in_region_[static_cast<std::size_t>(v)];
    }

    TreePoint<R> map_point(const TreePoint<R>& p) const {
        TreePoint<R> c = source_->canonical(p);
        if (in_region(c)) return target_->vertex_point(collapsed_vertex_);
        for (const auto& part : parts_[static_cast<std::size_t>(c.edge)])
            if (part.src_lo <= c.offset && c.offset <= part.src_hi)
                return target_->canonical({part.target_edge, c.offset - part.shift});
        throw InternalError("quotient: point not covered by any edge part");
    }

    template <class S>
    friend QuotientProjection<S> collapse(TreePtr<S> tree, const Subtree<S>& sub);

private:
    TreePtr<R> source_;
    TreePtr<R> target_;
    std::map<EdgeId, std::pair<R, R>> region_;
    std::vector<char> vertex_in_region_;
    std::vector<VertexId> vertex_map_;
    std::vector<std::vector<EdgePart<R>>> parts_;
    VertexId collapsed_vertex_ = -1;
};

template <class R>
QuotientProjection<R> collapse(TreePtr<R> tree, const Subtree<R>& sub) {
    if (!tree) throw InputError("collapse: null tree");
    const MetricTree<R>& T = *tree;
    if (sub.intervals.empty()) throw InputError("collapse: empty subtree");

    auto vcount = static_cast<std::size_t>(T.vertex_count());
    std::vector<char> in_region(vcount, 0);
    for (const auto& [e, iv] : sub.intervals) {
        if (!T.valid_edge(e)) throw InputError("collapse: unknown edge in subtree");
        const auto& edge = T.edge(e);
        if (iv.first < R(0) || iv.second > edge.length || iv.first > iv.second)
            throw InputError("collapse: bad interval on edge " + std::to_string(e));
        if (iv.first == R(0)) in_region[static_cast<std::size_t>(edge.a)] = 1;
        if (iv.second == edge.length) in_region[static_cast<std::size_t>(edge.b)] = 1;
    }

    // Connectivity: the intervals are closed arcs meeting only at vertices, so
    // the union is connected iff the interval/vertex incidence graph is.
    {
        std::vector<EdgeId> keys;
        for (const auto& [e, iv] : sub.intervals) keys.push_back(e);
        std::vector<int> comp(keys.size());
        std::iota(comp.begin(), comp.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (comp[static_cast<std::size_t>(x)] != x) {
                comp[static_cast<std::size_t>(x)] =
                    comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(x)])];
                x = comp[static_cast<std::size_t>(x)];
            }
            return x;
        };
        std::vector<int> owner(vcount, -1);
        for (std::size_t k = 0; k < keys.size(); ++k) {
            const auto& edge = T.edge(keys[k]);
            const auto& iv = sub.intervals.at(keys[k]);
            VertexId touched[2];
            int nt = 0;
            if (iv.first == R(0)) touched[nt++] = edge.a;
            if (iv.second == edge.length) touched[nt++] = edge.b;
            if (nt == 0 && keys.size() > 1)
                throw InputError("collapse: subtree is not connected");
            for (int j = 0; j < nt; ++j) {
                auto vi = static_cast<std::size_t>(touched[j]);
                if (owner[vi] < 0)
                    owner[vi] = static_cast<int>(k);
                else
                    comp[static_cast<std::size_t>(find(static_cast<int>(k)))] =
                        find(owner[vi]);
            }
        }
        int root = find(0);
        for (std::size_t k = 1; k < keys.size(); ++k)
            if (find(static_cast<int>(k)) != root)
                throw InputError("collapse: subtree is not connected");
        // a vertex inside the region with an incident edge whose interval
        // avoids it would disconnect the region through that edge
        for (const auto& [e, iv] : sub.intervals) {
            const auto& edge = T.edge(e);
            if (in_region[static_cast<std::size_t>(edge.a)] && iv.first != R(0))
                throw InputError("collapse: subtree is not connected");
            if (in_region[static_cast<std::size_t>(edge.b)] && iv.second != edge.length)
                throw InputError("collapse: subtree is not connected");
        }
    }

    QuotientProjection<R> proj;
    proj.source_ = tree;
    proj.region_ = sub.intervals;
    proj.vertex_in_region_.assign(in_region.begin(), in_region.end());
    proj.vertex_map_.assign(vcount, -1);
    proj.parts_.resize(static_cast<std::size_t>(T.edge_count()));

    VertexId next = 0;
    for (VertexId v = 0; v < T.vertex_count(); ++v)
        if (!in_region[static_cast<std::size_t>(v)])
            proj.vertex_map_[static_cast<std::size_t>(v)] = next++;
    VertexId star = next++;  // the collapsed region becomes the last vertex
    proj.collapsed_vertex_ = star;
    auto tv = [&](VertexId v) {
        return in_region[static_cast<std::size_t>(v)]
                   ? star
                   : proj.vertex_map_[static_cast<std::size_t>(v)];
    };

    std::vector<Edge<R>> target_edges;
    for (EdgeId e = 0; e < T.edge_count(); ++e) {
        const auto& edge = T.edge(e);
        auto it = sub.intervals.find(e);
        auto& parts = proj.parts_[static_cast<std::size_t>(e)];
        if (it == sub.intervals.end()) {
            auto id = static_cast<EdgeId>(target_edges.size());
            target_edges.push_back({tv(edge.a), tv(edge.b), edge.length});
            parts.push_back({R(0), edge.length, id, R(0)});
            continue;
        }
        const R& lo = it->second.first;
        const R& hi = it->second.second;
        if (lo > R(0)) {
            auto id = static_cast<EdgeId>(target_edges.size());
            target_edges.push_back({tv(edge.a), star, lo});
            parts.push_back({R(0), lo, id, R(0)});
        }
        if (hi < edge.length) {
            auto id = static_cast<EdgeId>(target_edges.size());
            target_edges.push_back({star, tv(edge.b), edge.length - hi});
            parts.push_back({hi, edge.length, id, hi});
        }
    }

    proj.target_ = std::make_shared<const MetricTree<R>>(
        MetricTree<R>::build(static_cast<int>(next), target_edges));
    return proj;
}

}  // namespace treedyn
