#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "treedyn/path.hpp"
#include "treedyn/tree.hpp"

namespace treedyn {

template <class R>
using TreePtr = std::shared_ptr<const MetricTree<R>>;

// One affine piece of the map restricted to an edge: the domain interval
// [lo, hi] is stretched uniformly onto the image arc.
template <class R>
struct Piece {
    R lo, hi;
    ArcPath<R> image;
};

template <class R>
struct ContinuityViolation {
    TreePoint<R> location;
    TreePoint<R> left_image;
    TreePoint<R> right_image;
    R gap;
    std::string context;
};

template <class R>
struct MapStats {
    R lipschitz_bound;
    int piece_count;
    std::vector<std::vector<R>> interior_breakpoints;  // per edge, excludes 0 and len
};

// Piecewise-linear self-map of a metric tree. Construction enforces that the
// pieces of each edge partition [0, length] and that every image is a valid
// arc; continuity across breakpoints and vertices is checked separately by
// validate_continuity so that defective inputs can still be inspected.
template <class R>
class PLTreeMap {
public:
    static PLTreeMap build(TreePtr<R> tree, std::vector<std::vector<Piece<R>>> pieces) {
        if (!tree) throw InputError("map: null tree");
        if (pieces.size() != static_cast<std::size_t>(tree->edge_count()))
            throw InputError("map: piece table size does not match edge count");
        for (EdgeId e = 0; e < tree->edge_count(); ++e) {
            auto& list = pieces[static_cast<std::size_t>(e)];
            const R& len = tree->edge(e).length;
            std::string where = "map: edge " + std::to_string(e);
            if (list.empty()) throw InputError(where + " has no pieces");
            std::sort(list.begin(), list.end(),
                      [](const Piece<R>& a, const Piece<R>& b) { return a.lo < b.lo; });
            if (list.front().lo != R(0))
                throw InputError(where + ": pieces do not start at offset 0");
            if (list.back().hi != len)
                throw InputError(where + ": pieces do not reach the edge end");
            for (std::size_t k = 0; k < list.size(); ++k) {
                if (!(list[k].lo < list[k].hi))
                    throw InputError(where + ": empty piece domain");
                if (k + 1 < list.size() && list[k].hi != list[k + 1].lo)
                    throw InputError(where + ": piece domains do not tile the edge");
                validate_arc(*tree, list[k].image, where.c_str());
            }
        }
        PLTreeMap m;
        m.tree_ = std::move(tree);
        m.pieces_ = std::move(pieces);
        return m;
    }

    // Convenience constructor: per-edge waypoint lists (offset, image point),
    // sorted, covering offsets 0 and length; consecutive waypoints become a
    // piece whose image is the unique arc between the image points.
    static PLTreeMap from_waypoints(
        TreePtr<R> tree,
        const std::vector<std::vector<std::pair<R, TreePoint<R>>>>& waypoints) {
        if (!tree) throw InputError("map: null tree");
        if (waypoints.size() != static_cast<std::size_t>(tree->edge_count()))
            throw InputError("map: waypoint table size does not match edge count");
        std::vector<std::vector<Piece<R>>> pieces(waypoints.size());
        for (EdgeId e = 0; e < tree->edge_count(); ++e) {
            const auto& wp = waypoints[static_cast<std::size_t>(e)];
            std::string where = "map: edge " + std::to_string(e);
            if (wp.size() < 2) throw InputError(where + ": needs at least two waypoints");
            if (wp.front().first != R(0) || wp.back().first != tree->edge(e).length)
                throw InputError(where + ": waypoints must cover both edge endpoints");
            for (std::size_t k = 0; k + 1 < wp.size(); ++k) {
                if (!(wp[k].first < wp[k + 1].first))
                    throw InputError(where + ": waypoint offsets must be strictly increasing");
                Piece<R> p;
                p.lo = wp[k].first;
                p.hi = wp[k + 1].first;
                p.image = make_arc(*tree, wp[k].second, wp[k + 1].second);
                pieces[static_cast<std::size_t>(e)].push_back(std::move(p));
            }
        }
        return build(std::move(tree), std::move(pieces));
    }

    static PLTreeMap identity(TreePtr<R> tree) {
        if (!tree) throw InputError("map: null tree");
        std::vector<std::vector<Piece<R>>> pieces(static_cast<std::size_t>(tree->edge_count()));
        for (EdgeId e = 0; e < tree->edge_count(); ++e) {
            const R& len = tree->edge(e).length;
            Piece<R> p;
            p.lo = R(0);
            p.hi = len;
            p.image = ArcPath<R>::make(TreePoint<R>{e, R(0)}, {PathSegment<R>{e, R(0), len}});
            pieces[static_cast<std::size_t>(e)].push_back(std::move(p));
        }
        return build(std::move(tree), std::move(pieces));
    }

    const MetricTree<R>& tree() const { return *tree_; }
    const TreePtr<R>& tree_ptr() const { return tree_; }

    const std::vector<Piece<R>>& pieces(EdgeId e) const {
        return pieces_[static_cast<std::size_t>(e)];
    }

    int piece_count() const {
        int n = 0;
        for (const auto& list : pieces_) n += static_cast<int>(list.size());
        return n;
    }

    // Evaluation canonicalizes the input first, so points on a shared vertex
    // are routed through one deterministic edge regardless of representation.
    TreePoint<R> evaluate(const TreePoint<R>& p) const {
        TreePoint<R> c = tree_->canonical(p);
        const auto& list = pieces_[static_cast<std::size_t>(c.edge)];
        std::size_t lo = 0, hi = list.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (list[mid].lo <= c.offset)
                lo = mid;
            else
                hi = mid - 1;
        }
        const Piece<R>& piece = list[lo];
        R span = piece.hi - piece.lo;
        R t = (c.offset - piece.lo) * piece.image.length() / span;
        return tree_->canonical(piece.image.point_at(t));
    }

    TreePoint<R> iterate(TreePoint<R> p, long long n) const {
        if (n < 0) throw InputError("iterate: negative step count");
        for (long long k = 0; k < n; ++k) p = evaluate(p);
        return p;
    }

private:
    TreePtr<R> tree_;
    std::vector<std::vector<Piece<R>>> pieces_;
};

// Continuity check: image endpoints must agree at interior breakpoints and at
// vertices across all incident edges (within tol; exact scalars use tol 0).
template <class R>
std::vector<ContinuityViolation<R>> validate_continuity(
    const PLTreeMap<R>& map, const R& tol = NumTraits<R>::continuity_tol()) {
    const auto& tree = map.tree();
    std::vector<ContinuityViolation<R>> out;
    for (EdgeId e = 0; e < tree.edge_count(); ++e) {
        const auto& list = map.pieces(e);
        for (std::size_t k = 0; k + 1 < list.size(); ++k) {
            TreePoint<R> left = list[k].image.end_point();
            TreePoint<R> right = list[k + 1].image.start;
            R gap = distance(tree, left, right);
            if (gap > tol)
                out.push_back({TreePoint<R>{e, list[k].hi}, left, right, gap,
                               "breakpoint on edge " + std::to_string(e)});
        }
    }
    for (VertexId v = 0; v < tree.vertex_count(); ++v) {
        const auto& inc = tree.incident(v);
        if (inc.size() < 2) continue;
        bool have_ref = false;
        TreePoint<R> ref{};
        for (EdgeId e : inc) {
            const auto& list = map.pieces(e);
            TreePoint<R> img = (tree.edge(e).a == v) ? list.front().image.start
                                                     : list.back().image.end_point();
            if (!have_ref) {
                ref = img;
                have_ref = true;
                continue;
            }
            R gap = distance(tree, ref, img);
            if (gap > tol)
                out.push_back({tree.vertex_point(v), ref, img, gap,
                               "vertex " + std::to_string(v)});
        }
    }
    return out;
}

template <class R>
MapStats<R> map_stats(const PLTreeMap<R>& map) {
    const auto& tree = map.tree();
    MapStats<R> s;
    s.lipschitz_bound = R(0);
    s.piece_count = map.piece_count();
    s.interior_breakpoints.resize(static_cast<std::size_t>(tree.edge_count()));
    for (EdgeId e = 0; e < tree.edge_count(); ++e) {
        const auto& list = map.pieces(e);
        for (std::size_t k = 0; k < list.size(); ++k) {
            R slope = list[k].image.length() / (list[k].hi - list[k].lo);
            if (slope > s.lipschitz_bound) s.lipschitz_bound = slope;
            if (k + 1 < list.size())
                s.interior_breakpoints[static_cast<std::size_t>(e)].push_back(list[k].hi);
        }
    }
    return s;
}

}  // namespace treedyn
