#pragma once

#include <vector>

#include "treedyn/tree.hpp"

namespace treedyn {

// Directed arc in the tree, stored as explicit segments with a prefix-length
// table so arc-length interpolation is a binary search. A degenerate arc is a
// single anchor point with no segments.
template <class R>
struct ArcPath {
    TreePoint<R> start;
    std::vector<PathSegment<R>> segments;
    std::vector<R> prefix;  // prefix[k] = arc length before segment k; size segments+1

    const R& length() const { return prefix.back(); }

    TreePoint<R> end_point() const {
        if (segments.empty()) return start;
        const auto& s = segments.back();
        return {s.edge, s.to};
    }

    // Point at arc length t from the start, 0 <= t <= length().
    TreePoint<R> point_at(const R& t) const {
        if (segments.empty()) return start;
        // first segment whose end-prefix covers t
        std::size_t lo = 0, hi = segments.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (prefix[mid + 1] < t)
                lo = mid + 1;
            else
                hi = mid;
        }
        const auto& s = segments[lo];
        R local = t - prefix[lo];
        return {s.edge, s.from <= s.to ? R(s.from + local) : R(s.from - local)};
    }

    // Sub-arc over arc-length range [a, b], 0 <= a <= b <= length().
    ArcPath sub_path(const R& a, const R& b) const {
        if (a == b) return make_degenerate(point_at(a));
        std::vector<PathSegment<R>> out;
        for (std::size_t k = 0; k < segments.size(); ++k) {
            const R& s0 = prefix[k];
            const R& s1 = prefix[k + 1];
            if (s1 <= a || s0 >= b) continue;
            R ca = s0 < a ? a : s0;
            R cb = s1 > b ? b : s1;
            const auto& s = segments[k];
            R f, t;
            if (s.from <= s.to) {
                f = s.from + (ca - s0);
                t = s.from + (cb - s0);
            } else {
                f = s.from - (ca - s0);
                t = s.from - (cb - s0);
            }
            out.push_back({s.edge, f, t});
        }
        TreePoint<R> anchor{out.front().edge, out.front().from};
        return make(anchor, std::move(out));
    }

    static ArcPath make(TreePoint<R> anchor, std::vector<PathSegment<R>> segs) {
        ArcPath p;
        p.start = anchor;
        p.segments = std::move(segs);
        p.prefix.resize(p.segments.size() + 1);
        p.prefix[0] = R(0);
        for (std::size_t k = 0; k < p.segments.size(); ++k)
            p.prefix[k + 1] =
                p.prefix[k] + NumTraits<R>::abs(p.segments[k].to - p.segments[k].from);
        return p;
    }

    static ArcPath make_degenerate(TreePoint<R> p) { return make(p, {}); }
};

template <class R>
ArcPath<R> make_arc(const MetricTree<R>& tree, const TreePoint<R>& from, const TreePoint<R>& to) {
    auto segs = path_between(tree, from, to);
    if (segs.empty()) return ArcPath<R>::make_degenerate(tree.canonical(from));
    TreePoint<R> anchor{segs.front().edge, segs.front().from};
    return ArcPath<R>::make(anchor, std::move(segs));
}

// An arc must be simple and connected: segments nondegenerate, consecutive
// segments meeting at a shared point, no edge visited twice.
template <class R>
void validate_arc(const MetricTree<R>& tree, const ArcPath<R>& arc, const char* what) {
    tree.check_point(arc.start);
    std::vector<char> used(static_cast<std::size_t>(tree.edge_count()), 0);
    for (std::size_t k = 0; k < arc.segments.size(); ++k) {
        const auto& s = arc.segments[k];
        if (!tree.valid_edge(s.edge)) throw InputError(std::string(what) + ": bad edge in path");
        const R& len = tree.edge(s.edge).length;
        if (s.from < R(0) || s.from > len || s.to < R(0) || s.to > len)
            throw InputError(std::string(what) + ": path offset out of bounds");
        if (s.from == s.to) throw InputError(std::string(what) + ": degenerate path segment");
        if (used[static_cast<std::size_t>(s.edge)])
            throw InputError(std::string(what) + ": path revisits an edge (not a simple arc)");
        used[static_cast<std::size_t>(s.edge)] = 1;
        if (k == 0) {
            if (!tree.same_point(arc.start, TreePoint<R>{s.edge, s.from}))
                throw InputError(std::string(what) + ": path anchor does not match first segment");
        } else {
            const auto& prev = arc.segments[k - 1];
            if (!tree.same_point(TreePoint<R>{prev.edge, prev.to}, TreePoint<R>{s.edge, s.from}))
                throw InputError(std::string(what) + ": path segments are not contiguous");
        }
    }
}

}  // namespace treedyn
