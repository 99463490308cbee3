#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "treedyn/collapse.hpp"
#include "treedyn/plmap.hpp"

namespace treedyn {

template <class R>
Subtree<R> vertex_subtree(const MetricTree<R>& tree, VertexId v) {
    TreePoint<R> p = tree.vertex_point(v);
    Subtree<R> s;
    s.intervals[p.edge] = {p.offset, p.offset};
    return s;
}

namespace detail {

// Projects an arc that meets the collapsed region in at most finitely many
// points. Segments are cut at part boundaries; cut pieces inside the region
// must be degenerate.
template <class R>
ArcPath<R> project_arc(const QuotientProjection<R>& proj, const ArcPath<R>& arc) {
    if (arc.segments.empty())
        return ArcPath<R>::make_degenerate(proj.map_point(arc.start));
    std::vector<PathSegment<R>> out;
    for (const auto& seg : arc.segments) {
        const auto& parts = proj.parts(seg.edge);
        bool fwd = seg.from < seg.to;
        std::vector<R> cuts;
        cuts.push_back(seg.from);
        for (const auto& part : parts) {
            for (const R& c : {part.src_lo, part.src_hi}) {
                bool inside = fwd ? (seg.from < c && c < seg.to) : (seg.to < c && c < seg.from);
                if (inside) cuts.push_back(c);
            }
        }
        cuts.push_back(seg.to);
        std::sort(cuts.begin() + 1, cuts.end() - 1);
        if (!fwd) std::reverse(cuts.begin() + 1, cuts.end() - 1);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const R& u = cuts[k];
            const R& v = cuts[k + 1];
            if (u == v) continue;
            R lo = fwd ? u : v, hi = fwd ? v : u;
            const EdgePart<R>* owner = nullptr;
            for (const auto& part : parts)
                if (part.src_lo <= lo && hi <= part.src_hi) {
                    owner = &part;
                    break;
                }
            if (!owner)
                throw InternalError("factor: arc crosses the collapsed region");
            out.push_back({owner->target_edge, u - owner->shift, v - owner->shift});
        }
    }
    if (out.empty()) return ArcPath<R>::make_degenerate(proj.map_point(arc.start));
    TreePoint<R> anchor{out.front().edge, out.front().from};
    return ArcPath<R>::make(anchor, std::move(out));
}

// Arc-length range [t1, t2] of arc inside the region; t1 > t2 means empty.
template <class R>
std::pair<R, R> region_overlap(const QuotientProjection<R>& proj, const ArcPath<R>& arc) {
    R t1 = arc.length(), t2 = R(0);
    bool any = false;
    for (std::size_t k = 0; k < arc.segments.size(); ++k) {
        const auto& seg = arc.segments[k];
        const auto* iv = proj.region_interval(seg.edge);
        if (!iv) continue;
        R slo = seg.from < seg.to ? seg.from : seg.to;
        R shi = seg.from < seg.to ? seg.to : seg.from;
        R olo = slo > iv->first ? slo : iv->first;
        R ohi = shi < iv->second ? shi : iv->second;
        if (olo > ohi) continue;
        R ta, tb;
        if (seg.from < seg.to) {
            ta = arc.prefix[k] + (olo - seg.from);
            tb = arc.prefix[k] + (ohi - seg.from);
        } else {
            ta = arc.prefix[k] + (seg.from - ohi);
            tb = arc.prefix[k] + (seg.from - olo);
        }
        if (!any || ta < t1) t1 = ta;
        if (!any || tb > t2) t2 = tb;
        any = true;
    }
    if (!any) return {R(1), R(0)};
    return {t1, t2};
}

}  // namespace detail

// Factor of f through the quotient: the unique g with g(pi(x)) = pi(f(x)).
// Requires the collapsed region to be forward-invariant; violations are
// reported with a witness point.
template <class R>
PLTreeMap<R> factor(const PLTreeMap<R>& f, const QuotientProjection<R>& proj) {
    const MetricTree<R>& src = proj.source();
    if (&f.tree() != &src)
        throw InputError("factor: map and projection use different trees");

    // invariance of the collapsed region
    for (EdgeId e = 0; e < src.edge_count(); ++e) {
        const auto* iv = proj.region_interval(e);
        if (!iv) continue;
        if (iv->first == iv->second) {
            TreePoint<R> img = f.evaluate({e, iv->first});
            if (!proj.in_region(img))
                throw InputError("factor: region not invariant at edge " + std::to_string(e) +
                                 " offset " + NumTraits<R>::format(iv->first));
            continue;
        }
        for (const auto& piece : f.pieces(e)) {
            R a = piece.lo > iv->first ? piece.lo : iv->first;
            R b = piece.hi < iv->second ? piece.hi : iv->second;
            if (!(a < b)) continue;
            R span = piece.hi - piece.lo;
            R ta = (a - piece.lo) * piece.image.length() / span;
            R tb = (b - piece.lo) * piece.image.length() / span;
            ArcPath<R> img = piece.image.sub_path(ta, tb);
            if (img.segments.empty()) {
                if (!proj.in_region(img.start))
                    throw InputError("factor: region not invariant at edge " +
                                     std::to_string(e) + " offset " + NumTraits<R>::format(a));
                continue;
            }
            for (std::size_t k = 0; k < img.segments.size(); ++k) {
                const auto& seg = img.segments[k];
                R slo = seg.from < seg.to ? seg.from : seg.to;
                R shi = seg.from < seg.to ? seg.to : seg.from;
                const auto* siv = proj.region_interval(seg.edge);
                if (siv && siv->first <= slo && shi <= siv->second) continue;
                // witness: domain point mapping to the midpoint of the
                // offending stretch
                R tm = (img.prefix[k] + img.prefix[k + 1]) / R(2);
                R x = a + tm * (b - a) / (tb - ta);
                throw InputError("factor: region not invariant at edge " + std::to_string(e) +
                                 " offset " + NumTraits<R>::format(x));
            }
        }
    }

    const MetricTree<R>& tgt = proj.target();
    TreePoint<R> star = tgt.vertex_point(proj.collapsed_vertex());
    std::vector<std::vector<Piece<R>>> out(static_cast<std::size_t>(tgt.edge_count()));

    for (EdgeId e = 0; e < src.edge_count(); ++e) {
        for (const auto& part : proj.parts(e)) {
            auto& bucket = out[static_cast<std::size_t>(part.target_edge)];
            for (const auto& piece : f.pieces(e)) {
                R a = piece.lo > part.src_lo ? piece.lo : part.src_lo;
                R b = piece.hi < part.src_hi ? piece.hi : part.src_hi;
                if (!(a < b)) continue;
                R span = piece.hi - piece.lo;
                R ta = (a - piece.lo) * piece.image.length() / span;
                R tb = (b - piece.lo) * piece.image.length() / span;
                ArcPath<R> img = piece.image.sub_path(ta, tb);
                R S = tb - ta;
                auto [t1, t2] = detail::region_overlap(proj, img);
                if (t1 >= t2) {
                    bucket.push_back(
                        {a - part.shift, b - part.shift, detail::project_arc(proj, img)});
                    continue;
                }
                R x1 = a + t1 * (b - a) / S;
                R x2 = a + t2 * (b - a) / S;
                if (t1 > R(0))
                    bucket.push_back({a - part.shift, x1 - part.shift,
                                      detail::project_arc(proj, img.sub_path(R(0), t1))});
                bucket.push_back(
                    {x1 - part.shift, x2 - part.shift, ArcPath<R>::make_degenerate(star)});
                if (t2 < S)
                    bucket.push_back({x2 - part.shift, b - part.shift,
                                      detail::project_arc(proj, img.sub_path(t2, S))});
            }
        }
    }
    return PLTreeMap<R>::build(proj.target_ptr(), std::move(out));
}

}  // namespace treedyn
