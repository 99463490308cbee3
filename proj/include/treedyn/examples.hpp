#pragma once

#include <string>
#include <utility>
#include <vector>

#include "treedyn/orbits.hpp"
#include "treedyn/plmap.hpp"

namespace treedyn {

// Tip of a spike: level n, position index i in 1..2^{n-1}, top or bottom side.
struct TipRef {
    int n;
    long long i;
    bool top;
};

// Tip dynamics: tips advance along the top row, drop to the bottom row at the
// right end, walk back, and return to the top at the left end. Every level-n
// tip lies on one cycle of length 2^n.
inline TipRef tip_successor(const TipRef& t) {
    if (t.n < 1) throw InputError("tip: level must be at least 1");
    long long half = 1LL << (t.n - 1);
    if (t.i < 1 || t.i > half) throw InputError("tip: index out of range");
    if (t.top) {
        if (t.i < half) return {t.n, t.i + 1, true};
        return {t.n, half, false};
    }
    if (t.i > 1) return {t.n, t.i - 1, false};
    return {t.n, 1, true};
}

// Which endpoint of a bottom spike's image arc the spike tip lands on. The
// construction is stated for tip_to_bottom (tip successors stay tips and the
// level-n tips form a single 2^n cycle); tip_to_top instead sends bottom tips
// back to the top row one slot earlier, breaking the long cycles.
enum class BottomSpikeRule { tip_to_bottom, tip_to_top };

template <class R>
struct Counterexample {
    int level;
    BottomSpikeRule rule;
    TreePtr<R> tree;
    PLTreeMap<R> map;

    long long baseline_count() const { return (1LL << level) + 1; }

    VertexId baseline_vertex(long long k) const {
        if (k < 0 || k >= baseline_count())
            throw InputError("counterexample: baseline index out of range");
        return static_cast<VertexId>(k);
    }

    // number of (level, index) spike pairs before level n
    static long long pair_offset(int n) { return (1LL << (n - 1)) - 1; }

    long long pair_index(int n, long long i) const {
        if (n < 1 || n > level) throw InputError("counterexample: level out of range");
        if (i < 1 || i > (1LL << (n - 1)))
            throw InputError("counterexample: spike index out of range");
        return pair_offset(n) + (i - 1);
    }

    VertexId tip_vertex(int n, long long i, bool top) const {
        return static_cast<VertexId>(baseline_count() + 2 * pair_index(n, i) + (top ? 0 : 1));
    }

    EdgeId baseline_edge(long long k) const {
        if (k < 0 || k + 1 >= baseline_count())
            throw InputError("counterexample: baseline edge out of range");
        return static_cast<EdgeId>(k);
    }

    EdgeId spike_edge(int n, long long i, bool top) const {
        return static_cast<EdgeId>((baseline_count() - 1) + 2 * pair_index(n, i) +
                                   (top ? 0 : 1));
    }

    // baseline vertex carrying x_{i,n} = (2i-1)/2^n
    VertexId junction_vertex(int n, long long i) const {
        pair_index(n, i);  // range check
        return static_cast<VertexId>((2 * i - 1) << (level - n));
    }

    TreePoint<R> tip_point(int n, long long i, bool top) const {
        return tree->vertex_point(tip_vertex(n, i, top));
    }

    TreePoint<R> tip_point(const TipRef& t) const { return tip_point(t.n, t.i, t.top); }

    // point on the baseline at coordinate x in [0, 1]
    TreePoint<R> baseline_point(const R& x) const {
        if (x < R(0) || x > R(1)) throw InputError("counterexample: baseline coordinate");
        long long segments = baseline_count() - 1;
        R scaled = x * R(segments);
        auto k = static_cast<long long>(NumTraits<R>::to_double(scaled));
        if (k >= segments) k = segments - 1;
        while (k > 0 && scaled < R(k)) --k;
        while (k + 1 < segments && scaled >= R(k + 1)) ++k;
        return tree->canonical({static_cast<EdgeId>(k), x - R(k) / R(segments)});
    }

    std::vector<TipRef> tips() const {
        std::vector<TipRef> out;
        for (int n = 1; n <= level; ++n)
            for (long long i = 1; i <= (1LL << (n - 1)); ++i) {
                out.push_back({n, i, true});
                out.push_back({n, i, false});
            }
        return out;
    }
};

// Dendrite-like finite model at a chosen level: the unit baseline subdivided
// at every dyadic point of depth <= level, with a top and bottom spike of
// length 1/n at each x_{i,n}. The baseline is fixed pointwise; each spike is
// stretched affinely onto the arc ending at the next spike of its level.
template <class R>
Counterexample<R> build_counterexample(int level,
                                       BottomSpikeRule rule = BottomSpikeRule::tip_to_bottom) {
    if (level < 1 || level > 24) throw InputError("counterexample: level must be in [1, 24]");
    Counterexample<R> cx;
    cx.level = level;
    cx.rule = rule;
    long long B = (1LL << level) + 1;
    long long pairs = (1LL << level) - 1;
    auto vcount = static_cast<int>(B + 2 * pairs);

    std::vector<Edge<R>> edges;
    R base_len = R(1) / R(B - 1);
    for (long long k = 0; k + 1 < B; ++k)
        edges.push_back({static_cast<VertexId>(k), static_cast<VertexId>(k + 1), base_len});
    for (int n = 1; n <= level; ++n) {
        R spike_len = R(1) / R(n);
        for (long long i = 1; i <= (1LL << (n - 1)); ++i) {
            auto junction = static_cast<VertexId>((2 * i - 1) << (level - n));
            auto base = B + 2 * (Counterexample<R>::pair_offset(n) + (i - 1));
            edges.push_back({junction, static_cast<VertexId>(base), spike_len});
            edges.push_back({junction, static_cast<VertexId>(base + 1), spike_len});
        }
    }
    cx.tree = std::make_shared<const MetricTree<R>>(MetricTree<R>::build(vcount, edges));

    std::vector<std::vector<std::pair<R, TreePoint<R>>>> wp(edges.size());
    for (long long k = 0; k + 1 < B; ++k)
        wp[static_cast<std::size_t>(k)] = {{R(0), cx.tree->vertex_point(static_cast<VertexId>(k))},
                                           {base_len,
                                            cx.tree->vertex_point(static_cast<VertexId>(k + 1))}};
    for (int n = 1; n <= level; ++n) {
        R spike_len = R(1) / R(n);
        long long half = 1LL << (n - 1);
        for (long long i = 1; i <= half; ++i) {
            TreePoint<R> junction = cx.tree->vertex_point(cx.junction_vertex(n, i));
            TipRef top{n, i, true}, bottom{n, i, false};
            TipRef top_succ = tip_successor(top);
            TipRef bottom_succ = tip_successor(bottom);
            if (rule == BottomSpikeRule::tip_to_top && !bottom_succ.top && bottom_succ.i < i)
                bottom_succ.top = true;
            wp[static_cast<std::size_t>(cx.spike_edge(n, i, true))] = {
                {R(0), junction}, {spike_len, cx.tip_point(top_succ)}};
            wp[static_cast<std::size_t>(cx.spike_edge(n, i, false))] = {
                {R(0), junction}, {spike_len, cx.tip_point(bottom_succ)}};
        }
    }
    cx.map = PLTreeMap<R>::from_waypoints(cx.tree, wp);
    return cx;
}

template <class R>
struct EventualPeriodicityReport {
    struct Row {
        TreePoint<R> point;
        PeriodicityReport rep;
    };
    std::vector<Row> rows;
    int max_preperiod = 0;
    int max_period = 0;
    long long undetermined = 0;
};

// Exact orbit classification of a sample set; every orbit must be resolved as
// periodic or eventually periodic within step_bound or it is counted
// undetermined. Only exact scalars are accepted: a tolerance-based repeat is
// not evidence of eventual periodicity.
template <class R>
EventualPeriodicityReport<R> verify_eventual_periodicity(const PLTreeMap<R>& map,
                                                         const std::vector<TreePoint<R>>& samples,
                                                         int step_bound) {
    if constexpr (!NumTraits<R>::exact)
        throw InputError("verify_eventual_periodicity: exact arithmetic required");
    EventualPeriodicityReport<R> rep;
    rep.rows.resize(samples.size());
    parallel_for(samples.size(), [&](std::size_t k) {
        rep.rows[k].point = map.tree().canonical(samples[k]);
        rep.rows[k].rep = detect_period(map, samples[k], step_bound);
    });
    for (const auto& row : rep.rows) {
        if (row.rep.status == PeriodicityStatus::undetermined) {
            ++rep.undetermined;
            continue;
        }
        if (row.rep.preperiod > rep.max_preperiod) rep.max_preperiod = row.rep.preperiod;
        if (row.rep.period > rep.max_period) rep.max_period = row.rep.period;
    }
    return rep;
}

// small stock of reference systems

template <class R>
struct ExampleSystem {
    TreePtr<R> tree;
    PLTreeMap<R> map;
};

template <class R>
TreePtr<R> unit_edge_tree() {
    return std::make_shared<const MetricTree<R>>(
        MetricTree<R>::build(2, {Edge<R>{0, 1, R(1)}}));
}

template <class R>
ExampleSystem<R> library_identity(TreePtr<R> tree) {
    if (!tree) tree = unit_edge_tree<R>();
    auto map = PLTreeMap<R>::identity(tree);
    return {std::move(tree), std::move(map)};
}

template <class R>
ExampleSystem<R> library_identity() {
    return library_identity<R>(unit_edge_tree<R>());
}

// tent map x -> slope * min(x, 1-x) on the unit edge; slope in (0, 2]
template <class R>
ExampleSystem<R> library_tent(const R& slope) {
    if (!(slope > R(0)) || slope > R(2))
        throw InputError("tent: slope must be in (0, 2]");
    auto tree = unit_edge_tree<R>();
    R half = R(1) / R(2);
    std::vector<std::vector<std::pair<R, TreePoint<R>>>> wp{{
        {R(0), {0, R(0)}},
        {half, {0, slope * half}},
        {R(1), {0, R(0)}},
    }};
    auto map = PLTreeMap<R>::from_waypoints(tree, wp);
    return {std::move(tree), std::move(map)};
}

// affine contraction toward vertex 0 of the unit edge; factor in [0, 1)
template <class R>
ExampleSystem<R> library_contraction(const R& factor) {
    if (factor < R(0) || !(factor < R(1)))
        throw InputError("contraction: factor must be in [0, 1)");
    auto tree = unit_edge_tree<R>();
    std::vector<std::vector<std::pair<R, TreePoint<R>>>> wp{{
        {R(0), {0, R(0)}},
        {R(1), {0, factor}},
    }};
    auto map = PLTreeMap<R>::from_waypoints(tree, wp);
    return {std::move(tree), std::move(map)};
}

// isometric rotation of a star with unit legs: leg j sweeps onto leg j+1
template <class R>
ExampleSystem<R> library_star_rotation(int legs) {
    if (legs < 2) throw InputError("star rotation: need at least 2 legs");
    std::vector<Edge<R>> edges;
    for (int j = 0; j < legs; ++j)
        edges.push_back({0, static_cast<VertexId>(j + 1), R(1)});
    auto tree = std::make_shared<const MetricTree<R>>(
        MetricTree<R>::build(legs + 1, edges));
    std::vector<std::vector<std::pair<R, TreePoint<R>>>> wp(
        static_cast<std::size_t>(legs));
    for (int j = 0; j < legs; ++j) {
        VertexId next_leaf = static_cast<VertexId>((j + 1) % legs + 1);
        wp[static_cast<std::size_t>(j)] = {{R(0), tree->vertex_point(0)},
                                           {R(1), tree->vertex_point(next_leaf)}};
    }
    auto map = PLTreeMap<R>::from_waypoints(tree, wp);
    return {std::move(tree), std::move(map)};
}

}  // namespace treedyn
