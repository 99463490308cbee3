#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "treedyn/chainrec.hpp"
#include "treedyn/parallel.hpp"
#include "treedyn/plmap.hpp"

namespace treedyn {

// Time sequence a_1 < a_2 < ... of iterate exponents along which orbits are
// observed. "full" is 0,1,2,...; "pow2" is 1,2,4,8,...
struct TimeSequence {
    enum class Kind { full, pow2, custom };
    Kind kind = Kind::full;
    std::vector<long long> terms;  // custom only

    static TimeSequence full() { return {Kind::full, {}}; }
    static TimeSequence pow2() { return {Kind::pow2, {}}; }
    static TimeSequence custom(std::vector<long long> t) {
        if (t.empty()) throw InputError("time sequence: empty");
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] < 0) throw InputError("time sequence: negative term");
            if (i > 0 && t[i] <= t[i - 1])
                throw InputError("time sequence: terms must be strictly increasing");
        }
        return {Kind::custom, std::move(t)};
    }

    long long term(int i) const {  // 1-based
        if (i < 1) throw InputError("time sequence: index must be positive");
        switch (kind) {
            case Kind::full:
                return i - 1;
            case Kind::pow2:
                if (i > 62) throw InputError("time sequence: pow2 index too large");
                return 1LL << (i - 1);
            case Kind::custom:
                if (static_cast<std::size_t>(i) > terms.size())
                    throw InputError("time sequence: index beyond custom terms");
                return terms[static_cast<std::size_t>(i - 1)];
        }
        throw InternalError("time sequence: bad kind");
    }

    std::string label() const {
        switch (kind) {
            case Kind::full:
                return "full";
            case Kind::pow2:
                return "pow2";
            case Kind::custom: {
                std::string s = "custom:";
                for (std::size_t i = 0; i < terms.size(); ++i) {
                    if (i) s += ',';
                    s += std::to_string(terms[i]);
                }
                return s;
            }
        }
        return "?";
    }
};

namespace detail {

// positions[x * n + i] = f^{a_{i+1}}(samples[x])
template <class R>
std::vector<TreePoint<R>> observed_positions(const PLTreeMap<R>& map,
                                             const std::vector<TreePoint<R>>& samples,
                                             const TimeSequence& seq, int n) {
    std::vector<long long> times(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) times[static_cast<std::size_t>(i - 1)] = seq.term(i);
    std::vector<TreePoint<R>> pos(samples.size() * static_cast<std::size_t>(n));
    const auto& tree = map.tree();
    parallel_for(samples.size(), [&](std::size_t x) {
        TreePoint<R> p = tree.canonical(samples[x]);
        long long t = 0;
        for (int i = 0; i < n; ++i) {
            long long target = times[static_cast<std::size_t>(i)];
            for (; t < target; ++t) p = map.evaluate(p);
            pos[x * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = p;
        }
    });
    return pos;
}

// true when max_i d(x_i, y_i) <= eps over the first n coordinates
template <class R>
bool within_eps(const MetricTree<R>& tree, const TreePoint<R>* xs, const TreePoint<R>* ys, int n,
                const R& eps) {
    for (int i = 0; i < n; ++i)
        if (distance(tree, xs[i], ys[i]) > eps) return false;
    return true;
}

// Greedy first-fit maximal separated set, deterministic in sample order.
template <class R>
std::vector<int> greedy_separated(const MetricTree<R>& tree, const std::vector<TreePoint<R>>& pos,
                                  std::size_t m, int stride, int n, const R& eps) {
    std::vector<int> kept;
    for (std::size_t x = 0; x < m; ++x) {
        const TreePoint<R>* px = &pos[x * static_cast<std::size_t>(stride)];
        bool covered = false;
        for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
            const TreePoint<R>* py =
                &pos[static_cast<std::size_t>(*it) * static_cast<std::size_t>(stride)];
            if (within_eps(tree, px, py, n, eps)) {
                covered = true;
                break;
            }
        }
        if (!covered) kept.push_back(static_cast<int>(x));
    }
    return kept;
}

// Greedy set cover with centers drawn from the separated set. The separated
// set is maximal, so it always covers; restricting candidates to it keeps the
// spanning count at or below the separated count.
template <class R>
long long greedy_spanning(const MetricTree<R>& tree, const std::vector<TreePoint<R>>& pos,
                          std::size_t m, int stride, int n, const R& eps,
                          const std::vector<int>& separated) {
    std::vector<std::vector<int>> ball(separated.size());
    parallel_for(separated.size(), [&](std::size_t c) {
        const TreePoint<R>* pc =
            &pos[static_cast<std::size_t>(separated[c]) * static_cast<std::size_t>(stride)];
        for (std::size_t x = 0; x < m; ++x)
            if (within_eps(tree, pc, &pos[x * static_cast<std::size_t>(stride)], n, eps))
                ball[c].push_back(static_cast<int>(x));
    });
    std::vector<char> covered(m, 0);
    std::size_t remaining = m;
    // lazy max-coverage: priority pair (gain, -index)
    std::priority_queue<std::pair<long long, int>> heap;
    for (std::size_t c = 0; c < separated.size(); ++c)
        heap.push({static_cast<long long>(ball[c].size()), -static_cast<int>(c)});
    long long count = 0;
    while (remaining > 0) {
        if (heap.empty()) throw InternalError("spanning: cover candidates exhausted");
        auto [gain, negc] = heap.top();
        heap.pop();
        auto c = static_cast<std::size_t>(-negc);
        long long fresh = 0;
        for (int x : ball[c])
            if (!covered[static_cast<std::size_t>(x)]) ++fresh;
        if (fresh == 0) continue;
        if (!heap.empty() && fresh < heap.top().first) {
            heap.push({fresh, negc});
            continue;
        }
        for (int x : ball[c]) {
            if (!covered[static_cast<std::size_t>(x)]) {
                covered[static_cast<std::size_t>(x)] = 1;
                --remaining;
            }
        }
        ++count;
    }
    return count;
}

}  // namespace detail

// Size of a greedy maximal eps-separated subset under the observation metric
// max_{i<=n} d(f^{a_i} x, f^{a_i} y).
template <class R>
long long separated_count(const PLTreeMap<R>& map, const std::vector<TreePoint<R>>& samples,
                          const TimeSequence& seq, int n, const R& eps) {
    if (samples.empty()) throw InputError("separated_count: no samples");
    if (n < 1) throw InputError("separated_count: n must be positive");
    if (!(eps > R(0))) throw InputError("separated_count: eps must be positive");
    auto pos = detail::observed_positions(map, samples, seq, n);
    return static_cast<long long>(
        detail::greedy_separated(map.tree(), pos, samples.size(), n, n, eps).size());
}

template <class R>
long long spanning_count(const PLTreeMap<R>& map, const std::vector<TreePoint<R>>& samples,
                         const TimeSequence& seq, int n, const R& eps) {
    if (samples.empty()) throw InputError("spanning_count: no samples");
    if (n < 1) throw InputError("spanning_count: n must be positive");
    if (!(eps > R(0))) throw InputError("spanning_count: eps must be positive");
    auto pos = detail::observed_positions(map, samples, seq, n);
    auto sep = detail::greedy_separated(map.tree(), pos, samples.size(), n, n, eps);
    return detail::greedy_spanning(map.tree(), pos, samples.size(), n, n, eps, sep);
}

struct EntropyRow {
    int n;
    long long separated;
    long long spanning;
    bool saturated;  // separated count pinned at the sample-set ceiling
};

template <class R>
struct EntropyEpsilonBlock {
    R epsilon;
    std::vector<EntropyRow> rows;  // n = 1..n_max
    double slope = 0.0;
    int fit_lo = 0, fit_hi = 0;  // n-range used by the fit; 0,0 when no fit
    bool saturated_all = false;
};

template <class R>
struct EntropyEstimate {
    std::string sequence;
    int n_max = 0;
    int sample_count = 0;
    std::vector<EntropyEpsilonBlock<R>> blocks;
    double headline = 0.0;  // max slope over epsilons, floored at zero
};

// Growth-rate estimate of separated counts along the sequence. The slope fit
// debiases each kept count first: greedy packing over m samples keeps a
// fraction x of them when the separation capacity is x/(1-x) of m (renewal
// argument with mean-gap spacing), so s*m/(m-s) tracks the capacity even once
// the kept set occupies a sizable share of the samples. Raw counts stay in
// the rows. Rows at or above 3/4 of the sample count are marked saturated and
// excluded: there the sample set is nearly exhausted and the debiasing factor
// amplifies packing noise. The fit window is the top half of the n-range
// below the first saturated row; a fully saturated block contributes slope 0.
template <class R>
EntropyEstimate<R> h_A_estimate(const PLTreeMap<R>& map, const std::vector<TreePoint<R>>& samples,
                                const TimeSequence& seq, int n_max,
                                const std::vector<R>& epsilons) {
    if (samples.empty()) throw InputError("entropy: no samples");
    if (n_max < 2) throw InputError("entropy: n_max must be at least 2");
    if (epsilons.empty()) throw InputError("entropy: no epsilons");
    for (const R& e : epsilons)
        if (!(e > R(0))) throw InputError("entropy: eps must be positive");

    auto pos = detail::observed_positions(map, samples, seq, n_max);
    const auto& tree = map.tree();
    auto m = samples.size();

    EntropyEstimate<R> est;
    est.sequence = seq.label();
    est.n_max = n_max;
    est.sample_count = static_cast<int>(m);

    for (const R& eps : epsilons) {
        EntropyEpsilonBlock<R> block;
        block.epsilon = eps;
        for (int n = 1; n <= n_max; ++n) {
            auto sep = detail::greedy_separated(tree, pos, m, n_max, n, eps);
            long long s = static_cast<long long>(sep.size());
            long long r = detail::greedy_spanning(tree, pos, m, n_max, n, eps, sep);
            bool sat = 4 * s >= 3 * static_cast<long long>(m);
            block.rows.push_back({n, s, r, sat});
        }
        int n_hi = 0;
        for (const auto& row : block.rows)
            if (!row.saturated) n_hi = row.n;
        if (n_hi < 2) {
            block.saturated_all = n_hi == 0;
            block.slope = 0.0;
        } else {
            int n_lo = n_hi / 2 + 1;
            if (n_lo >= n_hi) n_lo = n_hi - 1;
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int cnt = 0;
            for (const auto& row : block.rows) {
                if (row.n < n_lo || row.n > n_hi) continue;
                double x = row.n;
                double s = static_cast<double>(row.separated);
                double y = std::log(s * static_cast<double>(m) /
                                    (static_cast<double>(m) - s));
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                ++cnt;
            }
            double denom = cnt * sxx - sx * sx;
            block.slope = denom != 0.0 ? (cnt * sxy - sx * sy) / denom : 0.0;
            block.fit_lo = n_lo;
            block.fit_hi = n_hi;
        }
        est.blocks.push_back(std::move(block));
    }
    for (const auto& block : est.blocks)
        if (block.slope > est.headline) est.headline = block.slope;
    return est;
}

template <class R>
struct Ball {
    TreePoint<R> center;
    R radius;
};

template <class R>
bool ball_contains(const MetricTree<R>& tree, const Ball<R>& ball, const TreePoint<R>& p) {
    return distance(tree, ball.center, p) <= ball.radius;
}

// Certificate that a time set J realizes all |{U,V}|^|J| visit patterns among
// the given samples. Pattern bit i set means the witness sits in V at time
// J[i], clear means U. Sizes below 2 certify nothing and are reported empty.
template <class R>
struct IndependenceCertificate {
    Ball<R> ball_u, ball_v;
    std::vector<long long> times;  // sorted iterate exponents, empty if none found
    std::vector<std::pair<std::uint32_t, TreePoint<R>>> witnesses;  // (pattern, sample)
    long long checks_used = 0;
    bool budget_exhausted = false;

    int size() const { return static_cast<int>(times.size()); }
    bool found() const { return times.size() >= 2; }
};

namespace detail {

struct MaskPair {
    std::uint64_t in_u = 0, in_v = 0;
};

// Tests whether all 2^k patterns over the candidate times are realized.
// Counts sample visits against the budget; returns -1 on budget exhaustion,
// 1 when fully covered, 0 otherwise. The first witness per pattern is
// recorded into `first` when requested.
inline int coverage_full(const std::vector<MaskPair>& masks, const std::vector<int>& times_bit,
                         long long& budget, std::vector<int>* first) {
    int k = static_cast<int>(times_bit.size());
    std::uint64_t need = 0;
    for (int b : times_bit) need |= 1ULL << b;
    std::uint32_t total = 1u << k;
    std::vector<char> seen(total, 0);
    if (first) first->assign(total, -1);
    std::uint32_t found = 0;
    for (std::size_t x = 0; x < masks.size(); ++x) {
        if (budget-- <= 0) return -1;
        std::uint64_t have = masks[x].in_u | masks[x].in_v;
        if ((have & need) != need) continue;
        std::uint32_t pat = 0;
        for (int i = 0; i < k; ++i)
            if (masks[x].in_v >> times_bit[static_cast<std::size_t>(i)] & 1) pat |= 1u << i;
        if (!seen[pat]) {
            seen[pat] = 1;
            if (first) (*first)[pat] = static_cast<int>(x);
            if (++found == total && !first) return 1;
        }
    }
    return found == total ? 1 : 0;
}

}  // namespace detail

// Depth-first search over time sets, largest first, pruning branches whose
// remaining times cannot beat the best size found. Extending a non-covering
// set never helps (patterns of a subset are projections), so only covering
// prefixes are expanded.
template <class R>
IndependenceCertificate<R> independence_search(const PLTreeMap<R>& map,
                                               const std::vector<TreePoint<R>>& samples,
                                               const Ball<R>& ball_u, const Ball<R>& ball_v,
                                               int horizon, int k_max,
                                               long long budget = 100000000) {
    const auto& tree = map.tree();
    tree.check_point(ball_u.center);
    tree.check_point(ball_v.center);
    if (!(ball_u.radius > R(0)) || !(ball_v.radius > R(0)))
        throw InputError("independence: ball radius must be positive");
    if (distance(tree, ball_u.center, ball_v.center) <= ball_u.radius + ball_v.radius)
        throw InputError("independence: balls must be disjoint");
    if (horizon < 1 || horizon > 62) throw InputError("independence: horizon must be in [1, 62]");
    if (k_max < 1) throw InputError("independence: k_max must be positive");
    if (k_max > 24) throw InputError("independence: k_max above 24 is not supported");
    if (samples.empty()) throw InputError("independence: no samples");

    IndependenceCertificate<R> cert;
    cert.ball_u = ball_u;
    cert.ball_v = ball_v;

    std::vector<detail::MaskPair> masks(samples.size());
    parallel_for(samples.size(), [&](std::size_t x) {
        TreePoint<R> p = tree.canonical(samples[x]);
        for (int t = 1; t <= horizon; ++t) {
            p = map.evaluate(p);
            if (ball_contains(tree, ball_u, p)) masks[x].in_u |= 1ULL << (t - 1);
            if (ball_contains(tree, ball_v, p)) masks[x].in_v |= 1ULL << (t - 1);
        }
    });

    long long remaining = budget;
    std::vector<int> best;
    std::vector<int> current;
    bool exhausted = false;
    // iterative DFS: stack of next time-bit to try at each depth
    std::function<void(int)> dfs = [&](int next_bit) {
        if (exhausted) return;
        for (int b = next_bit; b < horizon; ++b) {
            if (static_cast<int>(current.size()) + (horizon - b) <= static_cast<int>(best.size()))
                return;  // cannot beat best even taking every remaining time
            current.push_back(b);
            int ok = detail::coverage_full(masks, current, remaining, nullptr);
            if (ok < 0) {
                exhausted = true;
                current.pop_back();
                return;
            }
            if (ok == 1) {
                if (current.size() > best.size()) best = current;
                if (static_cast<int>(current.size()) < k_max) dfs(b + 1);
            }
            current.pop_back();
            if (exhausted) return;
        }
    };
    dfs(0);

    cert.checks_used = budget - remaining;
    cert.budget_exhausted = exhausted;
    if (best.size() < 2) return cert;

    std::vector<int> first;
    long long no_budget = (static_cast<long long>(samples.size()) + 1);
    if (detail::coverage_full(masks, best, no_budget, &first) != 1)
        throw InternalError("independence: witness extraction disagrees with search");
    for (int b : best) cert.times.push_back(static_cast<long long>(b) + 1);
    for (std::uint32_t pat = 0; pat < first.size(); ++pat)
        cert.witnesses.push_back(
            {pat, tree.canonical(samples[static_cast<std::size_t>(first[pat])])});

    // self-check: recompute each witness orbit and confirm the claimed pattern
    for (const auto& [pat, w] : cert.witnesses) {
        TreePoint<R> p = w;
        std::size_t idx = 0;
        for (long long t = 1; t <= cert.times.back(); ++t) {
            p = map.evaluate(p);
            if (idx < cert.times.size() && t == cert.times[idx]) {
                bool want_v = (pat >> idx) & 1;
                bool ok = want_v ? ball_contains(tree, ball_v, p)
                                 : ball_contains(tree, ball_u, p);
                if (!ok) throw InternalError("independence: certificate failed re-verification");
                ++idx;
            }
        }
    }
    return cert;
}

template <class R>
struct InPairHit {
    std::size_t pair_index;
    std::vector<R> radii;
    IndependenceCertificate<R> finest;  // certificate at the smallest radius
};

// Scans candidate pairs for joint independence that persists as the observation
// balls shrink. A pair qualifies when every tested radius yields a certificate
// of size at least k_min.
template <class R>
std::vector<InPairHit<R>> in_pair_scan(const PLTreeMap<R>& map,
                                       const std::vector<TreePoint<R>>& samples,
                                       const std::vector<std::pair<TreePoint<R>, TreePoint<R>>>& pairs,
                                       int horizon, int k_min, int levels = 3,
                                       long long budget_per_search = 100000000) {
    if (k_min < 2) throw InputError("in_pair_scan: k_min must be at least 2");
    if (levels < 1) throw InputError("in_pair_scan: levels must be positive");
    const auto& tree = map.tree();
    std::vector<InPairHit<R>> hits;
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        const auto& [x, y] = pairs[idx];
        R d = distance(tree, x, y);
        if (!(d > R(0))) continue;
        InPairHit<R> hit;
        hit.pair_index = idx;
        bool all_ok = true;
        R r = d / R(4);
        for (int lvl = 0; lvl < levels; ++lvl, r = r / R(2)) {
            auto cert = independence_search(map, samples, Ball<R>{x, r}, Ball<R>{y, r}, horizon,
                                            k_min, budget_per_search);
            if (cert.size() < k_min) {
                all_ok = false;
                break;
            }
            hit.radii.push_back(r);
            hit.finest = std::move(cert);
        }
        if (all_ok) hits.push_back(std::move(hit));
    }
    return hits;
}

template <class R>
EntropyEstimate<R> entropy_on_restriction(const PLTreeMap<R>& map, const SampleGrid<R>& grid,
                                          const std::vector<int>& cells, const TimeSequence& seq,
                                          int n_max, const std::vector<R>& epsilons) {
    return h_A_estimate(map, restrict_samples(grid, cells), seq, n_max, epsilons);
}

}  // namespace treedyn
