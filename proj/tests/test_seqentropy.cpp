#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "support/oracles.hpp"
#include "treedyn/examples.hpp"
#include "treedyn/seqentropy.hpp"

using namespace treedyn;

namespace {
using Q = Rational;

template <class R>
std::vector<TreePoint<R>> line_samples(int denom) {
    std::vector<TreePoint<R>> out;
    for (int k = 0; k <= denom; ++k) out.push_back({0, R(k) / denom});
    return out;
}

// independent visit masks: orbit recomputed here, no shared machinery
template <class R>
std::vector<std::pair<std::uint64_t, std::uint64_t>> visit_masks(
    const PLTreeMap<R>& map, const std::vector<TreePoint<R>>& samples, const Ball<R>& U,
    const Ball<R>& V, int horizon) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (const auto& s : samples) {
        TreePoint<R> p = map.tree().canonical(s);
        std::uint64_t mu = 0, mv = 0;
        for (int t = 1; t <= horizon; ++t) {
            p = map.evaluate(p);
            if (distance(map.tree(), U.center, p) <= U.radius) mu |= 1ULL << (t - 1);
            if (distance(map.tree(), V.center, p) <= V.radius) mv |= 1ULL << (t - 1);
        }
        out.push_back({mu, mv});
    }
    return out;
}

// exhaustive maximum over all time subsets of {1..horizon}
int brute_max_cover(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& masks,
                    int horizon) {
    int best = 0;
    for (std::uint64_t set = 1; set < (1ULL << horizon); ++set) {
        int k = __builtin_popcountll(set);
        if (k <= best) continue;
        std::vector<int> bits;
        for (int b = 0; b < horizon; ++b)
            if (set >> b & 1) bits.push_back(b);
        std::vector<char> seen(1u << k, 0);
        unsigned found = 0;
        for (const auto& [mu, mv] : masks) {
            if (((mu | mv) & set) != set) continue;
            unsigned pat = 0;
            for (int i = 0; i < k; ++i)
                if (mv >> bits[static_cast<std::size_t>(i)] & 1) pat |= 1u << i;
            if (!seen[pat]) {
                seen[pat] = 1;
                ++found;
            }
        }
        if (found == (1u << k)) best = k;
    }
    return best;
}
}  // namespace

TEST_CASE("time sequences enumerate and validate") {
    auto full = TimeSequence::full();
    CHECK(full.term(1) == 0);
    CHECK(full.term(5) == 4);
    CHECK(full.label() == "full");
    auto p2 = TimeSequence::pow2();
    CHECK(p2.term(1) == 1);
    CHECK(p2.term(6) == 32);
    CHECK(p2.term(62) == (1LL << 61));
    CHECK_THROWS_AS(p2.term(63), InputError);
    CHECK(p2.label() == "pow2");
    auto cust = TimeSequence::custom({0, 3, 7});
    CHECK(cust.term(2) == 3);
    CHECK(cust.label() == "custom:0,3,7");
    CHECK_THROWS_AS(cust.term(4), InputError);
    CHECK_THROWS_AS(full.term(0), InputError);
    CHECK_THROWS_AS(TimeSequence::custom({}), InputError);
    CHECK_THROWS_AS(TimeSequence::custom({-1, 2}), InputError);
    CHECK_THROWS_AS(TimeSequence::custom({1, 1}), InputError);
}

TEST_CASE("hand-checked separated and spanning counts on the identity") {
    auto id = library_identity<Q>();
    std::vector<TreePoint<Q>> pts{{0, Q(0)}, {0, Q(3, 10)}, {0, Q(3, 5)}, {0, Q(9, 10)}};
    auto seq = TimeSequence::full();
    // pairwise gaps are 3/10: all separated at eps 1/4, thinned at 35/100
    CHECK(separated_count(id.map, pts, seq, 1, Q(1, 4)) == 4);
    CHECK(separated_count(id.map, pts, seq, 1, Q(35, 100)) == 2);
    CHECK(spanning_count(id.map, pts, seq, 1, Q(1, 4)) == 4);
    CHECK(spanning_count(id.map, pts, seq, 1, Q(35, 100)) == 2);
    // identity: observation metric is independent of n
    CHECK(separated_count(id.map, pts, seq, 4, Q(1, 4)) == 4);
    CHECK_THROWS_AS(separated_count(id.map, {}, seq, 1, Q(1)), InputError);
    CHECK_THROWS_AS(separated_count(id.map, pts, seq, 0, Q(1)), InputError);
    CHECK_THROWS_AS(spanning_count(id.map, pts, seq, 1, Q(0)), InputError);
}

TEST_CASE("spanning at eps stays between r <= s and s(2eps) <= r(eps)") {
    auto tent = library_tent<Q>(Q(2));
    auto samples = line_samples<Q>(128);
    auto seq = TimeSequence::full();
    for (int n : {1, 2, 4, 6}) {
        for (const Q& eps : {Q(1, 20), Q(1, 10), Q(1, 5)}) {
            long long s = separated_count(tent.map, samples, seq, n, eps);
            long long r = spanning_count(tent.map, samples, seq, n, eps);
            long long s2 = separated_count(tent.map, samples, seq, n, Q(eps * 2));
            CHECK(r <= s);
            CHECK(s2 <= r);
        }
    }
}

TEST_CASE("identity has zero entropy slope, expanding tent a positive one") {
    auto id = library_identity<double>();
    auto samples = line_samples<double>(512);
    auto est = h_A_estimate(id.map, samples, TimeSequence::full(), 8, {0.01, 0.05});
    CHECK(est.headline < 1e-12);
    for (const auto& block : est.blocks) {
        CHECK(std::abs(block.slope) < 1e-12);
        for (std::size_t i = 1; i < block.rows.size(); ++i)
            CHECK(block.rows[i].separated == block.rows[0].separated);
    }

    auto tent = library_tent<double>(2.0);
    auto big = line_samples<double>(1 << 12);
    auto et = h_A_estimate(tent.map, big, TimeSequence::full(), 10, {0.01});
    CHECK(et.headline > 0.4);
    CHECK(et.headline < 0.8);
    CHECK(et.blocks[0].fit_hi >= 2);
    // separated counts must grow monotonically in n for fixed eps
    for (std::size_t i = 1; i < et.blocks[0].rows.size(); ++i)
        CHECK(et.blocks[0].rows[i].separated >= et.blocks[0].rows[i - 1].separated);
}

TEST_CASE("fully saturated blocks report zero slope and the flag") {
    auto tent = library_tent<Q>(Q(2));
    auto samples = line_samples<Q>(32);
    auto est = h_A_estimate(tent.map, samples, TimeSequence::full(), 4, {Q(1, 1000000)});
    REQUIRE(est.blocks.size() == 1);
    CHECK(est.blocks.front().saturated_all);
    CHECK(est.blocks.front().slope == 0.0);
    CHECK(est.headline == 0.0);
    for (const auto& row : est.blocks.front().rows) {
        CHECK(row.saturated);
        CHECK(row.separated == 33);
    }
}

TEST_CASE("fit window stops below the saturation point") {
    auto tent = library_tent<Q>(Q(2));
    auto samples = line_samples<Q>(64);
    auto est = h_A_estimate(tent.map, samples, TimeSequence::full(), 8, {Q(1, 10)});
    const auto& block = est.blocks.front();
    int n_hi = 0;
    for (const auto& row : block.rows)
        if (!row.saturated) n_hi = row.n;
    REQUIRE(n_hi >= 2);
    CHECK(block.fit_hi == n_hi);
    CHECK(block.fit_lo >= 1);
    CHECK(block.fit_lo < block.fit_hi);
    bool any_saturated = false;
    for (const auto& row : block.rows) any_saturated |= row.saturated;
    CHECK(any_saturated);
    CHECK(est.headline > 0.0);
}

TEST_CASE("entropy estimate rejects bad inputs") {
    auto id = library_identity<Q>();
    auto samples = line_samples<Q>(8);
    CHECK_THROWS_AS(h_A_estimate(id.map, samples, TimeSequence::full(), 1, {Q(1, 10)}),
                    InputError);
    CHECK_THROWS_AS(h_A_estimate(id.map, samples, TimeSequence::full(), 4, {}), InputError);
    CHECK_THROWS_AS(h_A_estimate(id.map, samples, TimeSequence::full(), 4, {Q(0)}), InputError);
    CHECK_THROWS_AS(
        h_A_estimate(id.map, std::vector<TreePoint<Q>>{}, TimeSequence::full(), 4, {Q(1)}),
        InputError);
}

TEST_CASE("independence search matches exhaustive subset enumeration") {
    auto tent = library_tent<Q>(Q(2));
    auto samples = line_samples<Q>(256);
    Ball<Q> U{{0, Q(1, 8)}, Q(1, 16)};
    Ball<Q> V{{0, Q(7, 8)}, Q(1, 16)};
    for (int horizon : {4, 6, 8}) {
        auto cert = independence_search(tent.map, samples, U, V, horizon, 10);
        auto masks = visit_masks(tent.map, samples, U, V, horizon);
        int brute = brute_max_cover(masks, horizon);
        if (brute >= 2) {
            CHECK(cert.size() == brute);
            CHECK(cert.found());
            REQUIRE(cert.witnesses.size() == (1u << cert.size()));
        } else {
            CHECK(cert.size() == 0);
        }
        CHECK_FALSE(cert.budget_exhausted);
    }
}

TEST_CASE("certificates carry self-consistent witnesses") {
    auto tent = library_tent<Q>(Q(2));
    auto samples = line_samples<Q>(256);
    Ball<Q> U{{0, Q(1, 8)}, Q(1, 16)};
    Ball<Q> V{{0, Q(7, 8)}, Q(1, 16)};
    auto cert = independence_search(tent.map, samples, U, V, 8, 8);
    REQUIRE(cert.found());
    REQUIRE(cert.times.size() >= 2);
    for (std::size_t i = 1; i < cert.times.size(); ++i) CHECK(cert.times[i] > cert.times[i - 1]);
    // re-walk every witness orbit against its claimed pattern
    for (const auto& [pat, w] : cert.witnesses) {
        TreePoint<Q> p = w;
        std::size_t idx = 0;
        for (long long t = 1; t <= cert.times.back(); ++t) {
            p = tent.map.evaluate(p);
            if (idx < cert.times.size() && t == cert.times[idx]) {
                const Ball<Q>& target = (pat >> idx & 1) ? V : U;
                CHECK(distance(*tent.tree, target.center, p) <= target.radius);
                ++idx;
            }
        }
    }
}

TEST_CASE("identity map yields no certificate of size two") {
    auto id = library_identity<Q>();
    auto samples = line_samples<Q>(64);
    Ball<Q> U{{0, Q(1, 4)}, Q(1, 10)};
    Ball<Q> V{{0, Q(3, 4)}, Q(1, 10)};
    auto cert = independence_search(id.map, samples, U, V, 10, 5);
    CHECK_FALSE(cert.found());
    CHECK(cert.size() == 0);
    CHECK(cert.times.empty());
    CHECK(cert.witnesses.empty());
}

TEST_CASE("independence search validates balls and bounds") {
    auto tent = library_tent<Q>(Q(2));
    auto samples = line_samples<Q>(16);
    Ball<Q> U{{0, Q(1, 4)}, Q(1, 4)};
    Ball<Q> V{{0, Q(3, 4)}, Q(1, 4)};  // balls touch: rejected
    CHECK_THROWS_AS(independence_search(tent.map, samples, U, V, 8, 4), InputError);
    Ball<Q> u2{{0, Q(1, 8)}, Q(1, 16)};
    Ball<Q> v2{{0, Q(7, 8)}, Q(1, 16)};
    CHECK_THROWS_AS(independence_search(tent.map, samples, u2, v2, 0, 4), InputError);
    CHECK_THROWS_AS(independence_search(tent.map, samples, u2, v2, 63, 4), InputError);
    CHECK_THROWS_AS(independence_search(tent.map, samples, u2, v2, 8, 0), InputError);
    CHECK_THROWS_AS(independence_search(tent.map, samples, u2, v2, 8, 25), InputError);
    CHECK_THROWS_AS(
        independence_search(tent.map, std::vector<TreePoint<Q>>{}, u2, v2, 8, 4), InputError);
    Ball<Q> zero{{0, Q(1, 8)}, Q(0)};
    CHECK_THROWS_AS(independence_search(tent.map, samples, zero, v2, 8, 4), InputError);
}

TEST_CASE("a starved budget is reported, not papered over") {
    auto tent = library_tent<Q>(Q(2));
    auto samples = line_samples<Q>(256);
    Ball<Q> U{{0, Q(1, 8)}, Q(1, 16)};
    Ball<Q> V{{0, Q(7, 8)}, Q(1, 16)};
    auto cert = independence_search(tent.map, samples, U, V, 8, 8, 50);
    CHECK(cert.budget_exhausted);
    CHECK(cert.checks_used <= 50 + 1);
}

TEST_CASE("in_pair_scan keeps pairs certified at every radius level") {
    auto tent = library_tent<Q>(Q(2));
    auto samples = line_samples<Q>(512);
    std::vector<std::pair<TreePoint<Q>, TreePoint<Q>>> pairs{
        {{0, Q(1, 8)}, {0, Q(7, 8)}},
        {{0, Q(1, 2)}, {0, Q(1, 2)}},  // zero distance: skipped outright
    };
    auto hits = in_pair_scan(tent.map, samples, pairs, 12, 2, 3);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].pair_index == 0);
    REQUIRE(hits[0].radii.size() == 3);
    CHECK(hits[0].radii[0] == Q(3, 16));
    CHECK(hits[0].radii[1] == Q(3, 32));
    CHECK(hits[0].radii[2] == Q(3, 64));
    CHECK(hits[0].finest.found());

    auto id = library_identity<Q>();
    auto none = in_pair_scan(id.map, samples, pairs, 10, 2, 2);
    CHECK(none.empty());
    CHECK_THROWS_AS(in_pair_scan(id.map, samples, pairs, 10, 1, 2), InputError);
    CHECK_THROWS_AS(in_pair_scan(id.map, samples, pairs, 10, 2, 0), InputError);
}

TEST_CASE("entropy_on_restriction equals the explicit restriction") {
    auto sys = library_contraction<Q>(Q(1, 2));
    auto grid = std::make_shared<const SampleGrid<Q>>(build_grid(sys.tree, Q(1, 8)));
    auto graph = build_eps_chain_graph(sys.map, grid, Q(1, 8));
    auto cr = chain_recurrent_cells(graph);
    REQUIRE(!cr.empty());
    auto a = entropy_on_restriction(sys.map, *grid, cr, TimeSequence::pow2(), 6, {Q(1, 20)});
    auto b = h_A_estimate(sys.map, restrict_samples(*grid, cr), TimeSequence::pow2(), 6,
                          {Q(1, 20)});
    CHECK(a.headline == b.headline);
    REQUIRE(a.blocks.size() == b.blocks.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        CHECK(a.blocks[i].slope == b.blocks[i].slope);
        REQUIRE(a.blocks[i].rows.size() == b.blocks[i].rows.size());
        for (std::size_t j = 0; j < a.blocks[i].rows.size(); ++j) {
            CHECK(a.blocks[i].rows[j].separated == b.blocks[i].rows[j].separated);
            CHECK(a.blocks[i].rows[j].spanning == b.blocks[i].rows[j].spanning);
        }
    }
    CHECK(a.headline < 0.05);
}
