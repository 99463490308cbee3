#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "treedyn/chainrec.hpp"
#include "treedyn/plmap.hpp"

namespace treedyn {

template <class R>
struct OrbitRecord {
    TreePoint<R> base;
    std::vector<TreePoint<R>> points;  // points[k] = f^k(base), k = 0..horizon
};

template <class R>
OrbitRecord<R> compute_orbit(const PLTreeMap<R>& map, const TreePoint<R>& p, int horizon) {
    if (horizon < 0) throw InputError("orbit: negative horizon");
    OrbitRecord<R> rec;
    rec.base = map.tree().canonical(p);
    rec.points.reserve(static_cast<std::size_t>(horizon) + 1);
    rec.points.push_back(rec.base);
    for (int k = 0; k < horizon; ++k) rec.points.push_back(map.evaluate(rec.points.back()));
    return rec;
}

enum class PeriodicityStatus { periodic, eventually_periodic, undetermined };

struct PeriodicityReport {
    PeriodicityStatus status = PeriodicityStatus::undetermined;
    int period = 0;     // valid when status != undetermined
    int preperiod = 0;  // 0 for periodic points
    int steps_used = 0;
};

namespace detail {

template <class R>
PeriodicityReport detect_period_exact(const PLTreeMap<R>& map, TreePoint<R> p, int max_steps) {
    std::map<std::pair<EdgeId, R>, int> seen;
    p = map.tree().canonical(p);
    for (int k = 0; k <= max_steps; ++k) {
        auto key = std::make_pair(p.edge, p.offset);
        auto [it, fresh] = seen.emplace(key, k);
        if (!fresh) {
            PeriodicityReport rep;
            rep.preperiod = it->second;
            rep.period = k - it->second;
            rep.status = rep.preperiod == 0 ? PeriodicityStatus::periodic
                                            : PeriodicityStatus::eventually_periodic;
            rep.steps_used = k;
            return rep;
        }
        p = map.evaluate(p);
    }
    PeriodicityReport rep;
    rep.steps_used = max_steps;
    return rep;
}

// Tolerance-based detection: find the first near-return, then insist the
// candidate cycle is resolved (pairwise gaps above 2*tol), otherwise report
// undetermined rather than guess.
template <class R>
PeriodicityReport detect_period_approx(const PLTreeMap<R>& map, const TreePoint<R>& p,
                                       int max_steps, const R& tol) {
    OrbitRecord<R> orbit = compute_orbit(map, p, max_steps);
    const auto& T = map.tree();
    const auto& pts = orbit.points;
    for (int k = 1; k <= max_steps; ++k) {
        for (int j = 0; j < k; ++j) {
            if (distance(T, pts[static_cast<std::size_t>(j)],
                         pts[static_cast<std::size_t>(k)]) >= tol)
                continue;
            bool resolved = true;
            for (int a = j; a < k && resolved; ++a)
                for (int b = j; b < a; ++b)
                    if (distance(T, pts[static_cast<std::size_t>(a)],
                                 pts[static_cast<std::size_t>(b)]) <= tol * R(2)) {
                        resolved = false;
                        break;
                    }
            PeriodicityReport rep;
            rep.steps_used = k;
            if (!resolved) return rep;
            rep.preperiod = j;
            rep.period = k - j;
            rep.status = j == 0 ? PeriodicityStatus::periodic
                                : PeriodicityStatus::eventually_periodic;
            return rep;
        }
    }
    PeriodicityReport rep;
    rep.steps_used = max_steps;
    return rep;
}

}  // namespace detail

template <class R>
PeriodicityReport detect_period(const PLTreeMap<R>& map, const TreePoint<R>& p, int max_steps,
                                const R& tol = R(0)) {
    if (max_steps < 1) throw InputError("detect_period: max_steps must be at least 1");
    if constexpr (NumTraits<R>::exact)
        return detail::detect_period_exact(map, p, max_steps);
    else
        return detail::detect_period_approx(map, p, max_steps,
                                            tol > R(0) ? tol : R(1e-9));
}

template <class R>
struct OmegaLimitEstimate {
    std::shared_ptr<const SampleGrid<R>> grid;
    std::vector<int> cells;  // sorted, unique
};

// Cells hit by the orbit tail after discarding a burn-in prefix.
template <class R>
OmegaLimitEstimate<R> omega_limit_estimate(const PLTreeMap<R>& map, const TreePoint<R>& p,
                                           int burn_in, int window,
                                           std::shared_ptr<const SampleGrid<R>> grid) {
    if (!grid) throw InputError("omega limit: null grid");
    if (burn_in < 0 || window < 1) throw InputError("omega limit: bad burn_in/window");
    TreePoint<R> x = map.iterate(map.tree().canonical(p), burn_in);
    std::vector<char> hit(static_cast<std::size_t>(grid->size()), 0);
    for (int k = 0; k < window; ++k) {
        hit[static_cast<std::size_t>(nearest_cell(*grid, x))] = 1;
        x = map.evaluate(x);
    }
    OmegaLimitEstimate<R> est;
    est.grid = std::move(grid);
    for (std::size_t c = 0; c < hit.size(); ++c)
        if (hit[c]) est.cells.push_back(static_cast<int>(c));
    return est;
}

enum class PairKind { asymptotic, li_yorke, distal, undetermined };

template <class R>
struct PairClassification {
    PairKind kind = PairKind::undetermined;
    R tail_min{};
    R tail_max{};
    int tail_start = 0;
};

// Proximality profile of a pair over the tail half of the horizon. The labels
// are sampled-orbit evidence, not proofs.
template <class R>
PairClassification<R> classify_pair(const PLTreeMap<R>& map, const TreePoint<R>& x,
                                    const TreePoint<R>& y, int horizon, const R& tol) {
    if (horizon < 1) throw InputError("classify_pair: horizon must be at least 1");
    if (!(tol > R(0))) throw InputError("classify_pair: tol must be positive");
    const auto& T = map.tree();
    TreePoint<R> a = T.canonical(x), b = T.canonical(y);
    PairClassification<R> out;
    out.tail_start = (horizon + 1) / 2;
    bool first = true;
    for (int n = 0; n <= horizon; ++n) {
        if (n >= out.tail_start) {
            R d = distance(T, a, b);
            if (first || d < out.tail_min) out.tail_min = d;
            if (first || d > out.tail_max) out.tail_max = d;
            first = false;
        }
        if (n < horizon) {
            a = map.evaluate(a);
            b = map.evaluate(b);
        }
    }
    if (out.tail_max < tol)
        out.kind = PairKind::asymptotic;
    else if (out.tail_min > tol)
        out.kind = PairKind::distal;
    else if (out.tail_min < tol && out.tail_max > tol * R(2))
        out.kind = PairKind::li_yorke;
    return out;
}

template <class R>
struct EquicontinuityRow {
    R radius;
    R max_diameter;  // max over steps of the diameter of the evolved ball sample
    int points_in_ball;
};

// Spread of orbits started inside shrinking balls around a periodic point.
template <class R>
std::vector<EquicontinuityRow<R>> equicontinuity_probe(const PLTreeMap<R>& map,
                                                       const TreePoint<R>& p,
                                                       const std::vector<R>& radii, int horizon,
                                                       const std::vector<TreePoint<R>>& samples) {
    PeriodicityReport rep = detect_period(map, p, horizon > 2 ? 2 * horizon : 4);
    if (rep.status != PeriodicityStatus::periodic)
        throw InputError("equicontinuity probe: base point not verified periodic");
    const auto& T = map.tree();
    TreePoint<R> base = T.canonical(p);
    std::vector<EquicontinuityRow<R>> table;
    for (const R& r : radii) {
        std::vector<TreePoint<R>> cloud{base};
        for (const auto& s : samples)
            if (distance(T, base, s) <= r) cloud.push_back(T.canonical(s));
        EquicontinuityRow<R> row{r, R(0), static_cast<int>(cloud.size())};
        for (int n = 0; n <= horizon; ++n) {
            for (std::size_t i = 0; i < cloud.size(); ++i)
                for (std::size_t j = 0; j < i; ++j) {
                    R d = distance(T, cloud[i], cloud[j]);
                    if (d > row.max_diameter) row.max_diameter = d;
                }
            if (n < horizon)
                for (auto& q : cloud) q = map.evaluate(q);
        }
        table.push_back(row);
    }
    return table;
}

}  // namespace treedyn
