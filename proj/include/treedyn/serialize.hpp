#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "treedyn/chainrec.hpp"
#include "treedyn/orbits.hpp"
#include "treedyn/plmap.hpp"
#include "treedyn/seqentropy.hpp"

namespace treedyn {

using Json = nlohmann::ordered_json;

template <class R>
Json point_json(const TreePoint<R>& p) {
    Json j;
    j["edge"] = p.edge;
    j["offset"] = NumTraits<R>::format(p.offset);
    j["offset_value"] = NumTraits<R>::to_double(p.offset);
    return j;
}

template <class R>
Json to_json(const EntropyEstimate<R>& est) {
    Json j;
    j["sequence"] = est.sequence;
    j["n_max"] = est.n_max;
    j["sample_count"] = est.sample_count;
    j["headline"] = est.headline;
    j["blocks"] = Json::array();
    for (const auto& block : est.blocks) {
        Json b;
        b["epsilon"] = NumTraits<R>::format(block.epsilon);
        b["epsilon_value"] = NumTraits<R>::to_double(block.epsilon);
        b["slope"] = block.slope;
        b["fit_range"] = Json::array({block.fit_lo, block.fit_hi});
        b["saturated_all"] = block.saturated_all;
        b["rows"] = Json::array();
        for (const auto& row : block.rows) {
            Json r;
            r["n"] = row.n;
            r["separated"] = row.separated;
            r["spanning"] = row.spanning;
            r["saturated"] = row.saturated;
            b["rows"].push_back(r);
        }
        j["blocks"].push_back(b);
    }
    return j;
}

template <class R>
std::string entropy_csv(const EntropyEstimate<R>& est) {
    std::string out = "sequence,epsilon,n,separated,spanning,saturated\n";
    for (const auto& block : est.blocks)
        for (const auto& row : block.rows) {
            out += est.sequence;
            out += ',';
            out += NumTraits<R>::format(block.epsilon);
            out += ',';
            out += std::to_string(row.n);
            out += ',';
            out += std::to_string(row.separated);
            out += ',';
            out += std::to_string(row.spanning);
            out += ',';
            out += row.saturated ? "1" : "0";
            out += '\n';
        }
    return out;
}

template <class R>
Json to_json(const IndependenceCertificate<R>& cert) {
    Json j;
    j["ball_u"] = point_json(cert.ball_u.center);
    j["ball_u"]["radius"] = NumTraits<R>::format(cert.ball_u.radius);
    j["ball_v"] = point_json(cert.ball_v.center);
    j["ball_v"]["radius"] = NumTraits<R>::format(cert.ball_v.radius);
    j["size"] = cert.size();
    j["found"] = cert.found();
    j["times"] = cert.times;
    j["checks_used"] = cert.checks_used;
    j["budget_exhausted"] = cert.budget_exhausted;
    j["witnesses"] = Json::array();
    for (const auto& [pattern, point] : cert.witnesses) {
        Json w;
        std::string visits;
        for (std::size_t i = 0; i < cert.times.size(); ++i)
            visits += (pattern >> i & 1) ? 'V' : 'U';
        w["visits"] = visits;
        w["point"] = point_json(point);
        j["witnesses"].push_back(w);
    }
    return j;
}

template <class R>
Json recurrence_json(const SampleGrid<R>& grid, const std::vector<int>& nonwandering,
                     const std::vector<std::pair<R, std::vector<int>>>& cr_by_epsilon) {
    Json j;
    j["mesh"] = NumTraits<R>::format(grid.mesh);
    j["cells"] = grid.size();
    j["short_edge_warning"] = grid.short_edge_warning;
    j["nonwandering"] = nonwandering;
    j["chain_recurrent"] = Json::array();
    for (const auto& [eps, cells] : cr_by_epsilon) {
        Json b;
        b["epsilon"] = NumTraits<R>::format(eps);
        b["count"] = cells.size();
        b["cells"] = cells;
        j["chain_recurrent"].push_back(b);
    }
    return j;
}

inline const char* periodicity_status_name(PeriodicityStatus s) {
    switch (s) {
        case PeriodicityStatus::periodic:
            return "periodic";
        case PeriodicityStatus::eventually_periodic:
            return "eventually_periodic";
        case PeriodicityStatus::undetermined:
            return "undetermined";
    }
    return "?";
}

template <class R>
Json periodicity_json(const TreePoint<R>& p, const PeriodicityReport& rep) {
    Json j;
    j["point"] = point_json(p);
    j["status"] = periodicity_status_name(rep.status);
    if (rep.status != PeriodicityStatus::undetermined) {
        j["period"] = rep.period;
        j["preperiod"] = rep.preperiod;
    }
    j["steps_used"] = rep.steps_used;
    return j;
}

}  // namespace treedyn
