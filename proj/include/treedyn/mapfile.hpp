#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "treedyn/plmap.hpp"

namespace treedyn {

// Line-oriented map definition:
//
//   [meta]
//   name tent
//   numeric rational
//
//   [tree]
//   vertex 0
//   vertex 1
//   edge 0 0 1 1
//
//   [map]
//   piece 0 0 1/2 path 0 start 0 end 1
//
// '#' starts a comment. Vertex and edge ids may be sparse; they are
// renumbered densely (sorted order) on load, so serializing a parsed document
// is a fixed point after the first round.
template <class R>
struct MapDocument {
    std::string name;
    std::string numeric;  // mode recorded in the file
    TreePtr<R> tree;
    PLTreeMap<R> map;
    std::vector<long long> vertex_ids;  // dense index -> original id
    std::vector<long long> edge_ids;
};

namespace detail {

inline std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    std::string s = pos == std::string::npos ? line : line.substr(0, pos);
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] inline void file_error(int line_no, const std::string& what) {
    throw InputError("map file line " + std::to_string(line_no) + ": " + what);
}

inline std::vector<std::string> split_fields(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

template <class R>
R parse_number(const std::string& tok, int line_no) {
    try {
        return NumTraits<R>::parse(tok);
    } catch (const InputError& e) {
        file_error(line_no, e.what());
    }
}

inline long long parse_id(const std::string& tok, int line_no) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        file_error(line_no, "expected an integer id, got '" + tok + "'");
    }
}

}  // namespace detail

// The numeric mode recorded in [meta], for dispatching before a typed parse.
inline std::string peek_numeric_mode(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool in_meta = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = detail::strip_comment(line);
        if (s.empty()) continue;
        if (s[0] == '[') {
            in_meta = s == "[meta]";
            continue;
        }
        if (!in_meta) continue;
        auto f = detail::split_fields(s);
        if (f.size() == 2 && f[0] == "numeric") return f[1];
    }
    throw InputError("map file: missing 'numeric' entry in [meta]");
}

template <class R>
MapDocument<R> parse_map_document(const std::string& text) {
    enum class Section { none, meta, tree, map };
    Section section = Section::none;
    MapDocument<R> doc;

    std::vector<long long> vertex_ids;
    struct RawEdge {
        long long id, a, b;
        R length;
        int line_no;
    };
    std::vector<RawEdge> raw_edges;
    struct RawPiece {
        long long edge;
        R lo, hi;
        std::vector<long long> path;
        R start, end;
        int line_no;
    };
    std::vector<RawPiece> raw_pieces;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = detail::strip_comment(line);
        if (s.empty()) continue;
        if (s == "[meta]") {
            if (section != Section::none) detail::file_error(line_no, "[meta] must come first");
            section = Section::meta;
            continue;
        }
        if (s == "[tree]") {
            if (section != Section::meta)
                detail::file_error(line_no, "[tree] must follow [meta]");
            section = Section::tree;
            continue;
        }
        if (s == "[map]") {
            if (section != Section::tree)
                detail::file_error(line_no, "[map] must follow [tree]");
            section = Section::map;
            continue;
        }
        if (!s.empty() && s[0] == '[') detail::file_error(line_no, "unknown section " + s);
        auto f = detail::split_fields(s);
        switch (section) {
            case Section::none:
                detail::file_error(line_no, "content before [meta]");
            case Section::meta:
                if (f.size() == 2 && f[0] == "name")
                    doc.name = f[1];
                else if (f.size() == 2 && f[0] == "numeric")
                    doc.numeric = f[1];
                else
                    detail::file_error(line_no, "expected 'name <id>' or 'numeric <mode>'");
                break;
            case Section::tree:
                if (f.size() == 2 && f[0] == "vertex") {
                    vertex_ids.push_back(detail::parse_id(f[1], line_no));
                } else if (f.size() == 5 && f[0] == "edge") {
                    raw_edges.push_back({detail::parse_id(f[1], line_no),
                                         detail::parse_id(f[2], line_no),
                                         detail::parse_id(f[3], line_no),
                                         detail::parse_number<R>(f[4], line_no), line_no});
                } else {
                    detail::file_error(line_no,
                                       "expected 'vertex <id>' or 'edge <id> <a> <b> <len>'");
                }
                break;
            case Section::map: {
                if (f.size() < 9 || f[0] != "piece" || f[4] != "path")
                    detail::file_error(
                        line_no,
                        "expected 'piece <edge> <lo> <hi> path <edges...> start <off> end <off>'");
                RawPiece p;
                p.line_no = line_no;
                p.edge = detail::parse_id(f[1], line_no);
                p.lo = detail::parse_number<R>(f[2], line_no);
                p.hi = detail::parse_number<R>(f[3], line_no);
                std::size_t k = 5;
                while (k < f.size() && f[k] != "start")
                    p.path.push_back(detail::parse_id(f[k++], line_no));
                if (p.path.empty() || k + 4 != f.size() || f[k] != "start" || f[k + 2] != "end")
                    detail::file_error(line_no, "malformed piece line");
                p.start = detail::parse_number<R>(f[k + 1], line_no);
                p.end = detail::parse_number<R>(f[k + 3], line_no);
                raw_pieces.push_back(std::move(p));
                break;
            }
        }
    }
    if (section != Section::map) throw InputError("map file: missing [map] section");
    if (doc.numeric.empty()) throw InputError("map file: missing 'numeric' entry in [meta]");
    if (doc.name.empty()) doc.name = "unnamed";
    if (vertex_ids.empty()) throw InputError("map file: no vertices");

    std::sort(vertex_ids.begin(), vertex_ids.end());
    if (std::adjacent_find(vertex_ids.begin(), vertex_ids.end()) != vertex_ids.end())
        throw InputError("map file: duplicate vertex id");
    std::map<long long, VertexId> vmap;
    for (std::size_t k = 0; k < vertex_ids.size(); ++k)
        vmap[vertex_ids[k]] = static_cast<VertexId>(k);
    doc.vertex_ids = vertex_ids;

    std::sort(raw_edges.begin(), raw_edges.end(),
              [](const RawEdge& a, const RawEdge& b) { return a.id < b.id; });
    std::map<long long, EdgeId> emap;
    std::vector<Edge<R>> edges;
    for (const auto& re : raw_edges) {
        if (emap.count(re.id)) detail::file_error(re.line_no, "duplicate edge id");
        auto ia = vmap.find(re.a);
        auto ib = vmap.find(re.b);
        if (ia == vmap.end() || ib == vmap.end())
            detail::file_error(re.line_no, "edge endpoint is not a declared vertex");
        emap[re.id] = static_cast<EdgeId>(edges.size());
        edges.push_back({ia->second, ib->second, re.length});
        doc.edge_ids.push_back(re.id);
    }

    doc.tree = std::make_shared<const MetricTree<R>>(
        MetricTree<R>::build(static_cast<int>(vertex_ids.size()), edges));
    const MetricTree<R>& T = *doc.tree;

    std::vector<std::vector<Piece<R>>> pieces(edges.size());
    for (const auto& rp : raw_pieces) {
        auto ie = emap.find(rp.edge);
        if (ie == emap.end()) detail::file_error(rp.line_no, "piece refers to unknown edge");
        std::vector<EdgeId> path;
        for (long long pe : rp.path) {
            auto ip = emap.find(pe);
            if (ip == emap.end()) detail::file_error(rp.line_no, "path refers to unknown edge");
            path.push_back(ip->second);
        }
        // rebuild directed segments from the edge sequence and end offsets
        std::vector<PathSegment<R>> segs;
        TreePoint<R> anchor{path.front(), rp.start};
        if (path.size() == 1) {
            if (rp.start != rp.end) segs.push_back({path[0], rp.start, rp.end});
        } else {
            for (std::size_t k = 0; k < path.size(); ++k) {
                const auto& cur = T.edge(path[k]);
                R from, to;
                if (k + 1 < path.size()) {
                    const auto& nxt = T.edge(path[k + 1]);
                    VertexId shared = (cur.a == nxt.a || cur.a == nxt.b) ? cur.a
                                      : (cur.b == nxt.a || cur.b == nxt.b)
                                          ? cur.b
                                          : -1;
                    if (shared < 0)
                        detail::file_error(rp.line_no, "path edges are not adjacent");
                    to = shared == cur.a ? R(0) : cur.length;
                } else {
                    to = rp.end;
                }
                if (k > 0) {
                    const auto& prv = T.edge(path[k - 1]);
                    VertexId shared = (cur.a == prv.a || cur.a == prv.b) ? cur.a
                                      : (cur.b == prv.a || cur.b == prv.b)
                                          ? cur.b
                                          : -1;
                    if (shared < 0)
                        detail::file_error(rp.line_no, "path edges are not adjacent");
                    from = shared == cur.a ? R(0) : cur.length;
                } else {
                    from = rp.start;
                }
                if (from != to) segs.push_back({path[k], from, to});
            }
        }
        Piece<R> piece;
        piece.lo = rp.lo;
        piece.hi = rp.hi;
        if (segs.empty()) {
            piece.image = ArcPath<R>::make_degenerate(T.canonical(anchor));
        } else {
            TreePoint<R> first{segs.front().edge, segs.front().from};
            piece.image = ArcPath<R>::make(first, std::move(segs));
        }
        pieces[static_cast<std::size_t>(ie->second)].push_back(std::move(piece));
    }
    doc.map = PLTreeMap<R>::build(doc.tree, std::move(pieces));
    return doc;
}

template <class R>
std::string serialize_map_document(const std::string& name, const MetricTree<R>& tree,
                                   const PLTreeMap<R>& map) {
    std::ostringstream out;
    out << "[meta]\n";
    out << "name " << (name.empty() ? "unnamed" : name) << "\n";
    out << "numeric " << NumTraits<R>::name << "\n";
    out << "\n[tree]\n";
    for (VertexId v = 0; v < tree.vertex_count(); ++v) out << "vertex " << v << "\n";
    for (EdgeId e = 0; e < tree.edge_count(); ++e) {
        const auto& edge = tree.edge(e);
        out << "edge " << e << " " << edge.a << " " << edge.b << " "
            << NumTraits<R>::format(edge.length) << "\n";
    }
    out << "\n[map]\n";
    for (EdgeId e = 0; e < tree.edge_count(); ++e) {
        for (const auto& piece : map.pieces(e)) {
            out << "piece " << e << " " << NumTraits<R>::format(piece.lo) << " "
                << NumTraits<R>::format(piece.hi) << " path";
            if (piece.image.segments.empty()) {
                out << " " << piece.image.start.edge << " start "
                    << NumTraits<R>::format(piece.image.start.offset) << " end "
                    << NumTraits<R>::format(piece.image.start.offset) << "\n";
                continue;
            }
            for (const auto& seg : piece.image.segments) out << " " << seg.edge;
            out << " start " << NumTraits<R>::format(piece.image.segments.front().from)
                << " end " << NumTraits<R>::format(piece.image.segments.back().to) << "\n";
        }
    }
    return out.str();
}

template <class R>
std::string serialize_map_document(const MapDocument<R>& doc) {
    return serialize_map_document(doc.name, *doc.tree, doc.map);
}

}  // namespace treedyn
