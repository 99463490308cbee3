#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "treedyn/examples.hpp"
#include "treedyn/mapfile.hpp"

using namespace treedyn;

namespace {
using Q = Rational;
using doctest::Contains;
}

TEST_CASE("serialize/parse/serialize is a fixed point for stock systems") {
    auto tent = library_tent<Q>(Q(2));
    std::string once = serialize_map_document("tent", *tent.tree, tent.map);
    auto doc = parse_map_document<Q>(once);
    CHECK(doc.name == "tent");
    CHECK(doc.numeric == "rational");
    std::string twice = serialize_map_document(doc);
    CHECK(once == twice);
    for (const Q& x : {Q(0), Q(1, 7), Q(1, 2), Q(9, 10)})
        CHECK(doc.map.evaluate({0, x}).offset == tent.map.evaluate({0, x}).offset);

    auto rot = library_star_rotation<Q>(3);
    std::string r1 = serialize_map_document("rot3", *rot.tree, rot.map);
    auto rdoc = parse_map_document<Q>(r1);
    CHECK(serialize_map_document(rdoc) == r1);
    auto moved = rdoc.map.evaluate({0, Q(1, 3)});
    CHECK(rdoc.tree->same_point(moved, rot.map.evaluate({0, Q(1, 3)})));
}

TEST_CASE("counterexample round-trips with multi-edge image paths intact") {
    auto cx = build_counterexample<Q>(2);
    std::string once = serialize_map_document("d2", *cx.tree, cx.map);
    auto doc = parse_map_document<Q>(once);
    CHECK(serialize_map_document(doc) == once);
    CHECK(doc.tree->vertex_count() == cx.tree->vertex_count());
    for (const auto& t : cx.tips()) {
        auto mine = cx.map.evaluate(cx.tip_point(t));
        auto theirs = doc.map.evaluate(cx.tip_point(t));
        CHECK(doc.tree->same_point(mine, theirs));
    }
    CHECK(validate_continuity(doc.map).empty());
}

TEST_CASE("constant pieces serialize as degenerate paths") {
    auto tree = unit_edge_tree<Q>();
    std::vector<std::vector<std::pair<Q, TreePoint<Q>>>> wp{{
        {Q(0), {0, Q(1, 2)}},
        {Q(1), {0, Q(1, 2)}},
    }};
    auto map = PLTreeMap<Q>::from_waypoints(tree, wp);
    std::string text = serialize_map_document("const", *tree, map);
    CHECK(text.find("path 0 start 1/2 end 1/2") != std::string::npos);
    auto doc = parse_map_document<Q>(text);
    CHECK(serialize_map_document(doc) == text);
    CHECK(doc.map.evaluate({0, Q(1, 8)}).offset == Q(1, 2));
    CHECK(doc.map.evaluate({0, Q(1)}).offset == Q(1, 2));
}

TEST_CASE("sparse ids are renumbered densely in sorted order") {
    std::string text =
        "[meta]\n"
        "name sparse\n"
        "numeric rational\n"
        "[tree]\n"
        "vertex 10\n"
        "vertex 3\n"
        "vertex 5\n"
        "edge 7 3 5 1\n"
        "edge 2 5 10 2\n"
        "[map]\n"
        "piece 2 0 2 path 2 start 0 end 2\n"
        "piece 7 0 1 path 7 start 0 end 1\n";
    auto doc = parse_map_document<Q>(text);
    CHECK(doc.vertex_ids == std::vector<long long>{3, 5, 10});
    CHECK(doc.edge_ids == std::vector<long long>{2, 7});
    // dense edge 0 is original id 2 (5 -> 10), length 2
    CHECK(doc.tree->edge(0).length == Q(2));
    CHECK(doc.tree->edge(1).length == Q(1));
    std::string out = serialize_map_document(doc);
    CHECK(out.find("edge 0 ") != std::string::npos);
    CHECK(out.find("edge 7 ") == std::string::npos);
    CHECK(serialize_map_document(parse_map_document<Q>(out)) == out);
}

TEST_CASE("numeric mode can be peeked before a typed parse") {
    auto tent = library_tent<Q>(Q(2));
    std::string text = serialize_map_document("tent", *tent.tree, tent.map);
    CHECK(peek_numeric_mode(text) == "rational");
    auto ftent = library_tent<double>(2.0);
    CHECK(peek_numeric_mode(serialize_map_document("tent", *ftent.tree, ftent.map)) == "float");
    CHECK_THROWS_AS(peek_numeric_mode("[meta]\nname x\n"), InputError);
    CHECK_THROWS_AS(peek_numeric_mode(""), InputError);
}

TEST_CASE("rational files load as float and vice versa") {
    auto tent = library_tent<Q>(Q(2));
    std::string text = serialize_map_document("tent", *tent.tree, tent.map);
    auto fdoc = parse_map_document<double>(text);
    CHECK(fdoc.numeric == "rational");  // mode recorded in the file, not the parse type
    CHECK(fdoc.map.evaluate({0, 0.25}).offset == doctest::Approx(0.5).epsilon(1e-14));

    auto ftent = library_tent<double>(0.5);
    std::string ftext = serialize_map_document("halftent", *ftent.tree, ftent.map);
    auto qdoc = parse_map_document<Q>(ftext);
    CHECK(qdoc.map.evaluate({0, Q(1, 2)}).offset == Q(1, 4));
}

TEST_CASE("structural defects are reported with line numbers") {
    CHECK_THROWS_WITH_AS(parse_map_document<Q>("vertex 0\n"),
                         Contains("line 1: content before [meta]"), InputError);
    CHECK_THROWS_WITH_AS(parse_map_document<Q>("[tree]\n"),
                         Contains("line 1: [tree] must follow [meta]"), InputError);
    CHECK_THROWS_WITH_AS(parse_map_document<Q>("[meta]\nnumeric rational\n[map]\n"),
                         Contains("line 3: [map] must follow [tree]"), InputError);
    CHECK_THROWS_WITH_AS(parse_map_document<Q>("[meta]\n[weird]\n"),
                         Contains("line 2: unknown section"), InputError);
    CHECK_THROWS_WITH_AS(parse_map_document<Q>("[meta]\nnumeric rational\nbogus\n"),
                         Contains("line 3: expected 'name"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>("[meta]\nnumeric rational\n[tree]\nvertex zero\n"),
        Contains("line 4: expected an integer id"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>("[meta]\nnumeric rational\n[tree]\nvertex 0\nvertex 1\n"
                              "edge 0 0 1 nonsense\n"),
        Contains("line 6: cannot parse 'nonsense'"), InputError);
    CHECK_THROWS_AS(parse_map_document<Q>("[meta]\nnumeric rational\n[tree]\nvertex 0\n"),
                    InputError);  // missing [map]
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>("[meta]\nname x\n[tree]\nvertex 0\n[map]\n"),
        Contains("missing 'numeric'"), InputError);
}

TEST_CASE("id and topology defects are rejected") {
    std::string head = "[meta]\nnumeric rational\n[tree]\n";
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>(head + "vertex 0\nvertex 0\nedge 0 0 0 1\n[map]\n"),
        Contains("duplicate vertex id"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>(head +
                              "vertex 0\nvertex 1\nvertex 2\n"
                              "edge 0 0 1 1\nedge 0 1 2 1\n[map]\n"),
        Contains("duplicate edge id"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>(head + "vertex 0\nvertex 1\nedge 0 0 9 1\n[map]\n"),
        Contains("edge endpoint is not a declared vertex"), InputError);
    // 3 vertices, 3 edges: a cycle, not a tree
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>(head +
                              "vertex 0\nvertex 1\nvertex 2\n"
                              "edge 0 0 1 1\nedge 1 1 2 1\nedge 2 2 0 1\n[map]\n"),
        Contains("not a tree"), InputError);
    CHECK_THROWS_WITH_AS(parse_map_document<Q>("[meta]\nnumeric rational\n[tree]\n[map]\n"),
                         Contains("no vertices"), InputError);
}

TEST_CASE("piece defects are rejected with their line") {
    std::string head =
        "[meta]\nnumeric rational\n[tree]\n"
        "vertex 0\nvertex 1\nvertex 2\n"
        "edge 0 0 1 1\nedge 1 1 2 1\n[map]\n";
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>(head + "piece 9 0 1 path 0 start 0 end 1\n"
                                     "piece 1 0 1 path 1 start 0 end 1\n"),
        Contains("line 10: piece refers to unknown edge"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>(head + "piece 0 0 1 path 9 start 0 end 1\n"
                                     "piece 1 0 1 path 1 start 0 end 1\n"),
        Contains("path refers to unknown edge"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>(head + "piece 0 0 1 path 0 start 0 foo 1\n"),
        Contains("malformed piece line"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>(head + "piece 0 0 1 path 0 start 0\n"),
        Contains("expected 'piece"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_map_document<Q>(head + "piece 0 0 1 nonsense 0 start 0 end 1\n"),
        Contains("expected 'piece"), InputError);
    // edges 0 and 1 share vertex 1, but a path cannot jump 0 -> 0 -> 1 twice
    std::string bad_adj =
        "[meta]\nnumeric rational\n[tree]\n"
        "vertex 0\nvertex 1\nvertex 2\nvertex 3\n"
        "edge 0 0 1 1\nedge 1 1 2 1\nedge 2 2 3 1\n[map]\n"
        "piece 0 0 1 path 0 2 start 0 end 1\n";
    CHECK_THROWS_WITH_AS(parse_map_document<Q>(bad_adj),
                         Contains("path edges are not adjacent"), InputError);
    // pieces must tile the edge: a gap is caught by map construction
    CHECK_THROWS_AS(
        parse_map_document<Q>(head + "piece 0 0 1/2 path 0 start 0 end 1/2\n"
                                     "piece 1 0 1 path 1 start 0 end 1\n"),
        InputError);
}
