// treedyn: recurrence structure and sequence-entropy estimation for
// piecewise-linear self-maps of finite metric trees.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "treedyn/collapse.hpp"
#include "treedyn/examples.hpp"
#include "treedyn/factor.hpp"
#include "treedyn/mapfile.hpp"
#include "treedyn/serialize.hpp"

using namespace treedyn;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        out.push_back(s.substr(pos, next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

long long parse_int_field(const std::string& tok, const std::string& what) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw InputError(what + ": expected an integer, got '" + tok + "'");
    }
}

template <class R>
TreePoint<R> parse_point_arg(const MetricTree<R>& tree, const std::string& s) {
    auto f = split_on(s, ':');
    if (f.size() != 2) throw InputError("expected <edge>:<offset>, got '" + s + "'");
    TreePoint<R> p{static_cast<EdgeId>(parse_int_field(f[0], "point edge")),
                   NumTraits<R>::parse(f[1])};
    tree.check_point(p);
    return p;
}

template <class R>
Ball<R> parse_ball_arg(const MetricTree<R>& tree, const std::string& s) {
    auto f = split_on(s, ':');
    if (f.size() != 3) throw InputError("expected <edge>:<offset>:<radius>, got '" + s + "'");
    Ball<R> b{{static_cast<EdgeId>(parse_int_field(f[0], "ball edge")),
               NumTraits<R>::parse(f[1])},
              NumTraits<R>::parse(f[2])};
    tree.check_point(b.center);
    return b;
}

TimeSequence parse_sequence_arg(const std::string& s) {
    if (s == "full") return TimeSequence::full();
    if (s == "pow2") return TimeSequence::pow2();
    if (s.rfind("custom:", 0) == 0) {
        std::vector<long long> terms;
        for (const auto& tok : split_on(s.substr(7), ','))
            terms.push_back(parse_int_field(tok, "sequence term"));
        return TimeSequence::custom(std::move(terms));
    }
    throw InputError("unknown sequence '" + s + "' (use full, pow2, or custom:<t1,t2,...>)");
}

// xorshift64*: the seed fully determines the sample set
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next() {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        return state * 0x2545f4914f6cdd1dull;
    }
};

// Dyadic offsets stay exact in rational mode. Duplicate points can never
// epsilon-separate and would cap separated counts below the saturation
// threshold, so duplicates are dropped and the set is sorted for determinism.
template <class R>
std::vector<TreePoint<R>> random_samples(const MetricTree<R>& tree, long long count,
                                         std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TreePoint<R>> out;
    out.reserve(static_cast<std::size_t>(count));
    const std::uint64_t denom = 1ull << 48;
    for (long long k = 0; k < count; ++k) {
        auto e = static_cast<EdgeId>(rng.next() % static_cast<std::uint64_t>(tree.edge_count()));
        R t = R(static_cast<long long>(rng.next() % (denom + 1))) / R(static_cast<long long>(denom));
        out.push_back(tree.canonical({e, R(tree.edge(e).length * t)}));
    }
    std::sort(out.begin(), out.end(), [](const TreePoint<R>& a, const TreePoint<R>& b) {
        return a.edge != b.edge ? a.edge < b.edge : a.offset < b.offset;
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const TreePoint<R>& a, const TreePoint<R>& b) {
                              return a.edge == b.edge && a.offset == b.offset;
                          }),
              out.end());
    return out;
}

// parameters shared across subcommands; unset numerics stay negative
struct Options {
    std::string file;
    std::string numeric;  // "", "rational", "float"
    std::string out;
    std::string csv;
    std::string mesh;
    std::vector<std::string> epsilons;
    std::string sequence = "full";
    int nmax = 8;
    int horizon = 12;
    int kmax = 8;
    long long samples = 0;
    std::uint64_t seed = 1;
    long long budget = 100000000;
    bool restrict_to_cr = false;
    int level = 0;
    std::string rule = "tip_to_bottom";
    std::string name;
    std::string point;
    int steps = 100;
    std::string ball_u, ball_v;
    long long collapse_vertex = -1;
    std::vector<std::string> collapse_edges;
    int nw_horizon = 64;
};

template <class R>
MapDocument<R> load_document(const Options& opt) {
    return parse_map_document<R>(read_file(opt.file));
}

template <class R>
std::vector<R> epsilon_schedule(const Options& opt, const R& mesh) {
    std::vector<R> eps;
    for (const auto& s : opt.epsilons) eps.push_back(NumTraits<R>::parse(s));
    if (eps.empty()) eps = {mesh * R(4), mesh * R(2), mesh};
    return eps;
}

template <class R>
R required_mesh(const Options& opt) {
    if (opt.mesh.empty()) throw InputError("--mesh is required for this command");
    R mesh = NumTraits<R>::parse(opt.mesh);
    if (!(mesh > R(0))) throw InputError("--mesh must be positive");
    return mesh;
}

// sample set for entropy/independence: grid centers at --mesh (optionally cut
// down to the chain-recurrent cells) or --samples seeded random points
template <class R>
std::vector<TreePoint<R>> gather_samples(const MapDocument<R>& doc, const Options& opt,
                                         Json& meta) {
    if (opt.restrict_to_cr) {
        R mesh = required_mesh<R>(opt);
        auto grid = std::make_shared<const SampleGrid<R>>(build_grid(doc.tree, mesh));
        auto graph = build_eps_chain_graph(doc.map, grid, mesh);
        auto cells = chain_recurrent_cells(graph);
        meta["sample_source"] = "chain_recurrent_cells";
        meta["mesh"] = NumTraits<R>::format(mesh);
        meta["cr_epsilon"] = NumTraits<R>::format(mesh);
        meta["cr_cells"] = cells.size();
        return restrict_samples(*grid, cells);
    }
    if (opt.samples > 0) {
        meta["sample_source"] = "seeded_random";
        meta["seed"] = opt.seed;
        return random_samples(*doc.tree, opt.samples, opt.seed);
    }
    if (!opt.mesh.empty()) {
        R mesh = NumTraits<R>::parse(opt.mesh);
        auto grid = build_grid(doc.tree, mesh);
        meta["sample_source"] = "grid";
        meta["mesh"] = NumTraits<R>::format(mesh);
        return grid.centers;
    }
    throw InputError("need --mesh, --samples, or --restrict-to-cr to pick sample points");
}

template <class R>
int cmd_validate(const Options& opt) {
    auto doc = load_document<R>(opt);
    auto violations = validate_continuity(doc.map);
    auto stats = map_stats(doc.map);
    Json j;
    j["file"] = opt.file;
    j["name"] = doc.name;
    j["numeric"] = doc.numeric;
    j["vertices"] = doc.tree->vertex_count();
    j["edges"] = doc.tree->edge_count();
    j["pieces"] = stats.piece_count;
    j["lipschitz_bound"] = NumTraits<R>::format(stats.lipschitz_bound);
    j["clean"] = violations.empty();
    j["continuity_violations"] = Json::array();
    for (const auto& v : violations) {
        Json w;
        w["location"] = point_json(v.location);
        w["left_image"] = point_json(v.left_image);
        w["right_image"] = point_json(v.right_image);
        w["gap"] = NumTraits<R>::format(v.gap);
        w["context"] = v.context;
        j["continuity_violations"].push_back(w);
    }
    write_output(opt.out, j.dump(2) + "\n");
    return violations.empty() ? 0 : 1;
}

template <class R>
int cmd_cr(const Options& opt) {
    auto doc = load_document<R>(opt);
    R mesh = required_mesh<R>(opt);
    auto grid = std::make_shared<const SampleGrid<R>>(build_grid(doc.tree, mesh));
    auto eps = epsilon_schedule(opt, mesh);
    std::vector<std::pair<R, std::vector<int>>> cr;
    for (const R& e : eps)
        cr.push_back({e, chain_recurrent_cells(build_eps_chain_graph(doc.map, grid, e))});
    auto nw = nonwandering_estimate(doc.map, *grid, opt.nw_horizon);
    Json j;
    j["file"] = opt.file;
    j["name"] = doc.name;
    j["nonwandering_horizon"] = opt.nw_horizon;
    Json rec = recurrence_json(*grid, nw, cr);
    for (auto& [key, value] : rec.items()) j[key] = value;
    j["centers"] = Json::array();
    for (const auto& c : grid->centers) j["centers"].push_back(point_json(c));
    write_output(opt.out, j.dump(2) + "\n");
    if (!opt.csv.empty()) {
        std::string csv = "epsilon,cell,edge,offset\n";
        for (const auto& [e, cells] : cr)
            for (int c : cells) {
                const auto& p = grid->centers[static_cast<std::size_t>(c)];
                csv += NumTraits<R>::format(e) + "," + std::to_string(c) + "," +
                       std::to_string(p.edge) + "," + NumTraits<R>::format(p.offset) + "\n";
            }
        write_output(opt.csv, csv);
    }
    return 0;
}

template <class R>
int cmd_entropy(const Options& opt) {
    auto doc = load_document<R>(opt);
    Json j;
    j["file"] = opt.file;
    j["name"] = doc.name;
    auto samples = gather_samples(doc, opt, j);
    auto seq = parse_sequence_arg(opt.sequence);
    std::vector<R> eps;
    for (const auto& s : opt.epsilons) eps.push_back(NumTraits<R>::parse(s));
    if (eps.empty()) eps = {R(1) / R(64)};
    auto est = h_A_estimate(doc.map, samples, seq, opt.nmax, eps);
    Json body = to_json(est);
    for (auto& [key, value] : body.items()) j[key] = value;
    write_output(opt.out, j.dump(2) + "\n");
    if (!opt.csv.empty()) write_output(opt.csv, entropy_csv(est));
    return 0;
}

template <class R>
int cmd_independence(const Options& opt) {
    auto doc = load_document<R>(opt);
    Json j;
    j["file"] = opt.file;
    j["name"] = doc.name;
    auto samples = gather_samples(doc, opt, j);
    auto ball_u = parse_ball_arg(*doc.tree, opt.ball_u);
    auto ball_v = parse_ball_arg(*doc.tree, opt.ball_v);
    auto cert = independence_search(doc.map, samples, ball_u, ball_v, opt.horizon, opt.kmax,
                                    opt.budget);
    j["horizon"] = opt.horizon;
    j["k_max"] = opt.kmax;
    Json body = to_json(cert);
    for (auto& [key, value] : body.items()) j[key] = value;
    j["no_certificate"] = !cert.found();
    write_output(opt.out, j.dump(2) + "\n");
    return 0;
}

template <class R>
int cmd_counterexample(const Options& opt) {
    BottomSpikeRule rule;
    if (opt.rule == "tip_to_bottom")
        rule = BottomSpikeRule::tip_to_bottom;
    else if (opt.rule == "tip_to_top")
        rule = BottomSpikeRule::tip_to_top;
    else
        throw InputError("unknown --rule '" + opt.rule + "'");
    auto cx = build_counterexample<R>(opt.level, rule);
    std::string name = opt.name.empty() ? "counterexample_" + std::to_string(opt.level) : opt.name;
    write_output(opt.out, serialize_map_document(name, *cx.tree, cx.map));
    return 0;
}

template <class R>
int cmd_iterate(const Options& opt) {
    auto doc = load_document<R>(opt);
    if (opt.point.empty()) throw InputError("--point is required");
    if (opt.steps < 1) throw InputError("--steps must be positive");
    auto p = parse_point_arg(*doc.tree, opt.point);
    auto orbit = compute_orbit(doc.map, p, opt.steps);
    auto rep = detect_period(doc.map, p, opt.steps);
    Json j;
    j["file"] = opt.file;
    j["name"] = doc.name;
    j["steps"] = opt.steps;
    j["periodicity"] = periodicity_json(orbit.base, rep);
    j["orbit"] = Json::array();
    for (const auto& q : orbit.points) j["orbit"].push_back(point_json(q));
    write_output(opt.out, j.dump(2) + "\n");
    return 0;
}

template <class R>
int cmd_factor(const Options& opt) {
    auto doc = load_document<R>(opt);
    Subtree<R> sub;
    if (opt.collapse_vertex >= 0) {
        if (!opt.collapse_edges.empty())
            throw InputError("give either --collapse-vertex or --collapse-edge, not both");
        sub = vertex_subtree(*doc.tree, static_cast<VertexId>(opt.collapse_vertex));
    } else {
        for (const auto& s : opt.collapse_edges) {
            auto f = split_on(s, ':');
            if (f.size() != 3)
                throw InputError("expected <edge>:<lo>:<hi>, got '" + s + "'");
            auto e = static_cast<EdgeId>(parse_int_field(f[0], "collapse edge"));
            sub.intervals[e] = {NumTraits<R>::parse(f[1]), NumTraits<R>::parse(f[2])};
        }
        if (sub.intervals.empty())
            throw InputError("need --collapse-vertex or at least one --collapse-edge");
    }
    auto proj = collapse(doc.tree, sub);
    auto g = factor(doc.map, proj);
    write_output(opt.out, serialize_map_document(doc.name + "_factor", *proj.target_ptr(), g));
    return 0;
}

template <class R>
int dispatch(const std::string& cmd, const Options& opt) {
    if (cmd == "validate") return cmd_validate<R>(opt);
    if (cmd == "cr") return cmd_cr<R>(opt);
    if (cmd == "entropy") return cmd_entropy<R>(opt);
    if (cmd == "independence") return cmd_independence<R>(opt);
    if (cmd == "counterexample") return cmd_counterexample<R>(opt);
    if (cmd == "iterate") return cmd_iterate<R>(opt);
    if (cmd == "factor") return cmd_factor<R>(opt);
    throw InternalError("unknown command " + cmd);
}

int run(const std::string& cmd, const Options& opt) {
    std::string mode = opt.numeric;
    if (mode.empty()) {
        // commands with an input file honor the mode recorded in the file
        mode = opt.file.empty() ? "rational" : peek_numeric_mode(read_file(opt.file));
    }
    if (mode == "rational") return dispatch<Rational>(cmd, opt);
    if (mode == "float") return dispatch<double>(cmd, opt);
    throw InputError("unknown numeric mode '" + mode + "' (use rational or float)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "treedyn: recurrence structure and topological sequence entropy of\n"
        "piecewise-linear self-maps of finite metric trees"};
    app.require_subcommand(1);

    Options opt;

    auto add_common = [&](CLI::App* c, bool needs_file) {
        if (needs_file)
            c->add_option("file", opt.file, "map definition file")->required();
        c->add_option("--numeric", opt.numeric,
                      "arithmetic mode: rational | float (default: mode recorded in the file)");
        c->add_option("--out", opt.out, "write the main output to this path instead of stdout");
    };

    auto* validate = app.add_subcommand("validate", "parse a map file and check continuity");
    add_common(validate, true);

    auto* cr = app.add_subcommand(
        "cr", "chain-recurrent and non-wandering cell sets on a sample grid");
    add_common(cr, true);
    cr->add_option("--mesh", opt.mesh, "grid mesh (required)");
    cr->add_option("--epsilon", opt.epsilons,
                   "chain epsilon, repeatable (default: 4*mesh, 2*mesh, mesh)")
        ->allow_extra_args(false);
    cr->add_option("--horizon", opt.nw_horizon, "non-wandering return horizon (default 64)");
    cr->add_option("--csv", opt.csv, "also write the cell table as CSV to this path");

    auto* entropy = app.add_subcommand(
        "entropy", "sequence-entropy estimate from separated/spanning growth");
    add_common(entropy, true);
    entropy->add_option("--sequence", opt.sequence,
                        "time sequence: full | pow2 | custom:<t1,t2,...> (default full)");
    entropy->add_option("--nmax", opt.nmax, "largest observation depth (default 8)");
    entropy->add_option("--epsilon", opt.epsilons,
                        "separation epsilon, repeatable (default 1/64)")
        ->allow_extra_args(false);
    entropy->add_option("--mesh", opt.mesh, "sample at grid centers of this mesh");
    entropy->add_option("--samples", opt.samples, "sample this many seeded random points");
    entropy->add_option("--seed", opt.seed, "random sample seed (default 1)");
    entropy->add_flag("--restrict-to-cr", opt.restrict_to_cr,
                      "restrict samples to chain-recurrent cells (epsilon = mesh)");
    entropy->add_option("--csv", opt.csv, "also write the count table as CSV to this path");

    auto* independence = app.add_subcommand(
        "independence", "largest verified independence time set for two balls");
    add_common(independence, true);
    independence->add_option("--u", opt.ball_u, "first ball as <edge>:<offset>:<radius>")
        ->required();
    independence->add_option("--v", opt.ball_v, "second ball as <edge>:<offset>:<radius>")
        ->required();
    independence->add_option("--horizon", opt.horizon, "iterate horizon, at most 62 (default 12)");
    independence->add_option("--kmax", opt.kmax, "largest time-set size tried (default 8)");
    independence->add_option("--budget", opt.budget,
                             "sample-visit budget for the search (default 1e8)");
    independence->add_option("--mesh", opt.mesh, "sample at grid centers of this mesh");
    independence->add_option("--samples", opt.samples, "sample this many seeded random points");
    independence->add_option("--seed", opt.seed, "random sample seed (default 1)");
    independence->add_flag("--restrict-to-cr", opt.restrict_to_cr,
                           "restrict samples to chain-recurrent cells (epsilon = mesh)");

    auto* counterexample = app.add_subcommand(
        "counterexample", "generate the spiked-baseline family as a map file");
    add_common(counterexample, false);
    counterexample->add_option("--level", opt.level, "construction level, 1..24")->required();
    counterexample->add_option("--rule", opt.rule,
                               "bottom-tip image rule: tip_to_bottom | tip_to_top");
    counterexample->add_option("--name", opt.name, "name recorded in the file");

    auto* iterate = app.add_subcommand("iterate", "orbit and periodicity of one point");
    add_common(iterate, true);
    iterate->add_option("--point", opt.point, "start point as <edge>:<offset>")->required();
    iterate->add_option("--steps", opt.steps, "orbit length (default 100)");

    auto* factor = app.add_subcommand(
        "factor", "collapse an invariant subtree and write the factor map");
    add_common(factor, true);
    factor->add_option("--collapse-vertex", opt.collapse_vertex,
                       "collapse the degenerate subtree at this vertex");
    factor->add_option("--collapse-edge", opt.collapse_edges,
                       "closed interval <edge>:<lo>:<hi>, repeatable")
        ->allow_extra_args(false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), opt);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
