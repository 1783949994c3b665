#include <gtest/gtest.h>

#include "gen.hpp"
#include "migmine/graph.hpp"

using namespace migmine;

namespace {

MigrationGraph graph(std::map<std::string, std::size_t> users, std::map<MigrationRule, std::size_t> arcs) {
    MigrationGraph g;
    g.users = std::move(users);
    g.arcs = std::move(arcs);
    return g;
}

MigrationGraph database() {
    return graph({{"hsqldb", 100}, {"mysql", 80}, {"derby", 60}, {"h2", 10}},
                 {{{"hsqldb", "h2"}, 6},
                  {{"hsqldb", "derby"}, 4},
                  {{"derby", "hsqldb"}, 3},
                  {{"hsqldb", "mysql"}, 3},
                  {{"mysql", "hsqldb"}, 3},
                  {{"derby", "mysql"}, 2},
                  {{"mysql", "derby"}, 2}});
}

MigrationGraph random_graph(gen::Rng& rng) {
    MigrationGraph g;
    const std::size_t n = 2 + gen::below(rng, 9);
    for (std::size_t k = 0; k < n; ++k) g.users["l" + std::to_string(k)] = gen::below(rng, 200);
    const std::size_t arcs = gen::below(rng, 2 * n);
    for (std::size_t k = 0; k < arcs; ++k) {
        const auto s = gen::below(rng, n), t = gen::below(rng, n);
        if (s == t) continue;
        g.arcs[{"l" + std::to_string(s), "l" + std::to_string(t)}] = 1 + gen::below(rng, 12);
    }
    return g;
}

}  // namespace

TEST(Build, WeightsFromOwnersOrProjects) {
    RuleMap rules;
    rules[{"a", "b"}].owners = {"o1", "o2"};
    rules[{"a", "b"}].occurrences = {ProjectId("o1", "x"), ProjectId("o2", "y"), ProjectId("o2", "z")};
    rules[{"c", "c"}].owners = {"o1"};
    const auto g = build_graph(rules, {{"a", 7}});
    EXPECT_EQ(g.weight("a", "b"), 2u);
    EXPECT_EQ(g.users.at("a"), 7u);
    EXPECT_EQ(g.users.at("b"), 0u);
    EXPECT_FALSE(g.users.count("c"));
    EXPECT_EQ(build_graph(rules, {}, WeightSource::Projects).weight("a", "b"), 3u);
}

TEST(Build, LatestUsageCountsArtifactsOnce) {
    const std::vector<DependencyHistory> hs{
        {ProjectId("o", "p"), {{1, 0, {LibraryId("a", "x")}}, {2, 1, {LibraryId("a", "y"), LibraryId("b", "y")}}}},
        {ProjectId("o", "q"), {{1, 0, {LibraryId("a", "x")}}}}};
    const auto u = latest_usage(hs);
    EXPECT_EQ(u.at("x"), 1u);
    EXPECT_EQ(u.at("y"), 1u);
}

TEST(Categories, ComponentsOrderedByWeight) {
    const auto g = graph({{"a", 0}, {"b", 0}, {"c", 0}, {"d", 0}, {"e", 0}},
                         {{{"a", "b"}, 1}, {{"c", "d"}, 3}, {{"d", "e"}, 1}});
    const auto cats = categories(g);
    ASSERT_EQ(cats.size(), 2u);
    EXPECT_EQ(cats[0].members, (std::set<std::string>{"c", "d", "e"}));
    EXPECT_EQ(cats[0].total_weight, 4u);
    EXPECT_EQ(cats[0].id, 0u);
    EXPECT_EQ(cats[1].members, (std::set<std::string>{"a", "b"}));
}

TEST(Categories, PartitionTheNodes) {
    gen::Rng rng(41);
    for (int round = 0; round < 200; ++round) {
        const auto g = random_graph(rng);
        std::set<std::string> seen;
        std::size_t weight = 0;
        for (const auto& c : categories(g)) {
            for (const auto& m : c.members) EXPECT_TRUE(seen.insert(m).second);
            weight += c.total_weight;
        }
        EXPECT_EQ(seen.size(), g.users.size());
        std::size_t total = 0;
        for (const auto& [_, w] : g.arcs) total += w;
        EXPECT_EQ(weight, total);
        for (const auto& [arc, _] : g.arcs)
            for (const auto& c : categories(g)) EXPECT_EQ(c.members.count(arc.source), c.members.count(arc.target));
    }
}

TEST(Patterns, DatabaseGraph) {
    const auto tags = detect_patterns(database());
    auto has = [&](const std::string& e, const std::string& p, PatternKind k) {
        return std::find(tags.begin(), tags.end(), PatternTag{e, p, k}) != tags.end();
    };
    EXPECT_TRUE(has("derby", "hsqldb", PatternKind::Pong));
    EXPECT_TRUE(has("h2", "", PatternKind::Challenger));
    EXPECT_FALSE(has("derby", "", PatternKind::Challenger));
    EXPECT_FALSE(has("hsqldb", "", PatternKind::GoldRush));
}

TEST(Patterns, GoldRushAndExodusThresholds) {
    auto g = graph({{"a", 1}, {"b", 1}, {"c", 1}}, {{{"a", "b"}, 5}, {{"b", "c"}, 1}});
    auto tags = detect_patterns(g);
    EXPECT_NE(std::find(tags.begin(), tags.end(), PatternTag{"b", "", PatternKind::GoldRush}), tags.end());
    EXPECT_NE(std::find(tags.begin(), tags.end(), PatternTag{"a", "", PatternKind::Exodus}), tags.end());
    g.arcs[{"b", "c"}] = 2;  // 5 < 3 * 2
    tags = detect_patterns(g);
    EXPECT_EQ(std::find(tags.begin(), tags.end(), PatternTag{"b", "", PatternKind::GoldRush}), tags.end());
    g.arcs[{"b", "c"}] = 1;
    g.arcs[{"a", "b"}] = 4;  // below volume
    tags = detect_patterns(g);
    EXPECT_EQ(std::find(tags.begin(), tags.end(), PatternTag{"b", "", PatternKind::GoldRush}), tags.end());
}

TEST(Patterns, NeverGoldRushAndExodusTogether) {
    gen::Rng rng(43);
    for (int round = 0; round < 300; ++round) {
        const auto tags = detect_patterns(random_graph(rng));
        for (const auto& t : tags)
            if (t.kind == PatternKind::GoldRush) {
                EXPECT_EQ(std::find(tags.begin(), tags.end(), PatternTag{t.element, "", PatternKind::Exodus}), tags.end());
            }
    }
}

TEST(Patterns, ScaleCovariance) {
    // Scaling every weight and every threshold count by k keeps the tags.
    gen::Rng rng(47);
    for (int round = 0; round < 200; ++round) {
        const auto g = random_graph(rng);
        const std::size_t k = 2 + gen::below(rng, 4);
        auto scaled = g;
        for (auto& [_, w] : scaled.arcs) w *= k;
        for (auto& [_, u] : scaled.users) u *= k;
        PatternConfig cfg;
        PatternConfig cfg_k = cfg;
        cfg_k.volume *= k;
        cfg_k.pong_min *= k;
        cfg_k.challenger_min *= k;
        EXPECT_EQ(detect_patterns(g, cfg), detect_patterns(scaled, cfg_k));
    }
}

TEST(Dot, ExportIsValidAndReadsBack) {
    const auto g = database();
    const auto tags = detect_patterns(g);
    const auto dot = export_dot(g, tags);
    EXPECT_NE(dot.find("digraph migrations {"), std::string::npos);
    EXPECT_NE(dot.find("\"hsqldb\" -> \"h2\" [label=\"6\", w=6, penwidth=5.00]"), std::string::npos);
    EXPECT_NE(dot.find("\"derby\" -> \"mysql\" [label=\"2\", w=2, penwidth=1.00, style=dashed, pattern=\"Pong\"]"), std::string::npos);
    EXPECT_NE(dot.find("\"hsqldb\" [label=\"hsqldb\", users=100, fillcolor=\"gray20\""), std::string::npos);
    const auto back = import_dot(dot);
    EXPECT_EQ(back.graph, g);
    EXPECT_EQ(back.patterns, tags);
    EXPECT_EQ(export_dot(back.graph, back.patterns), dot);
}

TEST(Dot, RoundTripOnRandomGraphs) {
    gen::Rng rng(53);
    for (int round = 0; round < 100; ++round) {
        const auto g = random_graph(rng);
        const auto tags = detect_patterns(g);
        const auto dot = export_dot(g, tags);
        const auto back = import_dot(dot);
        EXPECT_EQ(back.graph, g);
        EXPECT_EQ(back.patterns, tags);
        EXPECT_EQ(export_dot(back.graph, back.patterns), dot);
    }
}

TEST(Dot, ParserAcceptsGrammarAndRejectsGarbage) {
    const auto doc = parse_dot(
        "/* c */ strict digraph \"G\" {\n"
        "  graph [rankdir=LR]; node [shape=box]\n"
        "  a -> b -> c [w=2];  // chain\n"
        "  \"q\\\"x\" [users=3, label=\"Q\"];\n"
        "  size = \"4,4\";\n"
        "}\n");
    EXPECT_TRUE(doc.directed);
    EXPECT_EQ(doc.name, "G");
    ASSERT_EQ(doc.edges.size(), 2u);
    EXPECT_EQ(std::get<2>(doc.edges[1]).at("w"), "2");
    ASSERT_EQ(doc.nodes.size(), 1u);
    EXPECT_EQ(doc.nodes[0].first, "q\"x");
    EXPECT_EQ(doc.nodes[0].second.at("users"), "3");
    EXPECT_THROW(parse_dot("digraph { a -> ; }"), DotSyntaxError);
    EXPECT_THROW(parse_dot("digraph { a [x=1 }"), DotSyntaxError);
    EXPECT_THROW(parse_dot("graph { a -- b } trailing"), DotSyntaxError);
}

TEST(Json, DumpShapeAndRoundTrip) {
    const auto g = database();
    const auto tags = detect_patterns(g);
    const auto j = graph_json(g, tags);
    ASSERT_EQ(j.at("nodes").size(), 4u);
    EXPECT_EQ(j.at("arcs").size(), 7u);
    for (const auto& n : j.at("nodes")) {
        EXPECT_TRUE(n.contains("name"));
        EXPECT_TRUE(n.contains("users"));
        EXPECT_TRUE(n.at("patterns").is_array());
    }
    EXPECT_EQ(graph_from_json(j), g);
    auto bad = j;
    bad["arcs"].push_back({{"s", "nowhere"}, {"t", "h2"}, {"w", 1}});
    EXPECT_THROW(graph_from_json(bad), Error);
}
