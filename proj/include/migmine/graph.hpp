#ifndef MIGMINE_GRAPH_HPP
#define MIGMINE_GRAPH_HPP

// Migration graphs: construction from retained rules, categories as
// connected components, visual-pattern detection, DOT and JSON output.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "migmine/csv.hpp"
#include "migmine/mining.hpp"
#include "migmine/model.hpp"

namespace migmine {

/// Weighted digraph over library names. Every arc endpoint is a node and
/// every weight is >= 1.
struct MigrationGraph {
    std::map<std::string, std::size_t> users;  // node -> clients at latest snapshot
    std::map<MigrationRule, std::size_t> arcs;

    std::size_t weight(const std::string& s, const std::string& t) const {
        auto it = arcs.find(MigrationRule{s, t});
        return it == arcs.end() ? 0 : it->second;
    }

    friend bool operator==(const MigrationGraph&, const MigrationGraph&) = default;
};

enum class WeightSource { Owners, Projects };

struct WeightedRule {
    MigrationRule rule;
    std::size_t owners = 0;
    std::size_t projects = 0;
};

inline MigrationGraph build_graph(const std::vector<WeightedRule>& rules,
                                  const std::map<std::string, std::size_t>& usage = {},
                                  WeightSource source = WeightSource::Owners) {
    MigrationGraph g;
    for (const auto& r : rules) {
        const auto w = source == WeightSource::Owners ? r.owners : r.projects;
        if (w == 0 || r.rule.source == r.rule.target) continue;
        g.arcs[r.rule] += w;
        for (const auto* name : {&r.rule.source, &r.rule.target}) {
            auto it = usage.find(*name);
            g.users[*name] = it == usage.end() ? 0 : it->second;
        }
    }
    return g;
}

inline MigrationGraph build_graph(const RuleMap& rules,
                                  const std::map<std::string, std::size_t>& usage = {},
                                  WeightSource source = WeightSource::Owners) {
    std::vector<WeightedRule> w;
    for (const auto& [rule, s] : rules) w.push_back({rule, s.owners.size(), s.occurrences.size()});
    return build_graph(w, usage, source);
}

inline MigrationGraph build_graph(const std::vector<RuleReportRow>& rows,
                                  const std::map<std::string, std::size_t>& usage = {},
                                  WeightSource source = WeightSource::Owners) {
    std::vector<WeightedRule> w;
    for (const auto& r : rows) w.push_back({r.rule, r.groups, r.projects});
    return build_graph(w, usage, source);
}

/// Clients per artifact name at each project's latest snapshot.
inline std::map<std::string, std::size_t> latest_usage(const std::vector<DependencyHistory>& histories) {
    std::map<std::string, std::size_t> usage;
    for (const auto& h : histories) {
        if (h.snapshots().empty()) continue;
        std::set<std::string> artifacts;
        for (const auto& lib : h.snapshots().back().dependencies) artifacts.insert(lib.artifact());
        for (const auto& a : artifacts) ++usage[a];
    }
    return usage;
}

struct Category {
    std::size_t id = 0;
    std::set<std::string> members;
    std::size_t total_weight = 0;
    std::size_t introductions = 0;
};

/// Connected components of the undirected projection, ordered by descending
/// total arc weight then smallest member; ids are positions in that order.
inline std::vector<Category> categories(const MigrationGraph& graph) {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& [arc, w] : graph.arcs) {
        adj[arc.source].insert(arc.target);
        adj[arc.target].insert(arc.source);
    }
    std::map<std::string, std::size_t> comp;
    std::vector<Category> out;
    for (const auto& [node, _] : graph.users) {
        if (comp.count(node)) continue;
        Category c;
        std::deque<std::string> frontier{node};
        comp[node] = out.size();
        while (!frontier.empty()) {
            auto n = frontier.front();
            frontier.pop_front();
            c.members.insert(n);
            for (const auto& m : adj[n])
                if (comp.emplace(m, out.size()).second) frontier.push_back(m);
        }
        out.push_back(std::move(c));
    }
    for (const auto& [arc, w] : graph.arcs) out[comp.at(arc.source)].total_weight += w;
    std::sort(out.begin(), out.end(), [](const Category& a, const Category& b) {
        if (a.total_weight != b.total_weight) return a.total_weight > b.total_weight;
        return *a.members.begin() < *b.members.begin();
    });
    for (std::size_t k = 0; k < out.size(); ++k) out[k].id = k;
    return out;
}

enum class PatternKind { GoldRush, Exodus, Challenger, Pong };

inline std::string_view to_string(PatternKind k) {
    switch (k) {
        case PatternKind::GoldRush: return "GoldRush";
        case PatternKind::Exodus: return "Exodus";
        case PatternKind::Challenger: return "Challenger";
        case PatternKind::Pong: return "Pong";
    }
    return "?";
}

inline PatternKind parse_pattern_kind(std::string_view s) {
    for (auto k : {PatternKind::GoldRush, PatternKind::Exodus, PatternKind::Challenger, PatternKind::Pong})
        if (to_string(k) == s) return k;
    throw Error("unknown pattern '" + std::string(s) + "'");
}

/// A tag on a node (`peer` empty) or, for Pong, on the arc pair
/// {element, peer} with element < peer.
struct PatternTag {
    std::string element;
    std::string peer;
    PatternKind kind;

    friend auto operator<=>(const PatternTag&, const PatternTag&) = default;
    friend bool operator==(const PatternTag&, const PatternTag&) = default;
};

/// Thresholds that make the qualitative patterns testable.
struct PatternConfig {
    std::size_t volume = 5;          // GoldRush/Exodus: minimum in (resp. out) weight
    double dominance = 3.0;          // ... and at least this multiple of max(out, 1)
    std::size_t pong_min = 2;        // both arcs of a Pong pair at least this heavy
    double pong_ratio = 2.0;         // heavier / lighter arc at most this
    std::size_t challenger_min = 3;  // weight received from the category's most used node
};

inline std::vector<PatternTag> detect_patterns(const MigrationGraph& graph,
                                               const PatternConfig& config = {}) {
    std::map<std::string, std::size_t> in, out;
    for (const auto& [arc, w] : graph.arcs) {
        out[arc.source] += w;
        in[arc.target] += w;
    }
    std::vector<PatternTag> tags;
    for (const auto& [node, _] : graph.users) {
        const double i = static_cast<double>(in[node]);
        const double o = static_cast<double>(out[node]);
        if (in[node] >= config.volume && i >= config.dominance * std::max(o, 1.0))
            tags.push_back({node, {}, PatternKind::GoldRush});
        if (out[node] >= config.volume && o >= config.dominance * std::max(i, 1.0))
            tags.push_back({node, {}, PatternKind::Exodus});
    }
    for (const auto& [arc, w] : graph.arcs) {
        if (!(arc.source < arc.target)) continue;
        const auto back = graph.weight(arc.target, arc.source);
        if (back == 0) continue;
        const auto lo = std::min(w, back), hi = std::max(w, back);
        if (lo >= config.pong_min &&
            static_cast<double>(hi) <= config.pong_ratio * static_cast<double>(lo))
            tags.push_back({arc.source, arc.target, PatternKind::Pong});
    }
    for (const auto& cat : categories(graph)) {
        std::string top;
        std::vector<std::size_t> counts;
        for (const auto& m : cat.members) {
            const auto u = graph.users.at(m);
            counts.push_back(u);
            if (top.empty() || u > graph.users.at(top)) top = m;
        }
        std::sort(counts.begin(), counts.end());
        const auto lower_median = counts[(counts.size() - 1) / 2];
        for (const auto& m : cat.members) {
            if (m == top) continue;
            if (graph.weight(top, m) >= config.challenger_min && graph.users.at(m) < lower_median)
                tags.push_back({m, {}, PatternKind::Challenger});
        }
    }
    std::sort(tags.begin(), tags.end());
    return tags;
}

// ---------------------------------------------------------------------------
// DOT

namespace detail {

inline std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + '"';
}

}  // namespace detail

/// DOT digraph. Pen width is linear in arc weight over [1, 5]; node fill runs
/// from gray95 (no users) to gray20 (most used node of its category). Node
/// `users`, arc `w` and `tags`/`pattern` attributes carry the data needed to
/// read the graph back.
inline std::string export_dot(const MigrationGraph& graph, const std::vector<PatternTag>& patterns) {
    std::map<std::string, std::vector<std::string>> node_tags;
    std::set<MigrationRule> pong_arcs;
    for (const auto& p : patterns) {
        if (p.kind == PatternKind::Pong) {
            pong_arcs.insert({p.element, p.peer});
            pong_arcs.insert({p.peer, p.element});
        } else {
            node_tags[p.element].emplace_back(to_string(p.kind));
        }
    }
    std::map<std::string, std::size_t> category_max;
    for (const auto& c : categories(graph)) {
        std::size_t mx = 0;
        for (const auto& m : c.members) mx = std::max(mx, graph.users.at(m));
        for (const auto& m : c.members) category_max[m] = mx;
    }
    std::size_t wmin = 0, wmax = 0;
    for (const auto& [arc, w] : graph.arcs) {
        wmin = wmin == 0 ? w : std::min(wmin, w);
        wmax = std::max(wmax, w);
    }

    std::ostringstream out;
    out << "digraph migrations {\n";
    out << "  node [shape=ellipse, style=filled, fontname=\"Helvetica\"];\n";
    out << "  edge [fontname=\"Helvetica\"];\n";
    for (const auto& [name, users] : graph.users) {
        const auto mx = category_max.count(name) ? category_max.at(name) : 0;
        const long gray =
            mx == 0 ? 95 : 95 - std::lround(75.0 * static_cast<double>(users) / static_cast<double>(mx));
        std::string label = name;
        std::string tags;
        if (auto it = node_tags.find(name); it != node_tags.end()) {
            for (const auto& t : it->second) tags += (tags.empty() ? "" : ",") + t;
            label += "\n[" + tags + "]";
        }
        out << "  " << detail::dot_quote(name) << " [label=" << detail::dot_quote(label)
            << ", users=" << users << ", fillcolor=\"gray" << gray << "\""
            << ", fontcolor=\"" << (gray < 50 ? "white" : "black") << "\"";
        if (!tags.empty()) out << ", peripheries=2, tags=" << detail::dot_quote(tags);
        out << "];\n";
    }
    for (const auto& [arc, w] : graph.arcs) {
        const double pen = wmax == wmin ? 1.0
                                        : 1.0 + 4.0 * static_cast<double>(w - wmin) /
                                                    static_cast<double>(wmax - wmin);
        out << "  " << detail::dot_quote(arc.source) << " -> " << detail::dot_quote(arc.target)
            << " [label=\"" << w << "\", w=" << w << ", penwidth=" << csv::fixed(pen, 2);
        if (pong_arcs.count(arc)) out << ", style=dashed, pattern=\"Pong\"";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

/// Statements of a parsed DOT graph (a subset of the DOT grammar: node, edge,
/// attribute and ID=ID statements; no subgraphs or ports).
struct DotDocument {
    bool directed = true;
    std::string name;
    std::vector<std::pair<std::string, std::map<std::string, std::string>>> nodes;
    std::vector<std::tuple<std::string, std::string, std::map<std::string, std::string>>> edges;
};

class DotSyntaxError : public Error {
public:
    using Error::Error;
};

namespace detail {

class DotParser {
public:
    explicit DotParser(std::string_view text) : text_(text) {}

    DotDocument parse() {
        DotDocument doc;
        auto kw = ident();
        if (lower(kw) == "strict") kw = ident();
        if (lower(kw) == "digraph")
            doc.directed = true;
        else if (lower(kw) == "graph")
            doc.directed = false;
        else
            fail("expected 'graph' or 'digraph'");
        skip();
        if (peek() != '{') doc.name = id();
        expect('{');
        while (true) {
            skip();
            if (peek() == '}') {
                ++pos_;
                break;
            }
            statement(doc);
            skip();
            if (peek() == ';') ++pos_;
        }
        skip();
        if (pos_ != text_.size()) fail("trailing content after graph");
        return doc;
    }

private:
    static std::string lower(std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw DotSyntaxError("DOT syntax error at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip() {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            } else if (text_.substr(pos_, 2) == "//" || text_[pos_] == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (text_.substr(pos_, 2) == "/*") {
                auto end = text_.find("*/", pos_ + 2);
                if (end == std::string_view::npos) fail("unterminated comment");
                pos_ = end + 2;
            } else {
                break;
            }
        }
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void expect(char c) {
        skip();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string ident() {
        skip();
        std::string out;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            out += text_[pos_++];
        if (out.empty()) fail("expected identifier");
        return out;
    }

    std::string id() {
        skip();
        if (peek() == '"') {
            ++pos_;
            std::string out;
            while (true) {
                if (pos_ >= text_.size()) fail("unterminated string");
                char c = text_[pos_++];
                if (c == '"') break;
                if (c == '\\' && pos_ < text_.size()) {
                    char e = text_[pos_++];
                    if (e == 'n')
                        out += '\n';
                    else if (e == '"' || e == '\\')
                        out += e;
                    else {
                        out += '\\';
                        out += e;
                    }
                    continue;
                }
                out += c;
            }
            return out;
        }
        std::string out;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_' || text_[pos_] == '.' ||
                                       (text_[pos_] == '-' && !out.empty() &&
                                        std::isdigit(static_cast<unsigned char>(out[0])))))
            out += text_[pos_++];
        if (out.empty() && pos_ < text_.size() && text_[pos_] == '-') {
            out += text_[pos_++];
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
                out += text_[pos_++];
            if (out.size() == 1) fail("expected numeral");
        }
        if (out.empty()) fail("expected ID");
        return out;
    }

    std::map<std::string, std::string> attrs() {
        std::map<std::string, std::string> out;
        skip();
        while (peek() == '[') {
            ++pos_;
            while (true) {
                skip();
                if (peek() == ']') {
                    ++pos_;
                    break;
                }
                auto key = id();
                expect('=');
                out[key] = id();
                skip();
                if (peek() == ',' || peek() == ';') ++pos_;
            }
            skip();
        }
        return out;
    }

    void statement(DotDocument& doc) {
        skip();
        const auto start = pos_;
        auto first = id();
        const auto lowered = lower(first);
        skip();
        if ((lowered == "graph" || lowered == "node" || lowered == "edge") && peek() == '[' &&
            text_[start] != '"') {
            attrs();
            return;
        }
        if (peek() == '=') {
            ++pos_;
            id();
            return;
        }
        std::vector<std::string> chain{first};
        while (true) {
            skip();
            auto op = text_.substr(pos_, 2);
            if (op == "->" || op == "--") {
                if ((op == "->") != doc.directed) fail("edge operator does not match graph kind");
                pos_ += 2;
                chain.push_back(id());
            } else {
                break;
            }
        }
        auto a = attrs();
        if (chain.size() == 1) {
            doc.nodes.emplace_back(first, std::move(a));
        } else {
            for (std::size_t k = 0; k + 1 < chain.size(); ++k)
                doc.edges.emplace_back(chain[k], chain[k + 1], a);
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline DotDocument parse_dot(std::string_view text) { return detail::DotParser(text).parse(); }

struct ImportedGraph {
    MigrationGraph graph;
    std::vector<PatternTag> patterns;
};

/// Reads back a graph written by export_dot.
inline ImportedGraph import_dot(std::string_view text) {
    const auto doc = parse_dot(text);
    ImportedGraph out;
    auto number = [](const std::map<std::string, std::string>& a, const char* key) -> std::size_t {
        auto it = a.find(key);
        if (it == a.end()) throw Error(std::string("DOT element lacks '") + key + "'");
        return std::stoul(it->second);
    };
    for (const auto& [name, a] : doc.nodes) {
        out.graph.users[name] = number(a, "users");
        if (auto it = a.find("tags"); it != a.end()) {
            std::stringstream ss(it->second);
            std::string tag;
            while (std::getline(ss, tag, ','))
                out.patterns.push_back({name, {}, parse_pattern_kind(tag)});
        }
    }
    for (const auto& [s, t, a] : doc.edges) {
        out.graph.arcs[{s, t}] = number(a, "w");
        if (auto it = a.find("pattern"); it != a.end() && it->second == "Pong" && s < t)
            out.patterns.push_back({s, t, PatternKind::Pong});
    }
    std::sort(out.patterns.begin(), out.patterns.end());
    return out;
}

// ---------------------------------------------------------------------------
// JSON dump: {nodes:[{name,users,patterns}], arcs:[{s,t,w}]}

inline nlohmann::json graph_json(const MigrationGraph& graph, const std::vector<PatternTag>& patterns) {
    std::map<std::string, std::vector<std::string>> node_tags;
    for (const auto& p : patterns) {
        if (p.kind == PatternKind::Pong) {
            node_tags[p.element].push_back("Pong:" + p.peer);
            node_tags[p.peer].push_back("Pong:" + p.element);
        } else {
            node_tags[p.element].emplace_back(to_string(p.kind));
        }
    }
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [name, users] : graph.users)
        nodes.push_back({{"name", name}, {"users", users}, {"patterns", node_tags[name]}});
    nlohmann::json arcs = nlohmann::json::array();
    for (const auto& [arc, w] : graph.arcs)
        arcs.push_back({{"s", arc.source}, {"t", arc.target}, {"w", w}});
    return {{"nodes", std::move(nodes)}, {"arcs", std::move(arcs)}};
}

inline MigrationGraph graph_from_json(const nlohmann::json& j) {
    MigrationGraph g;
    for (const auto& n : j.at("nodes")) g.users[n.at("name").get<std::string>()] = n.at("users").get<std::size_t>();
    for (const auto& a : j.at("arcs")) {
        MigrationRule r{a.at("s").get<std::string>(), a.at("t").get<std::string>()};
        if (!g.users.count(r.source) || !g.users.count(r.target))
            throw Error("arc endpoint is not a node: " + to_string(r));
        const auto w = a.at("w").get<std::size_t>();
        if (w == 0) throw Error("arc weight must be >= 1: " + to_string(r));
        g.arcs[r] = w;
    }
    return g;
}

}  // namespace migmine

#endif  // MIGMINE_GRAPH_HPP
