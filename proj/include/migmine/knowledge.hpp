#ifndef MIGMINE_KNOWLEDGE_HPP
#define MIGMINE_KNOWLEDGE_HPP

// Human verdicts (seeds/banned), the undirected seed graph GM and the
// directed banned graph GMB, and the propagation rules built on them.

#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "migmine/csv.hpp"
#include "migmine/model.hpp"
#include "migmine/time.hpp"

namespace migmine {

class ConflictingVerdict : public Error {
public:
    using Error::Error;
};

struct Annotation {
    std::string annotator;
    Timestamp timestamp = 0;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Seeds and banned rules over merged artifact names. A rule is never both.
struct KnowledgeBase {
    std::set<MigrationRule> seeds;
    std::set<MigrationRule> banned;
    std::map<MigrationRule, Annotation> annotations;

    Verdict verdict_of(const MigrationRule& rule) const {
        if (seeds.count(rule)) return Verdict::Seed;
        if (banned.count(rule)) return Verdict::Banned;
        return Verdict::Unknown;
    }

    friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;
};

/// Adds a verdict. Re-recording the same verdict keeps the first annotation.
inline KnowledgeBase record_verdict(KnowledgeBase kb, const MigrationRule& rule, Verdict verdict,
                                    const std::string& annotator, Timestamp when) {
    if (verdict == Verdict::Unknown) throw Error("only seed or banned verdicts can be recorded");
    const auto current = kb.verdict_of(rule);
    if (current == verdict) return kb;
    if (current != Verdict::Unknown)
        throw ConflictingVerdict("rule " + to_string(rule) + " is already " +
                                 std::string(to_string(current)));
    (verdict == Verdict::Seed ? kb.seeds : kb.banned).insert(rule);
    kb.annotations[rule] = {annotator, when};
    return kb;
}

// Knowledge file: CSV "source,target,verdict(seed|banned),annotator,iso8601-timestamp";
// '#' starts a comment line.

inline KnowledgeBase read_knowledge(std::istream& in) {
    KnowledgeBase kb;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto f = csv::split(line, line_no);
        if (f.size() != 5) throw ParseError(line_no, "knowledge rows have 5 fields");
        if (f[0].empty() || f[1].empty()) throw ParseError(line_no, "empty rule endpoint");
        Verdict v;
        if (f[2] == "seed")
            v = Verdict::Seed;
        else if (f[2] == "banned")
            v = Verdict::Banned;
        else
            throw ParseError(line_no, "verdict must be 'seed' or 'banned', got '" + f[2] + "'");
        Timestamp ts = 0;
        try {
            ts = parse_iso8601(f[4]);
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
        try {
            kb = record_verdict(std::move(kb), {f[0], f[1]}, v, f[3], ts);
        } catch (const ConflictingVerdict& e) {
            throw ConflictingVerdict("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return kb;
}

inline void write_knowledge(std::ostream& out, const KnowledgeBase& kb) {
    out << "# source,target,verdict,annotator,timestamp\n";
    auto emit = [&](const std::set<MigrationRule>& rules, const char* verdict) {
        for (const auto& r : rules) {
            Annotation a;
            if (auto it = kb.annotations.find(r); it != kb.annotations.end()) a = it->second;
            out << csv::row({r.source, r.target, verdict, a.annotator, format_iso8601(a.timestamp)})
                << '\n';
        }
    };
    emit(kb.seeds, "seed");
    emit(kb.banned, "banned");
}

inline KnowledgeBase load_knowledge(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open knowledge file " + path.string());
    return read_knowledge(in);
}

inline void save_knowledge(const KnowledgeBase& kb, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write knowledge file " + path.string());
    write_knowledge(out, kb);
}

/// GM (undirected, from seeds) with its connected components, and GMB
/// (directed, from banned). Updated incrementally as verdicts arrive.
class KnowledgeGraphs {
public:
    KnowledgeGraphs() = default;
    explicit KnowledgeGraphs(const KnowledgeBase& kb) {
        for (const auto& r : kb.seeds) add_seed(r);
        for (const auto& r : kb.banned) add_banned(r);
    }

    void add_seed(const MigrationRule& rule) {
        gm_[rule.source].insert(rule.target);
        gm_[rule.target].insert(rule.source);
        const auto a = component_id(rule.source);
        const auto b = component_id(rule.target);
        if (a == b) return;
        auto keep = components_[a].size() >= components_[b].size() ? a : b;
        auto drop = keep == a ? b : a;
        for (const auto& n : components_[drop]) component_of_[n] = keep;
        components_[keep].merge(components_[drop]);
        components_[drop].clear();
    }

    void add_banned(const MigrationRule& rule) { gmb_[rule.source].insert(rule.target); }

    void add(const MigrationRule& rule, Verdict v) {
        if (v == Verdict::Seed) add_seed(rule);
        if (v == Verdict::Banned) add_banned(rule);
    }

    /// GM_s: the seed-graph component containing `name` ({name} when absent).
    std::set<std::string> component(const std::string& name) const {
        auto it = component_of_.find(name);
        if (it == component_of_.end()) return {name};
        return components_[it->second];
    }

    bool same_component(const std::string& a, const std::string& b) const {
        if (a == b) return true;
        auto ia = component_of_.find(a);
        auto ib = component_of_.find(b);
        return ia != component_of_.end() && ib != component_of_.end() && ia->second == ib->second;
    }

    /// Whether some x in GM_s reaches `target` by a non-empty GMB path.
    bool banned_path(const std::string& source, const std::string& target) const {
        std::deque<std::string> frontier;
        std::set<std::string> visited;
        for (const auto& x : component(source)) frontier.push_back(x);
        while (!frontier.empty()) {
            auto node = std::move(frontier.front());
            frontier.pop_front();
            auto it = gmb_.find(node);
            if (it == gmb_.end()) continue;
            for (const auto& next : it->second) {
                if (next == target) return true;
                if (visited.insert(next).second) frontier.push_back(next);
            }
        }
        return false;
    }

    const std::map<std::string, std::set<std::string>>& gm() const noexcept { return gm_; }
    const std::map<std::string, std::set<std::string>>& gmb() const noexcept { return gmb_; }

private:
    std::size_t component_id(const std::string& name) {
        auto [it, fresh] = component_of_.emplace(name, components_.size());
        if (fresh) components_.push_back({name});
        return it->second;
    }

    std::map<std::string, std::set<std::string>> gm_;
    std::map<std::string, std::set<std::string>> gmb_;
    std::map<std::string, std::size_t> component_of_;
    std::vector<std::set<std::string>> components_;
};

/// Seed when the target shares the source's GM component; Banned when a
/// member of that component reaches the target in GMB; Unknown otherwise.
/// Seed wins when both hold; such rules are reported by is_conflicted.
inline Verdict classify(const MigrationRule& rule, const KnowledgeGraphs& graphs) {
    if (graphs.same_component(rule.source, rule.target)) return Verdict::Seed;
    if (graphs.banned_path(rule.source, rule.target)) return Verdict::Banned;
    return Verdict::Unknown;
}

inline bool is_conflicted(const MigrationRule& rule, const KnowledgeGraphs& graphs) {
    return graphs.same_component(rule.source, rule.target) &&
           graphs.banned_path(rule.source, rule.target);
}

/// Expert rules plus every candidate the seed graph classifies as Seed.
inline std::set<MigrationRule> augment(const std::set<MigrationRule>& expert,
                                       const std::set<MigrationRule>& candidates,
                                       const KnowledgeGraphs& graphs) {
    auto out = expert;
    for (const auto& c : candidates)
        if (classify(c, graphs) == Verdict::Seed) out.insert(c);
    return out;
}

/// Re-runs augment with graphs rebuilt from each result until nothing is
/// added. `passes` receives the number of passes that added rules.
inline std::set<MigrationRule> augment_to_fixed_point(const std::set<MigrationRule>& expert,
                                                      const std::set<MigrationRule>& candidates,
                                                      std::size_t* passes = nullptr) {
    auto current = expert;
    std::size_t n = 0;
    while (true) {
        KnowledgeGraphs g;
        for (const auto& r : current) g.add_seed(r);
        auto next = augment(current, candidates, g);
        if (next.size() == current.size()) break;
        current = std::move(next);
        ++n;
    }
    if (passes) *passes = n;
    return current;
}

/// Keeps candidate migrations whose artifact-level rule classifies as Seed.
template <class MigrationRange>
std::vector<Migration> validate_migrations(const MigrationRange& candidates,
                                           const KnowledgeGraphs& graphs) {
    std::vector<Migration> out;
    for (const auto& m : candidates)
        if (classify({m.source.artifact(), m.target.artifact()}, graphs) == Verdict::Seed)
            out.push_back(m);
    return out;
}

struct TriageItem {
    MigrationRule rule;
    Verdict suggested = Verdict::Unknown;
};

/// Pops rules off `pending`. Rules the graphs resolve unambiguously are
/// recorded in `kb` as annotator "auto"; the first rule needing a human
/// (Unknown, or conflicted) is returned. nullopt when the queue is drained.
inline std::optional<TriageItem> triage_next(std::deque<MigrationRule>& pending, KnowledgeBase& kb,
                                             KnowledgeGraphs& graphs, Timestamp now) {
    while (!pending.empty()) {
        auto rule = pending.front();
        pending.pop_front();
        if (kb.verdict_of(rule) != Verdict::Unknown) continue;
        const auto v = classify(rule, graphs);
        if (v == Verdict::Unknown || is_conflicted(rule, graphs))
            return TriageItem{std::move(rule), Verdict::Unknown};
        kb = record_verdict(std::move(kb), rule, v, "auto", now);
        graphs.add(rule, v);
    }
    return std::nullopt;
}

/// Pending rules whose classification would leave Unknown if `rule` were
/// recorded with `verdict`.
inline std::vector<std::pair<MigrationRule, Verdict>> unlocked_by(
    const MigrationRule& rule, Verdict verdict, const std::deque<MigrationRule>& pending,
    const KnowledgeGraphs& graphs) {
    auto hypothetical = graphs;
    hypothetical.add(rule, verdict);
    std::vector<std::pair<MigrationRule, Verdict>> out;
    for (const auto& r : pending) {
        if (r == rule || classify(r, graphs) != Verdict::Unknown) continue;
        if (auto v = classify(r, hypothetical); v != Verdict::Unknown) out.emplace_back(r, v);
    }
    return out;
}

}  // namespace migmine

#endif  // MIGMINE_KNOWLEDGE_HPP
