#ifndef MIGMINE_MINING_HPP
#define MIGMINE_MINING_HPP

// Rule mining: dependency diffs, equivalence filtering, candidate
// generation, SCORE/GROUPS accumulation, artifact-level merging and the
// score/owner/confidence filters.

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "migmine/csv.hpp"
#include "migmine/ingest.hpp"
#include "migmine/model.hpp"

namespace migmine {

class MissingSnapshot : public Error {
public:
    using Error::Error;
};

class NoDropObservations : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Diffs

struct DepDiff {
    ProjectId project;
    Couple couple;
    LibrarySet removed;  // dep(i) \ dep(j)
    LibrarySet added;    // dep(j) \ dep(i)
    Timestamp from_time = 0;
    Timestamp to_time = 0;
};

inline DepDiff diff_deps(const DependencyHistory& history, Couple couple) {
    const auto* from = history.find(couple.first);
    const auto* to = history.find(couple.second);
    if (!from || !to)
        throw MissingSnapshot(history.project().str() + ": no snapshot " +
                              std::to_string(from ? couple.second : couple.first));
    DepDiff d{history.project(), couple, {}, {}, from->timestamp, to->timestamp};
    std::set_difference(from->dependencies.begin(), from->dependencies.end(),
                        to->dependencies.begin(), to->dependencies.end(),
                        std::inserter(d.removed, d.removed.end()));
    std::set_difference(to->dependencies.begin(), to->dependencies.end(),
                        from->dependencies.begin(), from->dependencies.end(),
                        std::inserter(d.added, d.added.end()));
    return d;
}

// ---------------------------------------------------------------------------
// Equivalence

/// Lowercase tokens of an artifact name, split on every non-alphanumeric
/// character and on lower-to-upper CamelCase boundaries.
inline std::set<std::string> tokens(std::string_view artifact) {
    std::set<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.insert(std::move(current));
        current.clear();
    };
    for (std::size_t k = 0; k < artifact.size(); ++k) {
        const auto c = static_cast<unsigned char>(artifact[k]);
        if (!std::isalnum(c)) {
            flush();
            continue;
        }
        if (std::isupper(c) && k > 0 && std::islower(static_cast<unsigned char>(artifact[k - 1])))
            flush();
        current.push_back(static_cast<char>(std::tolower(c)));
    }
    flush();
    return out;
}

inline bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib)
            ++ia;
        else if (*ib < *ia)
            ++ib;
        else
            return true;
    }
    return false;
}

/// Same groupId, or artifactIds sharing a token.
inline bool equivalent(const LibraryId& a, const LibraryId& b) {
    return a.group() == b.group() || intersects(tokens(a.artifact()), tokens(b.artifact()));
}

// ---------------------------------------------------------------------------
// Candidates

/// Validated rules, named either by full coordinate ("g:a") or by artifact.
using SeedSet = std::set<MigrationRule>;

inline bool is_seed(const SeedSet& seeds, const LibraryId& s, const LibraryId& t) {
    if (seeds.empty()) return false;
    for (const auto& sn : {s.str(), s.artifact()})
        for (const auto& tn : {t.str(), t.artifact()})
            if (seeds.count(MigrationRule{sn, tn})) return true;
    return false;
}

struct ReducedDiff {
    LibrarySet removed;
    LibrarySet added;
};

/// Drops every library related to a library on the other side (equivalent,
/// or a seed pair), then every library whose artifact occurs on both sides.
/// Related libraries leave their set entirely, not just the matched pair.
inline ReducedDiff reduce(const DepDiff& diff, const SeedSet& seeds) {
    LibrarySet related;
    for (const auto& r : diff.removed)
        for (const auto& a : diff.added)
            if (equivalent(r, a) || is_seed(seeds, r, a)) {
                related.insert(r);
                related.insert(a);
            }
    ReducedDiff out;
    std::set<std::string> removed_artifacts, added_artifacts;
    for (const auto& r : diff.removed)
        if (!related.count(r)) removed_artifacts.insert(r.artifact());
    for (const auto& a : diff.added)
        if (!related.count(a)) added_artifacts.insert(a.artifact());
    for (const auto& r : diff.removed)
        if (!related.count(r) && !added_artifacts.count(r.artifact())) out.removed.insert(r);
    for (const auto& a : diff.added)
        if (!related.count(a) && !removed_artifacts.count(a.artifact())) out.added.insert(a);
    return out;
}

inline std::vector<Migration> cartesian_product(const DepDiff& diff, const ReducedDiff& reduced) {
    std::vector<Migration> out;
    out.reserve(reduced.removed.size() * reduced.added.size());
    for (const auto& r : reduced.removed)
        for (const auto& a : reduced.added)
            out.push_back(Migration{diff.project, diff.couple.first, diff.couple.second,
                                    diff.from_time, diff.to_time, r, a});
    return out;
}

inline std::vector<Migration> generate_candidates(const DepDiff& diff, const SeedSet& seeds = {}) {
    return cartesian_product(diff, reduce(diff, seeds));
}

// ---------------------------------------------------------------------------
// ScoreBoard

/// SCORE and GROUPS per coordinate rule, plus the owners that dropped each
/// library (the confidence denominator). Merging boards is associative and
/// commutative.
struct ScoreBoard {
    std::map<CoordinateRule, RuleStats> stats;
    std::map<LibraryId, std::set<std::string>> drop_owners;

    ScoreBoard& operator+=(const ScoreBoard& other) {
        for (const auto& [rule, s] : other.stats) stats[rule] += s;
        for (const auto& [lib, owners] : other.drop_owners)
            drop_owners[lib].insert(owners.begin(), owners.end());
        return *this;
    }

    friend bool operator==(const ScoreBoard&, const ScoreBoard&) = default;
};

inline void record_drops(ScoreBoard& board, const ProjectId& project, const LibrarySet& dropped) {
    for (const auto& lib : dropped) board.drop_owners[lib].insert(project.owner());
}

inline ScoreBoard& accumulate(ScoreBoard& board, const std::vector<Migration>& candidates) {
    for (const auto& m : candidates) {
        auto& s = board.stats[CoordinateRule{m.source, m.target}];
        ++s.score;
        s.owners.insert(m.project.owner());
        s.occurrences.insert(m.project);
        board.drop_owners[m.source].insert(m.project.owner());
    }
    return board;
}

/// Runs one diff through reduction, drop recording, the product and
/// accumulation. Added-only diffs leave the board untouched.
inline std::vector<Migration> mine_diff(ScoreBoard& board, const DepDiff& diff,
                                        const SeedSet& seeds) {
    if (diff.removed.empty()) return {};
    auto reduced = reduce(diff, seeds);
    record_drops(board, diff.project, reduced.removed);
    auto candidates = cartesian_product(diff, reduced);
    accumulate(board, candidates);
    return candidates;
}

// ---------------------------------------------------------------------------
// Merging and filtering

using RuleMap = std::map<MigrationRule, RuleStats>;

struct MergedRules {
    RuleMap rules;
    std::map<std::string, std::set<std::string>> drop_owners;  // keyed by artifact
};

/// Discards groupIds: rules with identical source and target artifacts are
/// summed; rules whose artifacts coincide are dropped.
inline MergedRules merge_rules(const ScoreBoard& board) {
    MergedRules merged;
    for (const auto& [rule, s] : board.stats) {
        if (rule.source.artifact() == rule.target.artifact()) continue;
        merged.rules[MigrationRule{rule.source.artifact(), rule.target.artifact()}] += s;
    }
    for (const auto& [lib, owners] : board.drop_owners)
        merged.drop_owners[lib.artifact()].insert(owners.begin(), owners.end());
    return merged;
}

struct FilterOptions {
    std::size_t min_score = 4;
    std::size_t min_groups = 2;
    std::size_t bidir_min_score = 2;
};

/// Keeps a rule when score >= min_score and |owners| >= min_groups, or when
/// both directions pass bidir_min_score and min_groups.
inline RuleMap filter_rules(const RuleMap& merged, const FilterOptions& opt = {}) {
    RuleMap kept;
    for (const auto& [rule, s] : merged) {
        const bool strong = s.score >= opt.min_score && s.owners.size() >= opt.min_groups;
        bool bidirectional = false;
        if (!strong && s.score >= opt.bidir_min_score && s.owners.size() >= opt.min_groups) {
            auto back = merged.find(MigrationRule{rule.target, rule.source});
            bidirectional = back != merged.end() && back->second.score >= opt.bidir_min_score &&
                            back->second.owners.size() >= opt.min_groups;
        }
        if (strong || bidirectional) kept.emplace(rule, s);
    }
    return kept;
}

/// Owner-level association confidence |g(m)| / |owners dropping source|.
struct Confidence {
    std::size_t owners = 0;
    std::size_t dropping = 0;

    double value() const { return static_cast<double>(owners) / static_cast<double>(dropping); }
    friend bool operator==(const Confidence&, const Confidence&) = default;
};

inline Confidence confidence(const MigrationRule& rule, const MergedRules& merged) {
    auto drops = merged.drop_owners.find(rule.source);
    if (drops == merged.drop_owners.end() || drops->second.empty())
        throw NoDropObservations("no owner ever dropped '" + rule.source + "'");
    auto it = merged.rules.find(rule);
    return {it == merged.rules.end() ? 0 : it->second.owners.size(), drops->second.size()};
}

inline Confidence confidence(const CoordinateRule& rule, const ScoreBoard& board) {
    auto drops = board.drop_owners.find(rule.source);
    if (drops == board.drop_owners.end() || drops->second.empty())
        throw NoDropObservations("no owner ever dropped '" + rule.source.str() + "'");
    auto it = board.stats.find(rule);
    return {it == board.stats.end() ? 0 : it->second.owners.size(), drops->second.size()};
}

struct RankedRule {
    MigrationRule rule;
    RuleStats stats;
    double confidence = 0.0;
};

/// Report order: descending |owners|, descending score, then source, target.
inline bool report_before(const RankedRule& a, const RankedRule& b) {
    return std::forward_as_tuple(b.stats.owners.size(), b.stats.score, a.rule.source,
                                 a.rule.target) < std::forward_as_tuple(a.stats.owners.size(),
                                                                        a.stats.score, b.rule.source,
                                                                        b.rule.target);
}

/// Applies the confidence threshold to already filtered rules and ranks them.
inline std::vector<RankedRule> rank_rules(const RuleMap& filtered, const MergedRules& merged,
                                          double tc) {
    std::vector<RankedRule> out;
    for (const auto& [rule, s] : filtered) {
        const double conf = confidence(rule, merged).value();
        if (conf >= tc) out.push_back({rule, s, conf});
    }
    std::sort(out.begin(), out.end(), report_before);
    return out;
}

// ---------------------------------------------------------------------------
// Corpus pipeline

struct MineOptions {
    std::size_t step = 30;
    bool every_couple = false;  // observe all (i, j) instead of sampling
    FilterOptions filter;
    double tc = 0.06;
    unsigned jobs = 1;
};

struct MineResult {
    ScoreBoard board;
    std::vector<Migration> candidates;
};

inline MineResult mine_history(const DependencyHistory& history, const SeedSet& seeds,
                               const MineOptions& opt) {
    MineResult r;
    if (history.size() < 2) return r;
    const auto couples = opt.every_couple ? all_couples(history) : sample_couples(history, opt.step);
    for (const auto& c : couples) {
        auto found = mine_diff(r.board, diff_deps(history, c), seeds);
        r.candidates.insert(r.candidates.end(), std::make_move_iterator(found.begin()),
                            std::make_move_iterator(found.end()));
    }
    return r;
}

/// Mines every history. Work is split into `opt.jobs` contiguous blocks whose
/// partial results are merged in block order, so the output does not depend
/// on the worker count.
inline MineResult mine_corpus(const std::vector<DependencyHistory>& histories,
                              const SeedSet& seeds, const MineOptions& opt) {
    const std::size_t jobs = std::max<std::size_t>(1, std::min<std::size_t>(opt.jobs, histories.size()));
    std::vector<MineResult> partial(jobs);
    auto work = [&](std::size_t block) {
        const std::size_t begin = histories.size() * block / jobs;
        const std::size_t end = histories.size() * (block + 1) / jobs;
        for (std::size_t k = begin; k < end; ++k) {
            auto r = mine_history(histories[k], seeds, opt);
            partial[block].board += r.board;
            auto& c = partial[block].candidates;
            c.insert(c.end(), std::make_move_iterator(r.candidates.begin()),
                     std::make_move_iterator(r.candidates.end()));
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::jthread> workers;
        for (std::size_t b = 0; b < jobs; ++b) workers.emplace_back(work, b);
    }
    MineResult total;
    for (auto& p : partial) {
        total.board += p.board;
        total.candidates.insert(total.candidates.end(), std::make_move_iterator(p.candidates.begin()),
                                std::make_move_iterator(p.candidates.end()));
    }
    return total;
}

/// merge -> score/owner filter -> confidence filter -> report order.
inline std::vector<RankedRule> retained_rules(const ScoreBoard& board, const MineOptions& opt) {
    const auto merged = merge_rules(board);
    return rank_rules(filter_rules(merged.rules, opt.filter), merged, opt.tc);
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr std::string_view kRuleReportHeader = "source,target,score,groups,confidence,projects";

/// CSV "source,target,score,groups,confidence,projects"; `projects` is |r(m)|.
inline void write_rule_report(std::ostream& out, const std::vector<RankedRule>& rules) {
    out << kRuleReportHeader << '\n';
    for (const auto& r : rules)
        out << csv::row({r.rule.source, r.rule.target, std::to_string(r.stats.score),
                         std::to_string(r.stats.owners.size()), csv::fixed(r.confidence, 6),
                         std::to_string(r.stats.occurrences.size())})
            << '\n';
}

/// One row of a rule report read back; set contents are not part of the report.
struct RuleReportRow {
    MigrationRule rule;
    std::size_t score = 0;
    std::size_t groups = 0;
    double confidence = 0.0;
    std::size_t projects = 0;
};

inline std::vector<RuleReportRow> read_rule_report(std::istream& in) {
    std::vector<RuleReportRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line.rfind("source,", 0) == 0) continue;
        auto f = csv::split(line, line_no);
        if (f.size() != 6) throw ParseError(line_no, "rule report rows have 6 fields");
        try {
            rows.push_back({{f[0], f[1]},
                            std::stoul(f[2]),
                            std::stoul(f[3]),
                            std::stod(f[4]),
                            std::stoul(f[5])});
        } catch (const std::exception&) {
            throw ParseError(line_no, "non-numeric rule report field");
        }
    }
    return rows;
}

inline nlohmann::json scoreboard_json(const MergedRules& merged) {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& [rule, s] : merged.rules) {
        nlohmann::json projects = nlohmann::json::array();
        for (const auto& p : s.occurrences) projects.push_back(p.str());
        rules.push_back({{"source", rule.source},
                         {"target", rule.target},
                         {"score", s.score},
                         {"groups", s.owners},
                         {"projects", std::move(projects)}});
    }
    nlohmann::json drops = nlohmann::json::object();
    for (const auto& [artifact, owners] : merged.drop_owners) drops[artifact] = owners;
    return {{"rules", std::move(rules)}, {"drop_owners", std::move(drops)}};
}

inline constexpr std::string_view kMigrationHeader = "project,from_index,to_index,from_time,to_time,source,target";

inline void write_migrations(std::ostream& out, const std::vector<Migration>& migrations) {
    out << kMigrationHeader << '\n';
    for (const auto& m : migrations)
        out << csv::row({m.project.str(), std::to_string(m.from_index), std::to_string(m.to_index),
                         std::to_string(m.from_time), std::to_string(m.to_time), m.source.str(),
                         m.target.str()})
            << '\n';
}

inline std::vector<Migration> read_migrations(std::istream& in) {
    std::vector<Migration> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line.rfind("project,", 0) == 0) continue;
        auto f = csv::split(line, line_no);
        if (f.size() != 7) throw ParseError(line_no, "migration rows have 7 fields");
        try {
            out.push_back(Migration{parse_project_id(f[0]), std::stoul(f[1]), std::stoul(f[2]),
                                    std::stoll(f[3]), std::stoll(f[4]), parse_library_id(f[5]),
                                    parse_library_id(f[6])});
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        } catch (const std::exception&) {
            throw ParseError(line_no, "non-numeric migration field");
        }
    }
    return out;
}

}  // namespace migmine

#endif  // MIGMINE_MINING_HPP
