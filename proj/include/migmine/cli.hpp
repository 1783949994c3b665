#ifndef MIGMINE_CLI_HPP
#define MIGMINE_CLI_HPP

// Subcommand front-end. Stages talk only through files, so every stage can
// be rerun on its own. Exit codes: 0 ok, 1 usage error, 2 data error.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "migmine/graph.hpp"
#include "migmine/ingest.hpp"
#include "migmine/knowledge.hpp"
#include "migmine/loglens.hpp"
#include "migmine/mining.hpp"
#include "migmine/synth.hpp"
#include "migmine/trends.hpp"

namespace migmine::cli {

inline constexpr const char* kToolVersion = "0.1.0";

namespace fs = std::filesystem;

namespace detail {

inline std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string file_label(const std::string& name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    return out;
}

inline std::vector<std::string> split_list(const std::string& text, char sep = ',') {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

/// Collects outputs and inputs of one run and writes its manifest.
class Run {
public:
    Run(std::string subcommand, fs::path out, bool deterministic)
        : subcommand_(std::move(subcommand)), out_(std::move(out)), deterministic_(deterministic) {
        fs::create_directories(out_);
    }

    std::string read(const fs::path& path) {
        auto text = slurp(path);
        inputs_.push_back({{"path", path.string()}, {"bytes", text.size()}, {"fnv1a", hex(fnv1a(text))}});
        return text;
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(out_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + (out_ / name).string());
        f << content;
        outputs_.push_back(name);
    }

    void flag(const std::string& name, nlohmann::json value) { flags_[name] = std::move(value); }
    void seed(std::uint64_t s) { seed_ = s; }
    const fs::path& dir() const { return out_; }

    void finish() {
        nlohmann::json m = {{"tool", "migmine"},      {"version", kToolVersion}, {"subcommand", subcommand_},
                            {"inputs", inputs_},      {"flags", flags_},         {"outputs", outputs_}};
        m["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
        if (!deterministic_) {
            const auto now = std::chrono::system_clock::now().time_since_epoch();
            m["created"] = format_iso8601(std::chrono::duration_cast<std::chrono::seconds>(now).count());
        }
        std::ofstream f(out_ / (subcommand_ + ".manifest.json"), std::ios::trunc);
        f << m.dump(2) << '\n';
    }

private:
    std::string subcommand_;
    fs::path out_;
    bool deterministic_;
    nlohmann::json inputs_ = nlohmann::json::array();
    nlohmann::json flags_ = nlohmann::json::object();
    std::vector<std::string> outputs_;
    std::optional<std::uint64_t> seed_;
};

inline std::vector<DependencyHistory> read_corpus(Run& run, const fs::path& path) {
    return parse_snapshot_log(run.read(path));
}

inline std::vector<RuleReportRow> read_rules(Run& run, const fs::path& path) {
    std::istringstream in(run.read(path));
    return read_rule_report(in);
}

inline std::vector<Migration> read_migration_file(Run& run, const fs::path& path) {
    std::istringstream in(run.read(path));
    return read_migrations(in);
}

inline std::vector<CommitRecord> read_commits(Run& run, const fs::path& path) {
    std::istringstream in(run.read(path));
    return read_commit_log(in);
}

template <class F>
std::string render(F&& f) {
    std::ostringstream s;
    f(s);
    return s.str();
}

inline std::map<std::string, std::size_t> usage_or_empty(Run& run, const std::string& corpus_path,
                                                         std::vector<DependencyHistory>* keep = nullptr) {
    if (corpus_path.empty()) return {};
    auto histories = read_corpus(run, corpus_path);
    auto usage = latest_usage(histories);
    if (keep) *keep = std::move(histories);
    return usage;
}

}  // namespace detail

struct Common {
    std::string out = ".";
    bool deterministic = false;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

inline void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_flag("--deterministic", c.deterministic, "Omit wall-clock values from outputs");
    sub->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

/// Records every option given on the command line in the run manifest.
inline void record_flags(detail::Run& run, const CLI::App* sub) {
    for (const auto* opt : sub->get_options()) {
        if (opt->count() == 0 || opt->get_lnames().empty()) continue;
        const auto& res = opt->results();
        run.flag(opt->get_lnames().front(), res.size() == 1 ? nlohmann::json(res.front()) : nlohmann::json(res));
    }
}

// ---------------------------------------------------------------------------
// Subcommands

struct IngestArgs {
    std::string format = "snaplog";
    std::string in;
    std::string index;
};

inline int cmd_ingest(const IngestArgs& a, const Common& c, const CLI::App* sub, std::ostream& out) {
    detail::Run run("ingest", c.out, c.deterministic);
    record_flags(run, sub);
    std::vector<DependencyHistory> histories;
    if (a.format == "snaplog") {
        histories = detail::read_corpus(run, a.in);
    } else if (a.format == "pom") {
        std::vector<PomInfo> poms;
        std::size_t skipped = 0;
        std::vector<fs::path> files;
        if (fs::is_directory(a.in)) {
            for (const auto& e : fs::recursive_directory_iterator(a.in))
                if (e.is_regular_file() && e.path().extension() == ".xml") files.push_back(e.path());
        } else {
            files.push_back(a.in);
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            auto pom = parse_pom(run.read(f));
            skipped += pom.skipped;
            poms.push_back(std::move(pom));
        }
        histories = histories_from_poms(std::move(poms));
        if (skipped) out << "skipped " << skipped << " dependencies without coordinates\n";
    } else {
        if (a.index.empty()) throw CLI::ValidationError("--index", "required for --format imports");
        std::istringstream idx(run.read(a.index));
        const auto index = LibraryIndex::load(idx);
        std::vector<std::pair<std::string, std::vector<LibraryId>>> ambiguities;
        histories = histories_from_source_tree(a.in, index, &ambiguities);
        if (!ambiguities.empty())
            run.write("ambiguities.csv", detail::render([&](std::ostream& o) {
                o << "name,libraries\n";
                for (const auto& [name, libs] : ambiguities) {
                    std::string joined;
                    for (const auto& l : libs) joined += (joined.empty() ? "" : " ") + l.str();
                    o << csv::row({name, joined}) << '\n';
                }
            }));
    }
    run.write("corpus.snaplog", detail::render([&](std::ostream& o) { write_snapshot_log(o, histories); }));
    std::size_t snaps = 0;
    for (const auto& h : histories) snaps += h.size();
    out << histories.size() << " projects, " << snaps << " snapshots\n";
    run.finish();
    return 0;
}

struct MineArgs {
    std::string in;
    std::string seeds;
    std::size_t step = 30;
    bool all_couples = false;
    FilterOptions filter;
    double tc = 0.06;
};

inline int cmd_mine(const MineArgs& a, const Common& c, const CLI::App* sub, std::ostream& out) {
    detail::Run run("mine", c.out, c.deterministic);
    record_flags(run, sub);
    const auto histories = detail::read_corpus(run, a.in);
    SeedSet seeds;
    if (!a.seeds.empty()) {
        std::istringstream kb_in(run.read(a.seeds));
        seeds = read_knowledge(kb_in).seeds;
    }
    MineOptions opt;
    opt.step = a.step;
    opt.every_couple = a.all_couples;
    opt.filter = a.filter;
    opt.tc = a.tc;
    opt.jobs = c.jobs;
    const auto mined = mine_corpus(histories, seeds, opt);
    const auto merged = merge_rules(mined.board);
    const auto ranked = rank_rules(filter_rules(merged.rules, opt.filter), merged, opt.tc);

    std::set<MigrationRule> kept;
    for (const auto& r : ranked) kept.insert(r.rule);
    std::vector<Migration> retained;
    for (const auto& m : mined.candidates)
        if (kept.count({m.source.artifact(), m.target.artifact()})) retained.push_back(m);
    auto candidates = mined.candidates;
    std::sort(candidates.begin(), candidates.end());
    std::sort(retained.begin(), retained.end());

    run.write("rules.csv", detail::render([&](std::ostream& o) { write_rule_report(o, ranked); }));
    run.write("scoreboard.json", scoreboard_json(merged).dump(2) + "\n");
    run.write("candidates.csv", detail::render([&](std::ostream& o) { write_migrations(o, candidates); }));
    run.write("migrations.csv", detail::render([&](std::ostream& o) { write_migrations(o, retained); }));
    out << candidates.size() << " candidates, " << merged.rules.size() << " merged rules, " << ranked.size()
        << " retained\n";
    run.finish();
    return 0;
}

struct ReviewArgs {
    std::string rules;
    std::string kb;
    std::string logs;
    std::size_t max_logs = 3;
};

inline int cmd_review(const ReviewArgs& a, const Common& c, const CLI::App* sub, std::istream& in,
                      std::ostream& out) {
    detail::Run run("review", c.out, c.deterministic);
    record_flags(run, sub);
    const auto rows = detail::read_rules(run, a.rules);
    KnowledgeBase kb;
    if (fs::exists(a.kb)) {
        std::istringstream kb_in(run.read(a.kb));
        kb = read_knowledge(kb_in);
    }
    LogIndex logs;
    if (!a.logs.empty()) logs = LogIndex(detail::read_commits(run, a.logs));

    std::map<MigrationRule, const RuleReportRow*> row_of;
    std::deque<MigrationRule> pending;
    for (const auto& r : rows) {
        row_of[r.rule] = &r;
        pending.push_back(r.rule);
    }
    KnowledgeGraphs graphs(kb);
    auto now = [&]() -> Timestamp {
        if (c.deterministic) return 0;
        return std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
    auto save = [&] { save_knowledge(kb, a.kb); };

    std::size_t human = 0;
    const auto before = kb.seeds.size() + kb.banned.size();
    while (auto item = triage_next(pending, kb, graphs, now())) {
        const auto& rule = item->rule;
        const auto* row = row_of.at(rule);
        out << "\n" << rule.source << " -> " << rule.target << "  score " << row->score << ", owners "
            << row->groups << (is_conflicted(rule, graphs) ? "  (conflicting evidence)" : "") << "\n";
        if (!logs.empty()) {
            const auto hits = search(rule, logs);
            for (std::size_t k = 0; k < hits.size() && k < a.max_logs; ++k)
                out << "  log " << hits[k].project.str() << "@" << hits[k].id << " ["
                    << format_iso8601(hits[k].timestamp) << "] " << hits[k].message << "\n";
            if (hits.empty()) out << "  no matching commit logs\n";
        }
        for (auto v : {Verdict::Seed, Verdict::Banned}) {
            const auto unlocked = unlocked_by(rule, v, pending, graphs);
            if (unlocked.empty()) continue;
            out << "  as " << to_string(v) << " would also settle:";
            for (const auto& [r, w] : unlocked) out << " " << to_string(r) << "=" << to_string(w);
            out << "\n";
        }
        out << rule.source << " -> " << rule.target << "  [s]eed / [b]an / s[k]ip / [q]uit\n> " << std::flush;
        std::string answer;
        if (!std::getline(in, answer)) break;
        answer.erase(0, answer.find_first_not_of(" \t"));
        const char key = answer.empty() ? 'k' : static_cast<char>(std::tolower(answer[0]));
        if (key == 'q') break;
        if (key == 's' || key == 'b') {
            const auto v = key == 's' ? Verdict::Seed : Verdict::Banned;
            kb = record_verdict(std::move(kb), rule, v, "reviewer", now());
            graphs.add(rule, v);
            ++human;
            save();
        }
    }
    save();
    out << "\n" << human << " verdicts recorded, " << (kb.seeds.size() + kb.banned.size() - before - human)
        << " inferred; kb has " << kb.seeds.size() << " seeds, " << kb.banned.size() << " banned\n";
    run.finish();
    return 0;
}

struct GraphArgs {
    std::string rules;
    std::string corpus;
    std::string weight = "owners";
    PatternConfig patterns;
};

inline int cmd_graph(const GraphArgs& a, const Common& c, const CLI::App* sub, std::ostream& out) {
    detail::Run run("graph", c.out, c.deterministic);
    record_flags(run, sub);
    const auto rows = detail::read_rules(run, a.rules);
    std::vector<DependencyHistory> histories;
    const auto usage = detail::usage_or_empty(run, a.corpus, &histories);
    const auto graph = build_graph(rows, usage, a.weight == "projects" ? WeightSource::Projects : WeightSource::Owners);
    const auto tags = detect_patterns(graph, a.patterns);
    auto cats = categories(graph);
    for (auto& cat : cats) cat.introductions = introductions(histories, cat.members);

    run.write("graph.dot", export_dot(graph, tags));
    run.write("graph.json", graph_json(graph, tags).dump(2) + "\n");
    run.write("categories.csv", detail::render([&](std::ostream& o) {
        o << "category,members,total_weight,introductions\n";
        for (const auto& cat : cats) {
            std::string members;
            for (const auto& m : cat.members) members += (members.empty() ? "" : " ") + m;
            o << cat.id << ',' << csv::field(members) << ',' << cat.total_weight << ',' << cat.introductions << '\n';
        }
    }));
    run.write("patterns.csv", detail::render([&](std::ostream& o) {
        o << "element,peer,pattern\n";
        for (const auto& t : tags) o << csv::row({t.element, t.peer, std::string(to_string(t.kind))}) << '\n';
    }));
    out << graph.users.size() << " libraries, " << graph.arcs.size() << " arcs, " << cats.size() << " categories, "
        << tags.size() << " pattern tags\n";
    run.finish();
    return 0;
}

struct TrendsArgs {
    std::string corpus;
    std::string libraries;
    std::string rules;
    std::size_t category = 0;
    std::string migrations;
    std::string commits;
    int bucket_days = 14;
    std::string side = "to";
};

inline int cmd_trends(const TrendsArgs& a, const Common& c, const CLI::App* sub, std::ostream& out,
                      std::ostream& err) {
    detail::Run run("trends", c.out, c.deterministic);
    record_flags(run, sub);
    const auto histories = detail::read_corpus(run, a.corpus);

    std::vector<std::string> libs = detail::split_list(a.libraries);
    std::string title = "popularity";
    if (libs.empty() && !a.rules.empty()) {
        const auto cats = categories(build_graph(detail::read_rules(run, a.rules)));
        if (a.category >= cats.size()) throw Error("no category " + std::to_string(a.category));
        libs.assign(cats[a.category].members.begin(), cats[a.category].members.end());
        title = "category " + std::to_string(a.category);
    }
    if (!libs.empty()) {
        const auto series = popularity_series(histories, libs, a.bucket_days);
        for (const auto& s : series)
            run.write("popularity_" + detail::file_label(s.library) + ".csv",
                      detail::render([&](std::ostream& o) { write_series_csv(o, s); }));
        run.write("popularity.svg", render_series_svg(series, title));
    }

    std::vector<Migration> migrations;
    if (!a.migrations.empty()) {
        migrations = detail::read_migration_file(run, a.migrations);
        const auto times = migration_times(migrations, a.side == "from" ? TimeSide::From : TimeSide::To);
        run.write("migration_times.csv", detail::render([&](std::ostream& o) { write_migration_times_csv(o, times); }));
        run.write("migration_times.svg", render_migration_times_svg(times, "migration times"));
    }

    if (!a.commits.empty()) {
        const auto commits = detail::read_commits(run, a.commits);
        std::map<ProjectId, std::vector<CommitRecord>> by_project;
        for (const auto& cr : commits) by_project[cr.project].push_back(cr);
        if (!migrations.empty()) {
            std::vector<EffortRecord> records;
            for (const auto& m : migrations) records.push_back(effort(m, by_project[m.project]));
            run.write("effort.csv", detail::render([&](std::ostream& o) { write_effort_csv(o, effort_distribution(records)); }));

            // Projects grouped by commit-count decile; migrations counted per group.
            std::vector<double> sizes;
            for (const auto& h : histories) sizes.push_back(static_cast<double>(by_project[h.project()].size()));
            if (sizes.size() >= 10) {
                const auto bounds = deciles(sizes);
                std::vector<double> group_projects(10, 0.0), group_migrations(10, 0.0);
                std::map<ProjectId, std::size_t> group_of;
                for (const auto& h : histories) {
                    const auto g = decile_group(bounds, static_cast<double>(by_project[h.project()].size()));
                    group_of[h.project()] = g;
                    group_projects[g - 1] += 1;
                }
                for (const auto& m : migrations)
                    if (auto it = group_of.find(m.project); it != group_of.end()) group_migrations[it->second - 1] += 1;
                std::vector<double> obs, exp_sizes;
                nlohmann::json groups = nlohmann::json::array();
                for (std::size_t g = 0; g < 10; ++g) {
                    groups.push_back({{"group", g + 1}, {"bound", bounds[g]}, {"projects", group_projects[g]},
                                      {"migrations", group_migrations[g]}});
                    if (group_projects[g] > 0) {
                        obs.push_back(group_migrations[g]);
                        exp_sizes.push_back(group_projects[g]);
                    }
                }
                nlohmann::json j = {{"groups", groups}};
                try {
                    const auto r = chi_squared(obs, exp_sizes);
                    j["statistic"] = r.statistic;
                    j["df"] = r.df;
                    j["p_value"] = r.p_value;
                } catch (const DegenerateInput& e) {
                    j["error"] = e.what();
                }
                run.write("chi_squared.json", j.dump(2) + "\n");
            } else {
                err << "chi-squared skipped: fewer than 10 projects\n";
            }
        }
    }
    out << "trends written to " << run.dir().string() << "\n";
    run.finish();
    return 0;
}

struct LogsearchArgs {
    std::string logs;
    std::string rule;
    std::string rules;
};

inline int cmd_logsearch(const LogsearchArgs& a, const Common& c, const CLI::App* sub, std::ostream& out) {
    detail::Run run("logsearch", c.out, c.deterministic);
    record_flags(run, sub);
    const LogIndex index(detail::read_commits(run, a.logs));
    std::vector<MigrationRule> rules;
    if (!a.rule.empty()) {
        const auto parts = detail::split_list(a.rule);
        if (parts.size() != 2) throw CLI::ValidationError("--rule", "expected source,target");
        rules.push_back({parts[0], parts[1]});
    }
    if (!a.rules.empty())
        for (const auto& r : detail::read_rules(run, a.rules)) rules.push_back(r.rule);
    if (rules.empty()) throw CLI::ValidationError("--rule", "give --rule or --rules");
    std::ostringstream csv_out;
    csv_out << "source,target,project,id,ts,author,msg\n";
    for (const auto& rule : rules) {
        const auto hits = search(rule, index);
        out << to_string(rule) << ": " << hits.size() << " commits\n";
        for (const auto& h : hits) {
            out << "  " << h.project.str() << "@" << h.id << " " << h.message << "\n";
            csv_out << csv::row({rule.source, rule.target, h.project.str(), h.id, std::to_string(h.timestamp),
                                 h.author, h.message})
                    << '\n';
        }
    }
    run.write("logsearch.csv", csv_out.str());
    run.finish();
    return 0;
}

inline SynthConfig load_synth_config(detail::Run& run, const std::string& path, std::optional<std::uint64_t> seed) {
    SynthConfig cfg;
    if (!path.empty()) cfg = synth_config_from_json(nlohmann::json::parse(run.read(path)));
    if (seed) cfg.rng_seed = *seed;
    cfg.validate();
    run.seed(cfg.rng_seed);
    return cfg;
}

struct SynthArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
};

inline int cmd_synth(const SynthArgs& a, const Common& c, const CLI::App* sub, std::ostream& out) {
    detail::Run run("synth", c.out, c.deterministic);
    record_flags(run, sub);
    const auto cfg = load_synth_config(run, a.config, a.seed);
    const auto corpus = generate(cfg);
    run.write("corpus.snaplog", detail::render([&](std::ostream& o) { write_synth_log(o, corpus, cfg); }));
    run.write("truth.csv", detail::render([&](std::ostream& o) { write_migrations(o, corpus.truth.migrations()); }));
    run.write("commits.jsonl", detail::render([&](std::ostream& o) {
        write_commit_log(o, synth_commits(corpus, cfg.rng_seed));
    }));
    out << corpus.histories.size() << " projects, " << corpus.truth.planted.size() << " planted migrations, "
        << corpus.truth.decoys.size() << " decoys\n";
    run.finish();
    return 0;
}

struct SweepArgs {
    std::string config;
    std::string steps = "1,5,15,30,60";
    std::optional<std::uint64_t> seed;
};

inline int cmd_sweep(const SweepArgs& a, const Common& c, const CLI::App* sub, std::ostream& out) {
    detail::Run run("sweep", c.out, c.deterministic);
    record_flags(run, sub);
    const auto cfg = load_synth_config(run, a.config, a.seed);
    std::vector<std::size_t> steps;
    for (const auto& s : detail::split_list(a.steps)) {
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || v == 0) throw CLI::ValidationError("--steps", "'" + s + "' is not a positive integer");
        steps.push_back(v);
    }
    const auto corpus = generate(cfg);
    const auto rows = step_sweep(corpus.histories, corpus.truth, steps, c.jobs, !c.deterministic);
    const auto table = detail::render([&](std::ostream& o) { write_sweep_csv(o, rows); });
    run.write("sweep.csv", table);
    out << table;
    run.finish();
    return 0;
}

struct ReportArgs {
    std::string rules;
    std::string corpus;
    std::size_t top = 15;
};

inline int cmd_report(const ReportArgs& a, const Common& c, const CLI::App* sub, std::ostream& out) {
    detail::Run run("report", c.out, c.deterministic);
    record_flags(run, sub);
    const auto rows = detail::read_rules(run, a.rules);
    const auto usage = detail::usage_or_empty(run, a.corpus);
    const auto graph = build_graph(rows, usage);
    const auto cats = categories(graph);
    const auto tags = detect_patterns(graph);

    std::ostringstream md;
    md << "# Library migration report\n\n";
    md << "## Most observed migrations\n\n";
    md << "| # | Source | Target | Score | Owners | Confidence |\n|---|---|---|---|---|---|\n";
    for (std::size_t k = 0; k < rows.size() && k < a.top; ++k)
        md << "| " << k + 1 << " | " << rows[k].rule.source << " | " << rows[k].rule.target << " | " << rows[k].score
           << " | " << rows[k].groups << " | " << csv::fixed(rows[k].confidence, 2) << " |\n";
    md << "\n" << rows.size() << " rules retained in total.\n\n## Categories\n\n";
    for (const auto& cat : cats) {
        md << "- **" << cat.id << "** (weight " << cat.total_weight << "): ";
        bool first = true;
        for (const auto& m : cat.members) md << (first ? "" : ", ") << m, first = false;
        md << "\n";
    }
    md << "\n## Pattern tags\n\n";
    if (tags.empty()) md << "none\n";
    for (const auto& t : tags)
        md << "- " << t.element << (t.peer.empty() ? "" : " <-> " + t.peer) << ": " << to_string(t.kind) << "\n";
    std::vector<std::string> artifacts;
    if (fs::exists(run.dir()))
        for (const auto& e : fs::directory_iterator(run.dir())) {
            const auto ext = e.path().extension().string();
            const auto name = e.path().filename().string();
            if (name.find(".manifest.") != std::string::npos) continue;
            if (ext == ".csv" || ext == ".svg" || ext == ".dot" || ext == ".json") artifacts.push_back(name);
        }
    std::sort(artifacts.begin(), artifacts.end());
    md << "\n## Artifacts\n\n";
    if (artifacts.empty()) md << "none\n";
    for (const auto& name : artifacts) md << "- [" << name << "](" << name << ")\n";
    run.write("report.md", md.str());
    out << "report written to " << (run.dir() / "report.md").string() << "\n";
    run.finish();
    return 0;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mine library migrations from dependency histories", "migmine"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common common;

    IngestArgs ingest;
    auto* s_ingest = app.add_subcommand("ingest", "Normalize POMs, source trees or snapshot logs to a snapshot log");
    s_ingest->add_option("--format", ingest.format)->check(CLI::IsMember({"pom", "snaplog", "imports"}))->capture_default_str();
    s_ingest->add_option("--in", ingest.in, "Input file or directory")->required();
    s_ingest->add_option("--index", ingest.index, "Library index (imports format)");
    add_common(s_ingest, common);

    MineArgs mine;
    auto* s_mine = app.add_subcommand("mine", "Mine candidate migrations and rank rules");
    s_mine->add_option("--in", mine.in, "Snapshot log")->required();
    s_mine->add_option("--seeds", mine.seeds, "Knowledge file whose seeds excise known pairs");
    s_mine->add_option("--step", mine.step)->check(CLI::PositiveNumber)->capture_default_str();
    s_mine->add_flag("--all-couples", mine.all_couples, "Observe every couple instead of sampling");
    s_mine->add_option("--min-score", mine.filter.min_score)->capture_default_str();
    s_mine->add_option("--min-groups", mine.filter.min_groups)->capture_default_str();
    s_mine->add_option("--bidir-min-score", mine.filter.bidir_min_score)->capture_default_str();
    s_mine->add_option("--tc", mine.tc)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    add_common(s_mine, common);

    ReviewArgs review;
    auto* s_review = app.add_subcommand("review", "Label rules interactively");
    s_review->add_option("--rules", review.rules)->required();
    s_review->add_option("--kb", review.kb, "Knowledge file (created if missing)")->required();
    s_review->add_option("--logs", review.logs, "Commit log");
    s_review->add_option("--max-logs", review.max_logs)->capture_default_str();
    add_common(s_review, common);

    GraphArgs graph;
    auto* s_graph = app.add_subcommand("graph", "Build the migration graph, categories and pattern tags");
    s_graph->add_option("--rules", graph.rules)->required();
    s_graph->add_option("--corpus", graph.corpus, "Snapshot log for user counts and introductions");
    s_graph->add_option("--weight", graph.weight)->check(CLI::IsMember({"owners", "projects"}))->capture_default_str();
    s_graph->add_option("--volume", graph.patterns.volume)->capture_default_str();
    s_graph->add_option("--dominance", graph.patterns.dominance)->capture_default_str();
    s_graph->add_option("--pong-min", graph.patterns.pong_min)->capture_default_str();
    s_graph->add_option("--pong-ratio", graph.patterns.pong_ratio)->capture_default_str();
    s_graph->add_option("--challenger-min", graph.patterns.challenger_min)->capture_default_str();
    add_common(s_graph, common);

    TrendsArgs trends;
    auto* s_trends = app.add_subcommand("trends", "Popularity series, migration times, effort and chi-squared");
    s_trends->add_option("--corpus", trends.corpus)->required();
    s_trends->add_option("--libraries", trends.libraries, "Comma-separated artifact names");
    s_trends->add_option("--rules", trends.rules, "Rule report; picks libraries from --category");
    s_trends->add_option("--category", trends.category)->capture_default_str();
    s_trends->add_option("--migrations", trends.migrations);
    s_trends->add_option("--commits", trends.commits);
    s_trends->add_option("--bucket-days", trends.bucket_days)->check(CLI::PositiveNumber)->capture_default_str();
    s_trends->add_option("--side", trends.side)->check(CLI::IsMember({"from", "to"}))->capture_default_str();
    add_common(s_trends, common);

    LogsearchArgs logsearch;
    auto* s_logsearch = app.add_subcommand("logsearch", "Find commits mentioning both libraries of a rule");
    s_logsearch->add_option("--logs", logsearch.logs)->required();
    s_logsearch->add_option("--rule", logsearch.rule, "source,target");
    s_logsearch->add_option("--rules", logsearch.rules, "Rule report");
    add_common(s_logsearch, common);

    SynthArgs synth;
    auto* s_synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted migrations");
    s_synth->add_option("--config", synth.config, "JSON synth configuration");
    s_synth->add_option("--seed", synth.seed, "Override rng_seed");
    add_common(s_synth, common);

    SweepArgs sweep;
    auto* s_sweep = app.add_subcommand("sweep", "Mine a synthetic corpus at several sampling steps");
    s_sweep->add_option("--config", sweep.config, "JSON synth configuration");
    s_sweep->add_option("--steps", sweep.steps)->capture_default_str();
    s_sweep->add_option("--seed", sweep.seed, "Override rng_seed");
    add_common(s_sweep, common);

    ReportArgs report;
    auto* s_report = app.add_subcommand("report", "Markdown summary of rules, categories and patterns");
    s_report->add_option("--rules", report.rules)->required();
    s_report->add_option("--corpus", report.corpus);
    s_report->add_option("--top", report.top)->capture_default_str();
    add_common(s_report, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (s_ingest->parsed()) return cmd_ingest(ingest, common, s_ingest, out);
        if (s_mine->parsed()) return cmd_mine(mine, common, s_mine, out);
        if (s_review->parsed()) return cmd_review(review, common, s_review, in, out);
        if (s_graph->parsed()) return cmd_graph(graph, common, s_graph, out);
        if (s_trends->parsed()) return cmd_trends(trends, common, s_trends, out, err);
        if (s_logsearch->parsed()) return cmd_logsearch(logsearch, common, s_logsearch, out);
        if (s_synth->parsed()) return cmd_synth(synth, common, s_synth, out);
        if (s_sweep->parsed()) return cmd_sweep(sweep, common, s_sweep, out);
        if (s_report->parsed()) return cmd_report(report, common, s_report, out);
    } catch (const CLI::ValidationError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace migmine::cli

#endif  // MIGMINE_CLI_HPP
