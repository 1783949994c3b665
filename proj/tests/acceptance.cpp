// End-to-end acceptance run. One line per criterion; exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "migmine.hpp"

using namespace migmine;

namespace {

struct Check {
    std::vector<std::string> problems;
    void expect(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }
};

int failures = 0;

void criterion(int n, const char* title, const std::function<void(Check&)>& body) {
    Check c;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.problems.push_back(std::string("exception: ") + e.what());
    }
    std::cout << (c.problems.empty() ? "[PASS] " : "[FAIL] ") << n << ". " << title << '\n';
    for (const auto& p : c.problems) std::cout << "       " << p << '\n';
    failures += !c.problems.empty();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

LibraryId L(const char* coord) { return parse_library_id(coord); }

DependencyHistory history(const char* project, std::vector<LibrarySet> versions) {
    std::vector<Snapshot> s;
    for (std::size_t k = 0; k < versions.size(); ++k)
        s.push_back({k + 1, static_cast<Timestamp>(1'300'000'000 + 86400 * k), std::move(versions[k])});
    return {parse_project_id(project), std::move(s)};
}

using Pairs = std::set<std::pair<std::string, std::string>>;

Pairs pairs_at(const std::vector<Migration>& ms, const char* project, std::size_t i, std::size_t j) {
    Pairs out;
    for (const auto& m : ms)
        if (m.project.str() == project && m.from_index == i && m.to_index == j)
            out.emplace(m.source.artifact(), m.target.artifact());
    return out;
}

void toy_corpus(Check& c) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<DependencyHistory> corpus{
        history("alpha:pa", {{L("junit:junit")},
                             {L("junit:junit"), L("org.testng:testng"), L("log4j:log4j")},
                             {L("org.testng:testng"), L("org.slf4j:slf4j")}}),
        history("beta:pb", {{L("org.testng:testng")}, {L("junit:junit")}})};
    MineOptions opt;
    opt.every_couple = true;
    const auto mined = mine_corpus(corpus, {}, opt);
    c.expect(pairs_at(mined.candidates, "alpha:pa", 1, 3) == Pairs{{"junit", "testng"}, {"junit", "slf4j"}},
             "pa (1,3) candidates");
    c.expect(pairs_at(mined.candidates, "alpha:pa", 1, 2).empty(), "pa (1,2) should be empty");
    c.expect(pairs_at(mined.candidates, "alpha:pa", 2, 3) == Pairs{{"junit", "slf4j"}, {"log4j", "slf4j"}},
             "pa (2,3) candidates");

    KnowledgeGraphs truth;
    truth.add_seed({"junit", "testng"});
    truth.add_seed({"log4j", "slf4j"});
    truth.add_seed({"testng", "junit"});
    truth.add_banned({"junit", "slf4j"});
    std::set<std::tuple<std::string, std::size_t, std::size_t, std::string, std::string>> got;
    for (const auto& m : validate_migrations(mined.candidates, truth))
        got.emplace(m.project.name(), m.from_index, m.to_index, m.source.artifact(), m.target.artifact());
    const decltype(got) want{{"pa", 1, 3, "junit", "testng"}, {"pa", 2, 3, "log4j", "slf4j"}, {"pb", 1, 2, "testng", "junit"}};
    c.expect(got == want, "validated migrations differ from the three expected");
    const double t = seconds_since(start);
    c.expect(t < 1.0, "took " + std::to_string(t) + " s");
}

void merge_table(Check& c) {
    ScoreBoard board;
    auto put = [&](const char* s, const char* t, std::size_t score, const char* owner) {
        auto& st = board.stats[{L(s), L(t)}];
        st.score = score;
        st.owners.insert(owner);
        st.occurrences.insert(ProjectId(owner, "p"));
    };
    put("org.hsqldb:hsqldb", "org.h2database:h2", 4, "o1");
    put("hsqldb:hsqldb", "org.h2database:h2", 1, "o2");
    put("org.h2database:h2", "hsqldb:hsqldb", 2, "o3");
    put("org.h2database:h2", "org.hsqldb:hsqldb", 5, "o4");
    const auto merged = merge_rules(board);
    std::map<MigrationRule, std::size_t> scores;
    for (const auto& [r, s] : merged.rules) scores[r] = s.score;
    c.expect(scores == std::map<MigrationRule, std::size_t>{{{"hsqldb", "h2"}, 5}, {{"h2", "hsqldb"}, 7}},
             "merged scores are not {hsqldb->h2: 5, h2->hsqldb: 7}");
}

RuleStats stats(std::size_t score, std::size_t groups) {
    RuleStats st;
    st.score = score;
    for (std::size_t k = 0; k < groups; ++k) st.owners.insert("o" + std::to_string(k));
    return st;
}

void filtering(Check& c) {
    const auto h = history("o:p", {{L("org.junit:junit")}, {L("junit:junit-dep")}});
    c.expect(generate_candidates(diff_deps(h, {1, 2})).empty(), "junit -> junit-dep not excised");

    std::size_t mismatches = 0;
    for (std::size_t s = 1; s <= 6; ++s)
        for (std::size_t g = 1; g <= 3; ++g)
            for (std::size_t bs = 0; bs <= 6; ++bs)
                for (std::size_t bg = 1; bg <= 3; ++bg) {
                    RuleMap m;
                    m[{"s", "t"}] = stats(s, g);
                    if (bs > 0) m[{"t", "s"}] = stats(bs, bg);
                    const bool want = (s >= 4 && g >= 2) || (bs > 0 && s >= 2 && g >= 2 && bs >= 2 && bg >= 2);
                    mismatches += filter_rules(m).count({"s", "t"}) != static_cast<std::size_t>(want);
                }
    c.expect(mismatches == 0, std::to_string(mismatches) + " filter table mismatches");

    c.expect(filter_rules({{{"s", "t"}, stats(4, 1)}}).empty(), "score 4 with one group kept");
    const RuleMap both{{{"s", "t"}, stats(2, 2)}, {{"t", "s"}, stats(2, 2)}};
    c.expect(filter_rules(both).size() == 2, "bidirectional pair at score 2 dropped");
}

void knowledge(Check& c) {
    KnowledgeGraphs g;
    g.add_seed({"h2", "hsqldb"});
    g.add_seed({"h2", "derby"});
    c.expect(classify({"hsqldb", "derby"}, g) == Verdict::Seed, "(hsqldb, derby) not Seed");
    KnowledgeGraphs b;
    b.add_seed({"h2", "derby"});
    b.add_banned({"derby", "log4j"});
    c.expect(classify({"h2", "log4j"}, b) == Verdict::Banned, "(h2, log4j) not Banned");
}

bool has(const std::vector<PatternTag>& tags, const std::string& e, const std::string& p, PatternKind k) {
    return std::find(tags.begin(), tags.end(), PatternTag{e, p, k}) != tags.end();
}

void no_contradictions(Check& c, const std::vector<PatternTag>& tags, const char* which) {
    for (const auto& t : tags)
        if (t.kind == PatternKind::GoldRush && has(tags, t.element, "", PatternKind::Exodus))
            c.expect(false, std::string(which) + ": " + t.element + " is both GoldRush and Exodus");
}

void patterns(Check& c) {
    MigrationGraph logging;
    logging.users = {{"slf4j-api", 1400}, {"log4j", 1300}, {"commons-logging", 700}, {"logback", 150}};
    logging.arcs = {{{"commons-logging", "slf4j-api"}, 33}, {{"log4j", "slf4j-api"}, 38},
                    {{"commons-logging", "log4j"}, 11},     {{"log4j", "logback"}, 8},
                    {{"log4j", "commons-logging"}, 6},      {{"slf4j-api", "log4j"}, 3}};
    const auto lt = detect_patterns(logging);
    c.expect(has(lt, "slf4j-api", "", PatternKind::GoldRush), "slf4j-api not GoldRush");
    c.expect(has(lt, "commons-logging", "", PatternKind::Exodus), "commons-logging not Exodus");
    no_contradictions(c, lt, "logging");

    MigrationGraph db;
    db.users = {{"hsqldb", 100}, {"mysql", 80}, {"derby", 60}, {"h2", 10}};
    db.arcs = {{{"hsqldb", "h2"}, 6},    {{"hsqldb", "derby"}, 4}, {{"derby", "hsqldb"}, 3},
               {{"hsqldb", "mysql"}, 3}, {{"mysql", "hsqldb"}, 3}, {{"derby", "mysql"}, 2},
               {{"mysql", "derby"}, 2}};
    const auto dt = detect_patterns(db);
    c.expect(has(dt, "derby", "hsqldb", PatternKind::Pong), "(derby, hsqldb) not Pong");
    c.expect(has(dt, "h2", "", PatternKind::Challenger), "h2 not Challenger");
    no_contradictions(c, dt, "database");
}

Evaluation mine_and_score(const SynthCorpus& corpus, std::size_t step) {
    MineOptions opt;
    opt.step = step;
    opt.jobs = 1;
    return evaluate(mine_corpus(corpus.histories, {}, opt).candidates, corpus.truth, step);
}

void synthetic(Check& c) {
    SynthConfig cfg;
    cfg.n_projects = 1000;
    cfg.n_snapshots = 100;
    cfg.rng_seed = 42;
    const auto start = std::chrono::steady_clock::now();
    const auto corpus = generate(cfg);
    const auto ev = mine_and_score(corpus, 1);
    const double t = seconds_since(start);
    c.expect(ev.planted > 0, "nothing planted");
    c.expect(ev.precision == 1.0 && ev.recall == 1.0,
             "step 1: P=" + std::to_string(ev.precision) + " R=" + std::to_string(ev.recall));
    c.expect(t < 30.0, "step 1 took " + std::to_string(t) + " s");

    for (std::size_t step : {9u, 30u})
        for (auto which : {MissCase::LateIntroduction, MissCase::EarlyDrop, MissCase::Composite, MissCase::Loopback}) {
            const auto fixture = miss_case_fixture(which);
            const auto e = mine_and_score(fixture, step);
            const bool ok = e.found == 0 && e.misses.size() == 1 && e.misses.begin()->first == which;
            c.expect(ok, std::string(to_string(which)) + " not bucketed at step " + std::to_string(step));
            if (which == MissCase::Composite)
                c.expect(e.composites.size() == 1, "composite false positive not reported at step " +
                                                       std::to_string(step));
        }
}

void chi_squared_checks(Check& c) {
    const auto coin = chi_squared({60, 40}, {50, 50});
    c.expect(std::fabs(coin.statistic - 4.0) <= 1e-9, "coin statistic " + std::to_string(coin.statistic));
    c.expect(std::fabs(coin.p_value - 0.04550) <= 1e-4, "coin p " + std::to_string(coin.p_value));

    const auto commits = chi_squared({0, 3, 7, 12, 18, 22, 29, 40, 46, 86},
                                     {840, 869, 791, 857, 900, 829, 833, 825, 815, 777});
    c.expect(commits.statistic >= 200 && commits.statistic <= 270,
             "commit-group statistic " + std::to_string(commits.statistic));

    // Tail integrated in u = sqrt(t) with adaptive Simpson.
    std::function<double(const std::function<double(double)>&, double, double, double, double, double, double,
                         double, int)>
        simpson = [&](const auto& f, double a, double b, double fa, double fm, double fb, double whole, double eps,
                      int depth) -> double {
        const double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
        const double flm = f(lm), frm = f(rm);
        const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
        if (depth <= 0 || std::fabs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
        return simpson(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
               simpson(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
    };
    double worst = 0.0;
    for (int df = 1; df <= 12; ++df)
        for (double x : {0.1, 0.5, 1.0, 2.0, 3.5, 5.0, 8.0, 12.0, 20.0, 35.0, 60.0, 100.0, 300.0}) {
            const double k = df / 2.0, norm = std::pow(2.0, k) * std::tgamma(k);
            const std::function<double(double)> g = [&](double u) {
                return 2.0 * std::pow(u, df - 1) * std::exp(-u * u / 2) / norm;
            };
            const double a = std::sqrt(x), b = a + 40.0;
            const double fa = g(a), fb = g(b), fm = g((a + b) / 2);
            const double oracle = simpson(g, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), 1e-13, 50);
            worst = std::max(worst, std::fabs(chi_squared_sf(x, static_cast<std::size_t>(df)) - oracle));
        }
    c.expect(worst <= 1e-6, "survival function off by " + std::to_string(worst));
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

void effort_table(Check& c) {
    const std::array<double, 10> want{79.3, 3.2, 3.4, 0.6, 1.7, 1.7, 1.4, 0.9, 1.1, 6.6};
    // Smallest N admitting integer bucket counts that round to every percentage.
    std::size_t found_n = 0;
    std::array<std::size_t, 10> counts{};
    for (std::size_t n = 1; n <= 5000 && !found_n; ++n) {
        std::vector<std::vector<std::size_t>> options(10);
        for (std::size_t b = 0; b < 10; ++b)
            for (std::size_t k = 0; k <= n; ++k)
                if (round1(100.0 * static_cast<double>(k) / static_cast<double>(n)) == want[b]) options[b].push_back(k);
        // Reachable totals, remembering one choice per bucket.
        std::vector<std::map<std::size_t, std::size_t>> reach(11);
        reach[0][0] = 0;
        for (std::size_t b = 0; b < 10; ++b)
            for (const auto& [sum, _] : reach[b])
                for (auto k : options[b])
                    if (sum + k <= n) reach[b + 1].emplace(sum + k, k);
        if (!reach[10].count(n)) continue;
        found_n = n;
        std::size_t sum = n;
        for (std::size_t b = 10; b-- > 0;) {
            counts[b] = reach[b + 1].at(sum);
            sum -= counts[b];
        }
    }
    c.expect(found_n > 0, "no N reproduces the percentages");
    if (!found_n) return;
    std::vector<EffortRecord> records;
    const Migration m{ProjectId("o", "p"), 1, 2, 0, 1, LibraryId("g", "a"), LibraryId("g", "b")};
    for (std::size_t b = 0; b < 10; ++b)
        for (std::size_t k = 0; k < counts[b]; ++k) records.push_back({m, b + 1 + (b == 9 ? 3 : 0), 1, 1});
    const auto t = effort_distribution(records);
    for (std::size_t b = 0; b < 10; ++b)
        c.expect(std::fabs(t.commits[b] - want[b]) <= 0.1,
                 "bucket " + std::to_string(b + 1) + ": " + std::to_string(t.commits[b]));
    std::cout << "       smallest N = " << found_n << '\n';
}

std::string rules_csv(const std::vector<DependencyHistory>& histories, unsigned jobs) {
    MineOptions opt;
    opt.step = 1;
    opt.jobs = jobs;
    std::ostringstream out;
    write_rule_report(out, retained_rules(mine_corpus(histories, {}, opt).board, opt));
    return out.str();
}

void determinism(Check& c) {
    SynthConfig cfg;
    cfg.n_projects = 300;
    cfg.n_snapshots = 40;
    cfg.n_libraries = 12;
    cfg.migration_rate = 0.05;
    cfg.rng_seed = 9;
    const auto corpus = generate(cfg);
    const auto one = rules_csv(corpus.histories, 1), eight = rules_csv(corpus.histories, 8);
    c.expect(one == eight, "rules.csv differs between 1 and 8 jobs");
    c.expect(std::count(one.begin(), one.end(), '\n') > 1, "no retained rules to compare");

    MineOptions opt;
    opt.step = 1;
    auto candidates = mine_corpus(corpus.histories, {}, opt).candidates;
    ScoreBoard reference;
    accumulate(reference, candidates);
    std::mt19937_64 rng(2024);
    std::size_t differing = 0;
    for (int round = 0; round < 100; ++round) {
        std::shuffle(candidates.begin(), candidates.end(), rng);
        ScoreBoard b;
        accumulate(b, candidates);
        differing += !(b == reference);
    }
    c.expect(differing == 0, std::to_string(differing) + " permutations changed the score board");
}

void logsearch(Check& c) {
    const std::vector<CommitRecord> log{
        {ProjectId("acme", "shop"), "a1", 1'300'000'000, "ann", "simple migration to logback since log4j is old"},
        {ProjectId("acme", "shop"), "a2", 1'300'000'500, "bob",
         "replaced json.org package with gson for license compatibility"},
        {ProjectId("acme", "web"), "b1", 1'300'000'900, "cy", "Bump junit"}};
    const LogIndex index(log);
    auto ids = [&](const MigrationRule& r) {
        std::set<std::string> out;
        for (const auto& h : search(r, index)) out.insert(h.id);
        return out;
    };
    c.expect(ids({"log4j", "logback"}) == std::set<std::string>{"a1"}, "(log4j, logback) hits");
    c.expect(ids({"org.json", "gson"}) == std::set<std::string>{"a2"}, "(org.json, gson) hits");
    c.expect(ids({"junit", "testng"}).empty(), "(junit, testng) should have no hits");
    c.expect(ids({"log4j", "gson"}).empty(), "(log4j, gson) should have no hits");
}

}  // namespace

int main() {
    criterion(1, "toy corpus candidates and validated migrations", toy_corpus);
    criterion(2, "groupId merge of the hsqldb/h2 table", merge_table);
    criterion(3, "equivalence excision and score/groups filter", filtering);
    criterion(4, "seed-graph and banned-graph classification", knowledge);
    criterion(5, "GoldRush, Exodus, Pong and Challenger detection", patterns);
    criterion(6, "synthetic corpus at step 1 and miss-case buckets", synthetic);
    criterion(7, "chi-squared statistic and survival function", chi_squared_checks);
    criterion(8, "effort distribution reproduces the commit percentages", effort_table);
    criterion(9, "deterministic output across jobs and candidate order", determinism);
    criterion(10, "commit-log search for migration messages", logsearch);
    std::cout << (10 - failures) << "/10 criteria passed\n";
    return failures;
}
