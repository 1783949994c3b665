#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "migmine/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args, const std::string& input = "") {
    args.insert(args.begin(), "migmine");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = migmine::cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("migmine_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string at(const std::string& name) const { return (dir / name).string(); }

    fs::path dir;
    const std::string toy = MIGMINE_SAMPLES "/toy/corpus.snaplog";
    const std::string toy_kb = MIGMINE_SAMPLES "/toy/kb.csv";
};

}  // namespace

TEST_F(Cli, UsageErrorsExitWithOne) {
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"frobnicate"}).code, 1);
    EXPECT_EQ(cli({"mine"}).code, 1);  // --in is required
    EXPECT_EQ(cli({"mine", "--in", toy, "--step", "0"}).code, 1);
    EXPECT_EQ(cli({"graph", "--rules", "x", "--weight", "heaviest"}).code, 1);
    EXPECT_EQ(cli({"logsearch", "--logs", MIGMINE_SAMPLES "/commits.jsonl", "--out", dir.string()}).code, 1);
    EXPECT_EQ(cli({"sweep", "--steps", "1,x", "--out", dir.string()}).code, 1);
    const auto help = cli({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("mine"), std::string::npos);
    EXPECT_EQ(cli({"--version"}).code, 0);
}

TEST_F(Cli, DataErrorsExitWithTwo) {
    std::ofstream(at("bad.snaplog")) << "{\"project\":\"a:b\",\"index\":1}\n";
    const auto r = cli({"mine", "--in", at("bad.snaplog"), "--out", at("o")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 1"), std::string::npos);
    EXPECT_EQ(cli({"mine", "--in", at("missing.snaplog"), "--out", at("o")}).code, 2);
    std::ofstream(at("bad.json")) << "{";
    EXPECT_EQ(cli({"synth", "--config", at("bad.json"), "--out", at("o")}).code, 2);
}

TEST_F(Cli, MineWritesReportsAndManifest) {
    const auto r = cli({"mine", "--in", toy, "--all-couples", "--min-score", "1", "--min-groups", "1", "--out",
                        dir.string(), "--deterministic"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "5 candidates, 4 merged rules, 4 retained\n");
    const auto rules = slurp(dir / "rules.csv");
    EXPECT_EQ(rules.substr(0, rules.find('\n')), "source,target,score,groups,confidence,projects");
    EXPECT_NE(rules.find("junit,testng,1,1,1.000000,1"), std::string::npos);
    EXPECT_EQ(lines(slurp(dir / "candidates.csv")), 6u);
    EXPECT_EQ(lines(slurp(dir / "migrations.csv")), 6u);
    const auto manifest = nlohmann::json::parse(slurp(dir / "mine.manifest.json"));
    EXPECT_EQ(manifest.at("subcommand"), "mine");
    EXPECT_EQ(manifest.at("outputs").size(), 4u);
    EXPECT_EQ(manifest.at("inputs").at(0).at("bytes"), fs::file_size(toy));
    EXPECT_EQ(manifest.at("flags").at("min-score"), "1");
    EXPECT_FALSE(manifest.contains("created"));

    const auto defaults = cli({"mine", "--in", toy, "--out", at("d")});
    ASSERT_EQ(defaults.code, 0);
    EXPECT_EQ(lines(slurp(dir / "d" / "rules.csv")), 1u);  // toy support is below the default thresholds
    EXPECT_TRUE(nlohmann::json::parse(slurp(dir / "d" / "mine.manifest.json")).contains("created"));
}

TEST_F(Cli, DeterministicRerunIsByteIdentical) {
    std::vector<std::string> args{"mine", "--in", toy, "--all-couples", "--min-score", "1", "--min-groups", "1",
                                  "--out", dir.string(), "--deterministic"};
    ASSERT_EQ(cli(args).code, 0);
    std::map<std::string, std::string> first;
    for (const auto& e : fs::directory_iterator(dir)) first[e.path().filename().string()] = slurp(e.path());
    ASSERT_EQ(cli(args).code, 0);
    for (const auto& [name, content] : first) EXPECT_EQ(slurp(dir / name), content) << name;

    auto parallel = args;
    parallel[9] = at("p");
    parallel.push_back("--jobs");
    parallel.push_back("4");
    ASSERT_EQ(cli(parallel).code, 0);
    for (const auto* name : {"rules.csv", "candidates.csv", "migrations.csv", "scoreboard.json"})
        EXPECT_EQ(slurp(dir / "p" / name), first.at(name)) << name;
}

TEST_F(Cli, SeedsExciseKnownPairs) {
    ASSERT_EQ(cli({"mine", "--in", toy, "--all-couples", "--seeds", toy_kb, "--min-score", "1", "--min-groups", "1",
                   "--out", dir.string()})
                  .code,
              0);
    const auto rules = slurp(dir / "rules.csv");
    EXPECT_EQ(rules.find("junit,testng"), std::string::npos);
    EXPECT_EQ(rules.find("testng,junit"), std::string::npos);
}

TEST_F(Cli, IngestFormats) {
    auto r = cli({"ingest", "--in", toy, "--out", at("s")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "2 projects, 5 snapshots\n");
    r = cli({"ingest", "--format", "imports", "--in", MIGMINE_SAMPLES "/imports", "--index",
             MIGMINE_SAMPLES "/library.index", "--out", at("i")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "1 projects, 2 snapshots\n");
    const auto log = slurp(dir / "i" / "corpus.snaplog");
    EXPECT_NE(log.find("acme:shop"), std::string::npos);
    EXPECT_NE(log.find("slf4j"), std::string::npos);
    EXPECT_EQ(cli({"ingest", "--format", "imports", "--in", MIGMINE_SAMPLES "/imports", "--out", at("j")}).code, 1);

    const auto pom_dir = dir / "poms";
    fs::create_directories(pom_dir);
    std::ofstream(pom_dir / "a.xml")
        << "<project><groupId>g</groupId><artifactId>a</artifactId><version>1.0</version>"
           "<dependencies><dependency><groupId>junit</groupId><artifactId>junit</artifactId></dependency>"
           "</dependencies></project>";
    std::ofstream(pom_dir / "b.xml")
        << "<project><groupId>g</groupId><artifactId>a</artifactId><version>2.0</version>"
           "<dependencies><dependency><groupId>org.testng</groupId><artifactId>testng</artifactId></dependency>"
           "<dependency><artifactId>orphan</artifactId></dependency></dependencies></project>";
    r = cli({"ingest", "--format", "pom", "--in", pom_dir.string(), "--out", at("p")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("skipped 1"), std::string::npos);
    EXPECT_NE(r.out.find("1 projects, 2 snapshots"), std::string::npos);
}

TEST_F(Cli, ReviewScriptedSession) {
    ASSERT_EQ(cli({"mine", "--in", toy, "--all-couples", "--min-score", "1", "--min-groups", "1", "--out",
                   dir.string()})
                  .code,
              0);
    // Rules in report order: junit->slf4j, junit->testng, log4j->slf4j, testng->junit.
    const auto r = cli({"review", "--rules", at("rules.csv"), "--kb", at("kb.csv"), "--logs",
                        MIGMINE_SAMPLES "/commits.jsonl", "--out", dir.string(), "--deterministic"},
                       "b\ns\nk\n");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("junit -> slf4j  [s]eed / [b]an / s[k]ip / [q]uit"), std::string::npos);
    EXPECT_NE(r.out.find("say goodbye log4j. welcome slf4j-simple"), std::string::npos);
    // junit->testng as seed settles testng->junit, so only three prompts appear.
    std::size_t prompts = 0;
    for (auto pos = r.out.find("[s]eed / [b]an"); pos != std::string::npos; pos = r.out.find("[s]eed / [b]an", pos + 1))
        ++prompts;
    EXPECT_EQ(prompts, 3u);
    std::ifstream kb_in(at("kb.csv"));
    const auto kb = migmine::read_knowledge(kb_in);
    EXPECT_EQ(kb.verdict_of({"junit", "slf4j"}), migmine::Verdict::Banned);
    EXPECT_EQ(kb.verdict_of({"junit", "testng"}), migmine::Verdict::Seed);
    EXPECT_EQ(kb.verdict_of({"testng", "junit"}), migmine::Verdict::Seed);
    EXPECT_EQ(kb.annotations.at({"testng", "junit"}).annotator, "auto");
    EXPECT_EQ(kb.verdict_of({"log4j", "slf4j"}), migmine::Verdict::Unknown);
    EXPECT_NE(r.out.find("2 verdicts recorded, 1 inferred"), std::string::npos);

    // A second session picks up the saved file; quitting leaves it unchanged.
    const auto saved = slurp(at("kb.csv"));
    const auto again = cli({"review", "--rules", at("rules.csv"), "--kb", at("kb.csv"), "--out", dir.string()}, "q\n");
    ASSERT_EQ(again.code, 0);
    EXPECT_NE(again.out.find("log4j -> slf4j"), std::string::npos);
    EXPECT_EQ(slurp(at("kb.csv")), saved);
}

TEST_F(Cli, GraphAndReport) {
    std::ofstream(at("rules.csv")) << "source,target,score,groups,confidence,projects\n"
                                      "hsqldb,h2,9,6,0.5,7\nderby,hsqldb,4,3,0.4,3\nhsqldb,derby,5,4,0.4,5\n";
    auto r = cli({"graph", "--rules", at("rules.csv"), "--corpus", toy, "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, 26), "3 libraries, 3 arcs, 1 cat");
    const auto doc = migmine::import_dot(slurp(dir / "graph.dot"));
    EXPECT_EQ(doc.graph.weight("hsqldb", "h2"), 6u);
    EXPECT_EQ(migmine::graph_from_json(nlohmann::json::parse(slurp(dir / "graph.json"))), doc.graph);
    EXPECT_EQ(slurp(dir / "patterns.csv").substr(0, 21), "element,peer,pattern\n");
    EXPECT_NE(slurp(dir / "patterns.csv").find("h2,,GoldRush"), std::string::npos);
    EXPECT_EQ(lines(slurp(dir / "categories.csv")), 2u);

    r = cli({"report", "--rules", at("rules.csv"), "--top", "2", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto md = slurp(dir / "report.md");
    EXPECT_NE(md.find("| 1 | hsqldb | h2 | 9 | 6 | 0.50 |"), std::string::npos);
    EXPECT_EQ(md.find("\n| 3 |"), std::string::npos);
    EXPECT_NE(md.find("[graph.dot](graph.dot)"), std::string::npos);
    EXPECT_EQ(md.find("manifest"), std::string::npos);
}

TEST_F(Cli, TrendsOutputs) {
    // No cohabitation, so every planted migration spans exactly one commit.
    std::ofstream(at("cfg.json")) << R"({"n_projects": 60, "n_snapshots": 30, "migration_rate": 0.05, "alias_rate": 0.2})";
    ASSERT_EQ(cli({"synth", "--config", at("cfg.json"), "--seed", "3", "--out", at("s"), "--deterministic"}).code, 0);
    const auto r = cli({"trends", "--corpus", at("s/corpus.snaplog"), "--libraries", "lib0,lib8", "--migrations",
                        at("s/truth.csv"), "--commits", at("s/commits.jsonl"), "--bucket-days", "28", "--out",
                        at("t")});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto* name : {"popularity_lib0.csv", "popularity_lib8.csv", "popularity.svg", "migration_times.csv",
                             "migration_times.svg", "effort.csv", "chi_squared.json"})
        EXPECT_TRUE(fs::exists(dir / "t" / name)) << name;
    const auto chi = nlohmann::json::parse(slurp(dir / "t" / "chi_squared.json"));
    EXPECT_EQ(chi.at("groups").size(), 10u);
    EXPECT_TRUE(chi.contains("p_value") || chi.contains("error"));
    EXPECT_NE(slurp(dir / "t" / "effort.csv").find("commits,100.0,"), std::string::npos);
    EXPECT_EQ(cli({"trends", "--corpus", at("s/corpus.snaplog"), "--rules", at("none.csv"), "--out", at("t")}).code, 2);
}

TEST_F(Cli, SynthAndSweep) {
    std::ofstream(at("cfg.json")) << R"({"n_projects": 30, "n_snapshots": 20, "n_libraries": 20, "migration_rate": 0.1})";
    auto r = cli({"synth", "--config", at("cfg.json"), "--seed", "5", "--out", at("a"), "--deterministic"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = cli({"synth", "--config", at("cfg.json"), "--seed", "5", "--out", at("b"), "--deterministic"});
    ASSERT_EQ(r.code, 0);
    for (const auto* name : {"corpus.snaplog", "truth.csv", "commits.jsonl"})
        EXPECT_EQ(slurp(dir / "a" / name), slurp(dir / "b" / name)) << name;
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "a" / "synth.manifest.json")).at("seed"), 5);
    EXPECT_NE(slurp(dir / "a" / "corpus.snaplog").find("\"rng_seed\":5"), std::string::npos);

    r = cli({"sweep", "--config", at("cfg.json"), "--steps", "1,4", "--seed", "5", "--out", at("w"), "--deterministic"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto table = slurp(dir / "w" / "sweep.csv");
    EXPECT_EQ(table, r.out);
    EXPECT_EQ(lines(table), 3u);
    EXPECT_NE(table.find(",0.000\n"), std::string::npos);
}

TEST_F(Cli, Logsearch) {
    auto r = cli({"logsearch", "--logs", MIGMINE_SAMPLES "/commits.jsonl", "--rule", "log4j,logback", "--out",
                  dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("log4j -> logback: 1 commits"), std::string::npos);
    const auto csv = slurp(dir / "logsearch.csv");
    EXPECT_EQ(lines(csv), 2u);
    EXPECT_NE(csv.find("alpha:pa,c2"), std::string::npos);

    std::ofstream(at("rules.csv")) << "source,target,score,groups,confidence,projects\n"
                                      "org.json,gson,4,2,1,2\njunit,testng,4,2,1,2\n";
    r = cli({"logsearch", "--logs", MIGMINE_SAMPLES "/commits.jsonl", "--rules", at("rules.csv"), "--out",
             dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("org.json -> gson: 1 commits"), std::string::npos);
    EXPECT_NE(r.out.find("junit -> testng: 1 commits"), std::string::npos);
}
