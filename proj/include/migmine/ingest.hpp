#ifndef MIGMINE_INGEST_HPP
#define MIGMINE_INGEST_HPP

// Front-ends that turn manifests, snapshot logs and source trees into
// DependencyHistory values, plus version ordering and couple selection.

#include <algorithm>
#include <cctype>
#include <compare>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "migmine/model.hpp"

namespace migmine {

class XmlError : public Error {
public:
    using Error::Error;
};

class MissingCoordinate : public Error {
public:
    using Error::Error;
};

class DuplicateSnapshot : public ParseError {
public:
    using ParseError::ParseError;
};

class TooShort : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// POM manifests

struct PomInfo {
    ProjectId project;
    std::string version;  // empty when the POM has no top-level <version>
    LibrarySet dependencies;
    std::size_t skipped = 0;  // dependency entries lacking a coordinate
};

/// Reads the top-level coordinates and the <dependencies> section of a POM.
/// Dependency versions are ignored.
inline PomInfo parse_pom(const std::string& xml_text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(xml_text);
        pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        throw XmlError(std::string("malformed POM: ") + e.what());
    }
    auto project = tree.get_child_optional("project");
    if (!project) throw MissingCoordinate("POM has no <project> root element");

    auto text = [](const pt::ptree& node, const char* key) -> std::string {
        auto value = node.get_optional<std::string>(key);
        return value ? *value : std::string();
    };
    const auto group = text(*project, "groupId");
    const auto artifact = text(*project, "artifactId");
    if (group.empty() || artifact.empty())
        throw MissingCoordinate("POM lacks a top-level groupId or artifactId");

    PomInfo info{ProjectId(group, artifact), text(*project, "version"), {}, 0};
    if (auto deps = project->get_child_optional("dependencies")) {
        for (const auto& [tag, dep] : *deps) {
            if (tag != "dependency") continue;
            const auto g = text(dep, "groupId");
            const auto a = text(dep, "artifactId");
            if (g.empty() || a.empty() || g.find(':') != std::string::npos ||
                a.find(':') != std::string::npos) {
                ++info.skipped;
                continue;
            }
            info.dependencies.emplace(g, a);
        }
    }
    return info;
}

// ---------------------------------------------------------------------------
// Version ordering
//
// A documented subset of Maven's scheme. A version is split on '.', '-' and
// digit/letter transitions. Numeric zeros and release qualifiers
// ("", ga, final, release) are dropped when they stand at the end or right
// before another qualifier, so "1.0" == "1" and "1.0-alpha" == "1-alpha".
// The remaining tokens compare lexicographically, padding the shorter list
// with an end marker, over this alphabet:
//
//   alpha < beta < milestone < rc < snapshot < (end) < sp
//         < unknown qualifiers (lexicographic) < numbers (by value)

namespace detail {

struct VersionToken {
    // 0..4 pre-release qualifiers, 5 end/release, 6 sp, 7 unknown, 8 number
    int rank;
    std::string text;  // digits without leading zeros, or lowercase qualifier

    friend std::strong_ordering operator<=>(const VersionToken& a, const VersionToken& b) {
        if (auto c = a.rank <=> b.rank; c != 0) return c;
        if (a.rank == 8) {
            if (auto c = a.text.size() <=> b.text.size(); c != 0) return c;
        }
        return a.text.compare(b.text) <=> 0;
    }
};

constexpr int kReleaseRank = 5;

inline VersionToken classify_version_token(std::string token) {
    if (!token.empty() && std::isdigit(static_cast<unsigned char>(token[0]))) {
        auto nz = token.find_first_not_of('0');
        return {8, nz == std::string::npos ? "0" : token.substr(nz)};
    }
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    static const std::map<std::string, int, std::less<>> ranks = {
        {"alpha", 0}, {"a", 0},     {"beta", 1},  {"b", 1},     {"milestone", 2},
        {"m", 2},     {"rc", 3},    {"cr", 3},    {"snapshot", 4}, {"", kReleaseRank},
        {"ga", kReleaseRank},       {"final", kReleaseRank},    {"release", kReleaseRank},
        {"sp", 6}};
    if (auto it = ranks.find(token); it != ranks.end())
        return {it->second, it->second == kReleaseRank ? std::string() : token};
    return {7, token};
}

inline std::vector<VersionToken> canonical_version(std::string_view version) {
    std::vector<VersionToken> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) tokens.push_back(classify_version_token(std::move(current)));
        current.clear();
    };
    for (std::size_t k = 0; k < version.size(); ++k) {
        const char c = version[k];
        if (c == '.' || c == '-' || c == '_') {
            flush();
            continue;
        }
        if (!current.empty() && (std::isdigit(static_cast<unsigned char>(c)) != 0) !=
                                    (std::isdigit(static_cast<unsigned char>(current.back())) != 0))
            flush();
        current.push_back(c);
    }
    flush();

    auto null_like = [](const VersionToken& t) {
        return t.rank == kReleaseRank || (t.rank == 8 && t.text == "0");
    };
    std::vector<VersionToken> out;
    for (std::size_t k = tokens.size(); k-- > 0;) {
        const bool before_qualifier_or_end = out.empty() || out.back().rank < 8;
        if (null_like(tokens[k]) && before_qualifier_or_end) continue;
        out.push_back(std::move(tokens[k]));
    }
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace detail

inline std::strong_ordering compare_versions(std::string_view a, std::string_view b) {
    const auto ta = detail::canonical_version(a);
    const auto tb = detail::canonical_version(b);
    const detail::VersionToken end{detail::kReleaseRank, {}};
    const auto n = std::max(ta.size(), tb.size());
    for (std::size_t k = 0; k < n; ++k) {
        const auto& x = k < ta.size() ? ta[k] : end;
        const auto& y = k < tb.size() ? tb[k] : end;
        if (auto c = x <=> y; c != 0) return c;
    }
    return std::strong_ordering::equal;
}

/// Groups POM versions by project, orders each project's versions and
/// numbers them 1..n. POMs carry no dates, so timestamps are left at 0.
inline std::vector<DependencyHistory> histories_from_poms(std::vector<PomInfo> poms) {
    std::map<ProjectId, std::vector<PomInfo>> by_project;
    for (auto& pom : poms) by_project[pom.project].push_back(std::move(pom));
    std::vector<DependencyHistory> out;
    for (auto& [project, versions] : by_project) {
        std::stable_sort(versions.begin(), versions.end(), [](const PomInfo& a, const PomInfo& b) {
            return compare_versions(a.version, b.version) < 0;
        });
        std::vector<Snapshot> snapshots;
        for (std::size_t k = 0; k < versions.size(); ++k)
            snapshots.push_back({k + 1, 0, std::move(versions[k].dependencies)});
        out.emplace_back(project, std::move(snapshots));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Snapshot-Log: one JSON object per line,
//   {"project":"owner:name","index":<int>=1>,"ts":<unix seconds>,"deps":["g:a",...]}
// Unknown keys are ignored; lines starting with '#' and blank lines are skipped.

inline std::vector<DependencyHistory> parse_snapshot_log(std::istream& in) {
    struct Pending {
        std::size_t index;
        Timestamp ts;
        LibrarySet deps;
    };
    std::map<ProjectId, std::vector<Pending>> by_project;
    std::map<std::pair<ProjectId, std::size_t>, std::size_t> seen;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            const auto record = nlohmann::json::parse(line);
            if (!record.is_object()) throw ParseError(line_no, "record is not a JSON object");
            const auto& project = record.at("project");
            const auto& index = record.at("index");
            const auto& ts = record.at("ts");
            const auto& deps = record.at("deps");
            if (!project.is_string() || !index.is_number_integer() || !ts.is_number_integer() ||
                !deps.is_array())
                throw ParseError(line_no, "field of wrong type");
            if (index.get<std::int64_t>() < 1) throw ParseError(line_no, "index must be >= 1");
            auto pid = parse_project_id(project.get<std::string>());
            const auto idx = index.get<std::size_t>();
            if (auto [it, fresh] = seen.emplace(std::pair{pid, idx}, line_no); !fresh)
                throw DuplicateSnapshot(line_no, "duplicate snapshot " + pid.str() + "#" +
                                                     std::to_string(idx) + " (first on line " +
                                                     std::to_string(it->second) + ")");
            Pending p{idx, ts.get<Timestamp>(), {}};
            for (const auto& dep : deps) {
                if (!dep.is_string()) throw ParseError(line_no, "dependency is not a string");
                p.deps.insert(parse_library_id(dep.get<std::string>()));
            }
            by_project[std::move(pid)].push_back(std::move(p));
        } catch (const ParseError&) {
            throw;
        } catch (const MalformedCoordinate& e) {
            throw ParseError(line_no, e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }

    std::vector<DependencyHistory> out;
    out.reserve(by_project.size());
    for (auto& [project, pending] : by_project) {
        std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
            return std::tie(a.ts, a.index) < std::tie(b.ts, b.index);
        });
        std::vector<Snapshot> snapshots;
        snapshots.reserve(pending.size());
        for (std::size_t k = 0; k < pending.size(); ++k)
            snapshots.push_back({k + 1, pending[k].ts, std::move(pending[k].deps)});
        out.emplace_back(project, std::move(snapshots));
    }
    return out;
}

inline std::vector<DependencyHistory> parse_snapshot_log(const std::string& text) {
    std::istringstream in(text);
    return parse_snapshot_log(in);
}

inline std::string snapshot_record(const ProjectId& project, const Snapshot& snapshot) {
    nlohmann::json deps = nlohmann::json::array();
    for (const auto& dep : snapshot.dependencies) deps.push_back(dep.str());
    nlohmann::json record = {{"project", project.str()},
                             {"index", snapshot.index},
                             {"ts", snapshot.timestamp},
                             {"deps", std::move(deps)}};
    return record.dump();
}

inline void write_snapshot_log(std::ostream& out, const std::vector<DependencyHistory>& histories) {
    for (const auto& h : histories)
        for (const auto& s : h.snapshots()) out << snapshot_record(h.project(), s) << '\n';
}

// ---------------------------------------------------------------------------
// Import scanning and library index

/// Dotted names of `import` / `import static` statements; a trailing ".*" is
/// stripped to the package name. Line-based: qualified names used in code
/// bodies are not seen.
inline std::set<std::string> scan_imports(std::string_view source_text) {
    static const std::regex import_re(
        R"(^\s*import\s+(?:static\s+)?([A-Za-z_$][\w$]*(?:\s*\.\s*[A-Za-z_$][\w$]*)*)(\s*\.\s*\*)?\s*;)");
    std::set<std::string> names;
    std::size_t pos = 0;
    while (pos <= source_text.size()) {
        auto eol = source_text.find('\n', pos);
        if (eol == std::string_view::npos) eol = source_text.size();
        const std::string line(source_text.substr(pos, eol - pos));
        std::smatch m;
        if (std::regex_search(line, m, import_re)) {
            std::string name = m[1].str();
            name.erase(std::remove_if(name.begin(), name.end(),
                                      [](unsigned char c) { return std::isspace(c); }),
                       name.end());
            names.insert(std::move(name));
        }
        pos = eol + 1;
    }
    return names;
}

/// Maps qualified-name patterns to libraries.
///
/// Pattern syntax: a pattern is literal except for an optional trailing '*',
/// which matches any suffix. A pattern ending in ".*" additionally matches
/// the bare package (so "org.junit.*" matches "org.junit" and
/// "org.junit.Test"). Patterns are anchored at both ends.
///
/// File format: UTF-8 lines "pattern<TAB>group:artifact"; '#' starts a
/// comment line.
class LibraryIndex {
public:
    struct Entry {
        std::string pattern;
        LibraryId library;
    };

    LibraryIndex() = default;
    explicit LibraryIndex(std::vector<Entry> entries) : entries_(std::move(entries)) {
        for (const auto& e : entries_) validate(e.pattern);
    }

    static LibraryIndex load(std::istream& in) {
        std::vector<Entry> entries;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
                throw ParseError(line_no, "expected 'pattern<TAB>group:artifact'");
            try {
                auto pattern = line.substr(0, tab);
                validate(pattern);
                entries.push_back({std::move(pattern), parse_library_id(line.substr(tab + 1))});
            } catch (const Error& e) {
                throw ParseError(line_no, e.what());
            }
        }
        return LibraryIndex(std::move(entries));
    }

    static bool pattern_matches(std::string_view pattern, std::string_view name) {
        if (pattern.empty() || pattern.back() != '*') return pattern == name;
        const auto prefix = pattern.substr(0, pattern.size() - 1);
        if (name.substr(0, prefix.size()) == prefix) return true;
        return prefix.size() >= 1 && prefix.back() == '.' &&
               name == prefix.substr(0, prefix.size() - 1);
    }

    /// Every distinct library whose pattern matches `name`.
    LibrarySet matches(std::string_view name) const {
        LibrarySet out;
        for (const auto& e : entries_)
            if (pattern_matches(e.pattern, name)) out.insert(e.library);
        return out;
    }

    const std::vector<Entry>& entries() const noexcept { return entries_; }

private:
    static void validate(const std::string& pattern) {
        if (pattern.empty()) throw Error("empty library pattern");
        const auto star = pattern.find('*');
        if (star != std::string::npos && star + 1 != pattern.size())
            throw Error("'*' may only end a library pattern ('" + pattern + "')");
    }

    std::vector<Entry> entries_;
};

struct Resolution {
    LibrarySet libraries;
    std::vector<std::pair<std::string, std::vector<LibraryId>>> ambiguities;
};

/// Unambiguous names contribute their library; names matching several
/// libraries are reported and contribute nothing.
inline Resolution resolve_libraries(const std::set<std::string>& names, const LibraryIndex& index) {
    Resolution r;
    for (const auto& name : names) {
        auto libs = index.matches(name);
        if (libs.size() == 1)
            r.libraries.insert(*libs.begin());
        else if (libs.size() > 1)
            r.ambiguities.emplace_back(name, std::vector<LibraryId>(libs.begin(), libs.end()));
    }
    return r;
}

/// Reads checked-out versions laid out as
///   <root>/<owner>/<name>/<index>@<unix-ts>/**/*.java
/// and resolves each version's imports against `index`.
inline std::vector<DependencyHistory> histories_from_source_tree(
    const std::filesystem::path& root, const LibraryIndex& index,
    std::vector<std::pair<std::string, std::vector<LibraryId>>>* ambiguities = nullptr) {
    namespace fs = std::filesystem;
    std::vector<DependencyHistory> out;
    auto sorted_dirs = [](const fs::path& dir) {
        std::vector<fs::path> v;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_directory()) v.push_back(e.path());
        std::sort(v.begin(), v.end());
        return v;
    };
    for (const auto& owner : sorted_dirs(root)) {
        for (const auto& name : sorted_dirs(owner)) {
            ProjectId project(owner.filename().string(), name.filename().string());
            std::vector<std::pair<std::pair<Timestamp, std::size_t>, LibrarySet>> found;
            for (const auto& version : sorted_dirs(name)) {
                const auto label = version.filename().string();
                const auto at = label.find('@');
                if (at == std::string::npos)
                    throw Error("version directory '" + label + "' is not '<index>@<ts>'");
                std::size_t idx = 0;
                Timestamp ts = 0;
                try {
                    idx = std::stoul(label.substr(0, at));
                    ts = std::stoll(label.substr(at + 1));
                } catch (const std::exception&) {
                    throw Error("version directory '" + label + "' is not '<index>@<ts>'");
                }
                std::set<std::string> qualified;
                std::vector<fs::path> files;
                for (const auto& f : fs::recursive_directory_iterator(version))
                    if (f.is_regular_file() && f.path().extension() == ".java")
                        files.push_back(f.path());
                std::sort(files.begin(), files.end());
                for (const auto& f : files) {
                    std::ifstream in(f, std::ios::binary);
                    std::stringstream buf;
                    buf << in.rdbuf();
                    auto names_in_file = scan_imports(buf.str());
                    qualified.insert(names_in_file.begin(), names_in_file.end());
                }
                auto resolved = resolve_libraries(qualified, index);
                if (ambiguities)
                    ambiguities->insert(ambiguities->end(), resolved.ambiguities.begin(),
                                        resolved.ambiguities.end());
                found.push_back({{ts, idx}, std::move(resolved.libraries)});
            }
            std::sort(found.begin(), found.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::vector<Snapshot> snapshots;
            for (std::size_t k = 0; k < found.size(); ++k)
                snapshots.push_back({k + 1, found[k].first.first, std::move(found[k].second)});
            out.emplace_back(std::move(project), std::move(snapshots));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Couple selection

using Couple = std::pair<std::size_t, std::size_t>;
using CoupleList = std::vector<Couple>;

/// Sequential couples (1, 1+step), (1+step, 1+2*step), ...; when the next
/// endpoint would pass the last snapshot, the last couple ends there.
inline CoupleList sample_couples(const DependencyHistory& history, std::size_t step) {
    if (step < 1) throw Error("sampling step must be >= 1");
    const auto& s = history.snapshots();
    if (s.size() < 2)
        throw TooShort(history.project().str() + ": need at least 2 snapshots to form a couple");
    CoupleList couples;
    std::size_t i = 0;
    const std::size_t last = s.size() - 1;
    while (true) {
        const std::size_t j = i + step;
        if (j >= last) {
            couples.emplace_back(s[i].index, s[last].index);
            break;
        }
        couples.emplace_back(s[i].index, s[j].index);
        i = j;
    }
    return couples;
}

/// Every couple (i, j) with i < j.
inline CoupleList all_couples(const DependencyHistory& history) {
    CoupleList couples;
    const auto& s = history.snapshots();
    for (std::size_t a = 0; a < s.size(); ++a)
        for (std::size_t b = a + 1; b < s.size(); ++b) couples.emplace_back(s[a].index, s[b].index);
    return couples;
}

}  // namespace migmine

#endif  // MIGMINE_INGEST_HPP
