#ifndef MIGMINE_LOGLENS_HPP
#define MIGMINE_LOGLENS_HPP

// Commit-message index used to justify migration rules during triage.

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "migmine/mining.hpp"
#include "migmine/model.hpp"

namespace migmine {

struct CommitRecord {
    ProjectId project;
    std::string id;
    Timestamp timestamp = 0;
    std::string author;
    std::string message;

    friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

/// Commit-log format: one JSON object per line,
///   {"project":"owner:name","id":"...","ts":<unix>,"author":"...","msg":"..."}
inline std::vector<CommitRecord> read_commit_log(std::istream& in) {
    std::vector<CommitRecord> out;
    std::set<std::pair<ProjectId, std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            const auto j = nlohmann::json::parse(line);
            CommitRecord r{parse_project_id(j.at("project").get<std::string>()),
                           j.at("id").get<std::string>(), j.at("ts").get<Timestamp>(),
                           j.at("author").get<std::string>(), j.at("msg").get<std::string>()};
            if (!seen.emplace(r.project, r.id).second)
                throw ParseError(line_no, "duplicate commit " + r.project.str() + "@" + r.id);
            out.push_back(std::move(r));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return out;
}

inline void write_commit_log(std::ostream& out, const std::vector<CommitRecord>& records) {
    for (const auto& r : records) {
        nlohmann::json j = {{"project", r.project.str()}, {"id", r.id},   {"ts", r.timestamp},
                            {"author", r.author},         {"msg", r.message}};
        out << j.dump() << '\n';
    }
}

/// Inverted index from message tokens (same tokenizer as rule mining) to
/// commit records.
class LogIndex {
public:
    LogIndex() = default;
    explicit LogIndex(std::vector<CommitRecord> records) : records_(std::move(records)) {
        std::set<std::pair<ProjectId, std::string>> seen;
        for (std::size_t k = 0; k < records_.size(); ++k) {
            if (!seen.emplace(records_[k].project, records_[k].id).second)
                throw ParseError(0, "duplicate commit " + records_[k].project.str() + "@" +
                                        records_[k].id);
            for (const auto& t : tokens(records_[k].message)) postings_[t].push_back(k);
        }
    }

    /// Record positions whose message contains any of `query` tokens.
    std::set<std::size_t> any_of(const std::set<std::string>& query) const {
        std::set<std::size_t> hits;
        for (const auto& t : query)
            if (auto it = postings_.find(t); it != postings_.end())
                hits.insert(it->second.begin(), it->second.end());
        return hits;
    }

    const std::vector<CommitRecord>& records() const noexcept { return records_; }
    std::size_t vocabulary_size() const noexcept { return postings_.size(); }
    bool empty() const noexcept { return records_.empty(); }

private:
    std::vector<CommitRecord> records_;
    std::map<std::string, std::vector<std::size_t>> postings_;
};

inline LogIndex index_logs(std::istream& in) { return LogIndex(read_commit_log(in)); }

inline LogIndex index_logs(const std::string& text) {
    std::istringstream in(text);
    return index_logs(in);
}

/// Tokens of a rule endpoint; for "group:artifact" names only the artifact counts.
inline std::set<std::string> name_tokens(const std::string& name) {
    const auto sep = name.find(':');
    return tokens(sep == std::string::npos ? name : name.substr(sep + 1));
}

/// Records mentioning both the source and the target, newest first.
inline std::vector<CommitRecord> search(const MigrationRule& rule, const LogIndex& index) {
    const auto src = index.any_of(name_tokens(rule.source));
    const auto tgt = index.any_of(name_tokens(rule.target));
    std::vector<CommitRecord> out;
    for (auto k : src)
        if (tgt.count(k)) out.push_back(index.records()[k]);
    std::sort(out.begin(), out.end(), [](const CommitRecord& a, const CommitRecord& b) {
        if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
        return std::tie(a.project, a.id) < std::tie(b.project, b.id);
    });
    return out;
}

}  // namespace migmine

#endif  // MIGMINE_LOGLENS_HPP
