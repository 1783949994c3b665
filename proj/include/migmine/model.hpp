#ifndef MIGMINE_MODEL_HPP
#define MIGMINE_MODEL_HPP

// Core domain types: libraries, projects, dependency histories, migrations
// and migration rules.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace migmine {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedCoordinate : public Error {
public:
    using Error::Error;
};

class InvalidHistory : public Error {
public:
    using Error::Error;
};

/// A parse failure in one of the line-oriented formats. `line` is 1-based,
/// 0 when the failure is not attached to a line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

using Timestamp = std::int64_t;  // UTC seconds

namespace detail {

inline std::pair<std::string, std::string> split_coordinate(std::string_view text,
                                                            std::string_view what) {
    const auto sep = text.find(':');
    if (sep == std::string_view::npos || text.find(':', sep + 1) != std::string_view::npos)
        throw MalformedCoordinate("malformed " + std::string(what) + " '" + std::string(text) +
                                  "': expected exactly one ':'");
    auto first = text.substr(0, sep);
    auto second = text.substr(sep + 1);
    if (first.empty() || second.empty())
        throw MalformedCoordinate("malformed " + std::string(what) + " '" + std::string(text) +
                                  "': empty part");
    return {std::string(first), std::string(second)};
}

inline void check_part(const std::string& part, std::string_view what) {
    if (part.empty()) throw MalformedCoordinate(std::string(what) + " must not be empty");
    if (part.find(':') != std::string::npos)
        throw MalformedCoordinate(std::string(what) + " must not contain ':' ('" + part + "')");
}

}  // namespace detail

/// A library coordinate, rendered "group:artifact".
class LibraryId {
public:
    LibraryId(std::string group, std::string artifact)
        : group_(std::move(group)), artifact_(std::move(artifact)) {
        detail::check_part(group_, "library group");
        detail::check_part(artifact_, "library artifact");
    }

    const std::string& group() const noexcept { return group_; }
    const std::string& artifact() const noexcept { return artifact_; }
    std::string str() const { return group_ + ":" + artifact_; }

    friend auto operator<=>(const LibraryId&, const LibraryId&) = default;
    friend bool operator==(const LibraryId&, const LibraryId&) = default;

private:
    std::string group_;
    std::string artifact_;
};

inline LibraryId parse_library_id(std::string_view text) {
    auto [group, artifact] = detail::split_coordinate(text, "library coordinate");
    return LibraryId(std::move(group), std::move(artifact));
}

/// A project, rendered "owner:name". The owner is what g(m) deduplicates on.
class ProjectId {
public:
    ProjectId(std::string owner, std::string name)
        : owner_(std::move(owner)), name_(std::move(name)) {
        detail::check_part(owner_, "project owner");
        detail::check_part(name_, "project name");
    }

    const std::string& owner() const noexcept { return owner_; }
    const std::string& name() const noexcept { return name_; }
    std::string str() const { return owner_ + ":" + name_; }

    friend auto operator<=>(const ProjectId&, const ProjectId&) = default;
    friend bool operator==(const ProjectId&, const ProjectId&) = default;

private:
    std::string owner_;
    std::string name_;
};

inline ProjectId parse_project_id(std::string_view text) {
    auto [owner, name] = detail::split_coordinate(text, "project id");
    return ProjectId(std::move(owner), std::move(name));
}

using LibrarySet = std::set<LibraryId>;

struct Snapshot {
    std::size_t index = 1;  // 1-based position in the history
    Timestamp timestamp = 0;
    LibrarySet dependencies;

    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// Ordered snapshots of one project's dependency set. Indices strictly
/// increase and timestamps never decrease; the constructor enforces both.
class DependencyHistory {
public:
    DependencyHistory(ProjectId project, std::vector<Snapshot> snapshots)
        : project_(std::move(project)), snapshots_(std::move(snapshots)) {
        for (std::size_t k = 0; k < snapshots_.size(); ++k) {
            if (snapshots_[k].index < 1)
                throw InvalidHistory(project_.str() + ": snapshot index must be >= 1");
            if (k == 0) continue;
            if (snapshots_[k].index <= snapshots_[k - 1].index)
                throw InvalidHistory(project_.str() + ": snapshot indices must strictly increase");
            if (snapshots_[k].timestamp < snapshots_[k - 1].timestamp)
                throw InvalidHistory(project_.str() + ": snapshot timestamps must not decrease");
        }
    }

    const ProjectId& project() const noexcept { return project_; }
    const std::vector<Snapshot>& snapshots() const noexcept { return snapshots_; }
    std::size_t size() const noexcept { return snapshots_.size(); }

    /// Snapshot with the given index, or nullptr.
    const Snapshot* find(std::size_t index) const {
        auto it = std::lower_bound(snapshots_.begin(), snapshots_.end(), index,
                                   [](const Snapshot& s, std::size_t i) { return s.index < i; });
        return it != snapshots_.end() && it->index == index ? &*it : nullptr;
    }

    friend bool operator==(const DependencyHistory&, const DependencyHistory&) = default;

private:
    ProjectId project_;
    std::vector<Snapshot> snapshots_;
};

/// A project replacing `source` with `target` between two observed versions.
struct Migration {
    ProjectId project;
    std::size_t from_index;
    std::size_t to_index;
    Timestamp from_time;
    Timestamp to_time;
    LibraryId source;
    LibraryId target;

    friend auto operator<=>(const Migration&, const Migration&) = default;
    friend bool operator==(const Migration&, const Migration&) = default;
};

/// A directed (source, target) pair. `Name` is LibraryId before merging and
/// a plain artifact name afterwards.
template <class Name>
struct BasicRule {
    Name source;
    Name target;

    friend auto operator<=>(const BasicRule&, const BasicRule&) = default;
    friend bool operator==(const BasicRule&, const BasicRule&) = default;
};

using CoordinateRule = BasicRule<LibraryId>;
using MigrationRule = BasicRule<std::string>;

inline std::string name_of(const LibraryId& lib) { return lib.str(); }
inline const std::string& name_of(const std::string& name) { return name; }

template <class Name>
std::string to_string(const BasicRule<Name>& rule) {
    return name_of(rule.source) + " -> " + name_of(rule.target);
}

/// Accumulated evidence for one rule: r(m) as `occurrences`, g(m) as
/// `owners`, the SCORE entry as `score`.
struct RuleStats {
    std::set<ProjectId> occurrences;
    std::set<std::string> owners;
    std::size_t score = 0;

    RuleStats& operator+=(const RuleStats& other) {
        occurrences.insert(other.occurrences.begin(), other.occurrences.end());
        owners.insert(other.owners.begin(), other.owners.end());
        score += other.score;
        return *this;
    }

    friend bool operator==(const RuleStats&, const RuleStats&) = default;
};

enum class Verdict { Seed, Banned, Unknown };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Seed: return "seed";
        case Verdict::Banned: return "banned";
        case Verdict::Unknown: return "unknown";
    }
    return "unknown";
}

}  // namespace migmine

#endif  // MIGMINE_MODEL_HPP
