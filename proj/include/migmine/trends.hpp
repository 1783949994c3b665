#ifndef MIGMINE_TRENDS_HPP
#define MIGMINE_TRENDS_HPP

// Usage trends and statistics: introductions, popularity series,
// migration-time series, decile groups, the chi-squared test and
// migration-effort distributions.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "migmine/csv.hpp"
#include "migmine/loglens.hpp"
#include "migmine/model.hpp"
#include "migmine/time.hpp"

namespace migmine {

class TooFewValues : public Error {
public:
    using Error::Error;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Matches a library by artifact name or by full "group:artifact".
inline bool names_library(const std::string& name, const LibraryId& lib) {
    return lib.artifact() == name || (name.find(':') != std::string::npos && lib.str() == name);
}

inline bool uses(const Snapshot& s, const std::string& name) {
    return std::any_of(s.dependencies.begin(), s.dependencies.end(),
                       [&](const LibraryId& l) { return names_library(name, l); });
}

/// Absent -> present transitions; presence at the first snapshot counts.
inline std::size_t introductions(const DependencyHistory& history, const std::string& library) {
    std::size_t n = 0;
    bool present = false;
    for (const auto& s : history.snapshots()) {
        const bool now = uses(s, library);
        if (now && !present) ++n;
        present = now;
    }
    return n;
}

inline std::size_t introductions(const std::vector<DependencyHistory>& histories,
                                 const std::set<std::string>& libraries) {
    std::size_t n = 0;
    for (const auto& h : histories)
        for (const auto& l : libraries) n += introductions(h, l);
    return n;
}

// ---------------------------------------------------------------------------
// Popularity evolution

struct PopularitySeries {
    std::string library;
    std::vector<std::pair<Timestamp, std::size_t>> buckets;  // (bucket start, clients)
};

struct Period {
    Timestamp start;
    Timestamp end;
};

/// Clients per library at each bucket start: projects whose latest snapshot
/// at or before the bucket start uses the library. The period defaults to
/// the corpus' first and last timestamps.
inline std::vector<PopularitySeries> popularity_series(const std::vector<DependencyHistory>& histories,
                                                       const std::vector<std::string>& category,
                                                       int bucket_days = 14,
                                                       std::optional<Period> period = std::nullopt) {
    if (bucket_days < 1) throw Error("bucket width must be at least one day");
    std::vector<PopularitySeries> out;
    if (category.empty()) return out;
    if (!period) {
        Timestamp lo = std::numeric_limits<Timestamp>::max(), hi = std::numeric_limits<Timestamp>::min();
        for (const auto& h : histories)
            for (const auto& s : h.snapshots()) {
                lo = std::min(lo, s.timestamp);
                hi = std::max(hi, s.timestamp);
            }
        period = lo <= hi ? Period{lo, hi} : Period{0, -1};
    }
    const Timestamp width = static_cast<Timestamp>(bucket_days) * 86400;
    std::vector<Timestamp> starts;
    for (Timestamp t = period->start; t <= period->end; t += width) starts.push_back(t);

    for (const auto& lib : category) {
        PopularitySeries series{lib, {}};
        std::vector<std::size_t> counts(starts.size(), 0);
        for (const auto& h : histories) {
            const auto& snaps = h.snapshots();
            std::size_t next = 0;  // first snapshot after the bucket start
            for (std::size_t b = 0; b < starts.size(); ++b) {
                while (next < snaps.size() && snaps[next].timestamp <= starts[b]) ++next;
                if (next > 0 && uses(snaps[next - 1], lib)) ++counts[b];
            }
        }
        for (std::size_t b = 0; b < starts.size(); ++b) series.buckets.emplace_back(starts[b], counts[b]);
        out.push_back(std::move(series));
    }
    return out;
}

inline void write_series_csv(std::ostream& out, const PopularitySeries& series) {
    out << "bucket_start,count\n";
    for (const auto& [t, n] : series.buckets) out << t << ',' << n << '\n';
}

// ---------------------------------------------------------------------------
// Migration times

enum class TimeSide { From, To };

/// Migration timestamps per artifact-level rule, ascending.
inline std::map<MigrationRule, std::vector<Timestamp>> migration_times(
    const std::vector<Migration>& migrations, TimeSide side = TimeSide::To) {
    std::map<MigrationRule, std::vector<Timestamp>> out;
    for (const auto& m : migrations)
        out[{m.source.artifact(), m.target.artifact()}].push_back(
            side == TimeSide::To ? m.to_time : m.from_time);
    for (auto& [_, times] : out) std::sort(times.begin(), times.end());
    return out;
}

inline void write_migration_times_csv(std::ostream& out,
                                      const std::map<MigrationRule, std::vector<Timestamp>>& times) {
    out << "rule,timestamp\n";
    for (const auto& [rule, ts] : times)
        for (auto t : ts) out << csv::field(rule.source + "->" + rule.target) << ',' << t << '\n';
}

// ---------------------------------------------------------------------------
// Deciles and the chi-squared test

/// bound_k is the smallest value v with at least k/10 of the values <= v.
inline std::array<double, 10> deciles(std::vector<double> values) {
    if (values.size() < 10) throw TooFewValues("deciles need at least 10 values");
    std::sort(values.begin(), values.end());
    std::array<double, 10> bounds{};
    const auto n = values.size();
    for (std::size_t k = 1; k <= 10; ++k) bounds[k - 1] = values[(k * n + 9) / 10 - 1];
    return bounds;
}

/// 1-based group of `value`: the first decile whose bound is >= value.
inline std::size_t decile_group(const std::array<double, 10>& bounds, double value) {
    for (std::size_t k = 0; k < bounds.size(); ++k)
        if (value <= bounds[k]) return k + 1;
    return bounds.size();
}

/// Regularized upper incomplete gamma Q(a, x): power series for
/// x < a + 1, modified Lentz continued fraction otherwise.
inline double regularized_gamma_q(double a, double x) {
    if (a <= 0.0) throw Error("gamma shape must be positive");
    if (x <= 0.0) return 1.0;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    constexpr double eps = 1e-16;
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term, ap = a;
        for (int n = 0; n < 10000; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * eps) break;
        }
        return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < eps) break;
    }
    return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

inline double chi_squared_sf(double statistic, std::size_t df) {
    return regularized_gamma_q(static_cast<double>(df) / 2.0, statistic / 2.0);
}

struct ChiSquaredResult {
    double statistic = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
};

/// Goodness of fit of per-group counts against proportions given by group
/// sizes: expected_i = sum(observed) * size_i / sum(size).
inline ChiSquaredResult chi_squared(const std::vector<double>& observed,
                                    const std::vector<double>& group_sizes) {
    if (observed.size() < 2 || observed.size() != group_sizes.size())
        throw DegenerateInput("need >= 2 groups with one size per group");
    double total_obs = 0.0, total_size = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        if (!(group_sizes[k] > 0.0)) throw DegenerateInput("group sizes must be positive");
        if (observed[k] < 0.0) throw DegenerateInput("observed counts must be non-negative");
        total_obs += observed[k];
        total_size += group_sizes[k];
    }
    if (!(total_obs > 0.0)) throw DegenerateInput("no observations");
    ChiSquaredResult r;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        const double expected = total_obs * group_sizes[k] / total_size;
        r.statistic += (observed[k] - expected) * (observed[k] - expected) / expected;
    }
    r.df = observed.size() - 1;
    r.p_value = chi_squared_sf(r.statistic, r.df);
    return r;
}

/// Pearson test on the 2 x k table (hits, size - hits) per group.
inline ChiSquaredResult chi_squared_contingency(const std::vector<double>& hits,
                                                const std::vector<double>& group_sizes) {
    if (hits.size() < 2 || hits.size() != group_sizes.size())
        throw DegenerateInput("need >= 2 groups with one size per group");
    double total_hits = 0.0, total = 0.0;
    for (std::size_t k = 0; k < hits.size(); ++k) {
        if (!(group_sizes[k] > 0.0) || hits[k] < 0.0 || hits[k] > group_sizes[k])
            throw DegenerateInput("each group needs 0 <= hits <= size and size > 0");
        total_hits += hits[k];
        total += group_sizes[k];
    }
    if (!(total_hits > 0.0) || !(total_hits < total)) throw DegenerateInput("a table row is empty");
    ChiSquaredResult r;
    for (std::size_t k = 0; k < hits.size(); ++k) {
        const double e1 = group_sizes[k] * total_hits / total;
        const double e0 = group_sizes[k] - e1;
        const double o0 = group_sizes[k] - hits[k];
        r.statistic += (hits[k] - e1) * (hits[k] - e1) / e1 + (o0 - e0) * (o0 - e0) / e0;
    }
    r.df = hits.size() - 1;
    r.p_value = chi_squared_sf(r.statistic, r.df);
    return r;
}

// ---------------------------------------------------------------------------
// Migration effort

struct EffortRecord {
    Migration migration;
    std::size_t n_commits = 1;
    std::size_t n_days = 1;
    std::size_t n_authors = 1;
};

/// Commits of the migrating project inside (from_time, to_time]. An empty
/// window counts as one commit, one day, one author.
inline EffortRecord effort(const Migration& migration, const std::vector<CommitRecord>& commits) {
    std::size_t n = 0;
    std::set<std::int64_t> days;
    std::set<std::string> authors;
    for (const auto& c : commits) {
        if (c.project != migration.project) continue;
        if (c.timestamp <= migration.from_time || c.timestamp > migration.to_time) continue;
        ++n;
        days.insert(utc_day(c.timestamp));
        authors.insert(c.author);
    }
    if (n == 0) return {migration, 1, 1, 1};
    return {migration, n, days.size(), authors.size()};
}

/// Percentages of records per value 1..9 and >= 10, one row per dimension.
struct EffortTable {
    std::array<double, 10> commits{};
    std::array<double, 10> days{};
    std::array<double, 10> authors{};
};

inline EffortTable effort_distribution(const std::vector<EffortRecord>& records) {
    if (records.empty()) throw Error("effort distribution needs at least one record");
    EffortTable t;
    auto bucket = [](std::size_t v) { return std::min<std::size_t>(std::max<std::size_t>(v, 1), 10) - 1; };
    for (const auto& r : records) {
        t.commits[bucket(r.n_commits)] += 1;
        t.days[bucket(r.n_days)] += 1;
        t.authors[bucket(r.n_authors)] += 1;
    }
    const double scale = 100.0 / static_cast<double>(records.size());
    for (auto* row : {&t.commits, &t.days, &t.authors})
        for (auto& v : *row) v *= scale;
    return t;
}

inline void write_effort_csv(std::ostream& out, const EffortTable& t) {
    out << "dimension,1,2,3,4,5,6,7,8,9,>=10\n";
    auto row = [&](const char* name, const std::array<double, 10>& v) {
        out << name;
        for (double x : v) out << ',' << csv::fixed(x, 1);
        out << '\n';
    };
    row("commits", t.commits);
    row("days", t.days);
    row("authors", t.authors);
}

// ---------------------------------------------------------------------------
// SVG charts (axes, polylines, points; no external renderer)

namespace detail {

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

inline std::string date_label(Timestamp t) { return format_iso8601(t).substr(0, 10); }

}  // namespace detail

/// Line chart of popularity series sharing one time axis.
inline std::string render_series_svg(const std::vector<PopularitySeries>& series,
                                     const std::string& title) {
    constexpr double W = 720, H = 400, L = 60, R = 160, T = 40, B = 50;
    Timestamp t0 = 0, t1 = 1;
    std::size_t ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (const auto& [t, n] : s.buckets) {
            if (first) t0 = t1 = t, first = false;
            t0 = std::min(t0, t);
            t1 = std::max(t1, t);
            ymax = std::max(ymax, n);
        }
    if (t1 == t0) t1 = t0 + 1;
    auto x = [&](Timestamp t) { return L + (W - L - R) * static_cast<double>(t - t0) / static_cast<double>(t1 - t0); };
    auto y = [&](std::size_t n) { return H - B - (H - T - B) * static_cast<double>(n) / static_cast<double>(ymax); };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
      << detail::svg_escape(title) << "</text>\n";
    o << "<polyline fill=\"none\" stroke=\"black\" points=\"" << L << ',' << T << ' ' << L << ','
      << H - B << ' ' << W - R << ',' << H - B << "\"/>\n";
    o << "<text x=\"" << L << "\" y=\"" << H - B + 20 << "\" font-size=\"11\">" << detail::date_label(t0) << "</text>\n";
    o << "<text x=\"" << W - R << "\" y=\"" << H - B + 20 << "\" font-size=\"11\" text-anchor=\"end\">"
      << detail::date_label(t1) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << ymax << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" font-size=\"11\" text-anchor=\"end\">0</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto* color = detail::kPalette[k % std::size(detail::kPalette)];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [t, n] : series[k].buckets) o << csv::fixed(x(t), 1) << ',' << csv::fixed(y(n), 1) << ' ';
        o << "\"/>\n";
        o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" font-size=\"12\" fill=\""
          << color << "\">" << detail::svg_escape(series[k].library) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

/// Scatter of migration timestamps, one row per rule.
inline std::string render_migration_times_svg(
    const std::map<MigrationRule, std::vector<Timestamp>>& times, const std::string& title) {
    constexpr double W = 720, L = 220, R = 20, T = 40, B = 50, row_h = 28;
    const double H = T + B + row_h * static_cast<double>(std::max<std::size_t>(times.size(), 1));
    Timestamp t0 = 0, t1 = 1;
    bool first = true;
    for (const auto& [_, ts] : times)
        for (auto t : ts) {
            if (first) t0 = t1 = t, first = false;
            t0 = std::min(t0, t);
            t1 = std::max(t1, t);
        }
    if (t1 == t0) t1 = t0 + 1;
    auto x = [&](Timestamp t) { return L + (W - L - R) * static_cast<double>(t - t0) / static_cast<double>(t1 - t0); };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<text x=\"20\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << detail::svg_escape(title) << "</text>\n";
    o << "<polyline fill=\"none\" stroke=\"black\" points=\"" << L << ',' << T << ' ' << L << ','
      << H - B << ' ' << W - R << ',' << H - B << "\"/>\n";
    o << "<text x=\"" << L << "\" y=\"" << H - B + 20 << "\" font-size=\"11\">" << detail::date_label(t0) << "</text>\n";
    o << "<text x=\"" << W - R << "\" y=\"" << H - B + 20 << "\" font-size=\"11\" text-anchor=\"end\">"
      << detail::date_label(t1) << "</text>\n";
    std::size_t row = 0;
    for (const auto& [rule, ts] : times) {
        const double y = T + row_h * (static_cast<double>(row) + 0.5);
        o << "<text x=\"" << L - 8 << "\" y=\"" << y + 4 << "\" font-size=\"12\" text-anchor=\"end\">"
          << detail::svg_escape(rule.source + " -> " + rule.target) << "</text>\n";
        for (auto t : ts)
            o << "<circle cx=\"" << csv::fixed(x(t), 1) << "\" cy=\"" << y << "\" r=\"4\" fill=\""
              << detail::kPalette[row % std::size(detail::kPalette)] << "\"/>\n";
        ++row;
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace migmine

#endif  // MIGMINE_TRENDS_HPP
