#ifndef MIGMINE_SYNTH_HPP
#define MIGMINE_SYNTH_HPP

// Synthetic corpora with planted migrations, and the precision/recall
// harness that scores the miner against them.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "migmine/csv.hpp"
#include "migmine/ingest.hpp"
#include "migmine/loglens.hpp"
#include "migmine/mining.hpp"
#include "migmine/model.hpp"

namespace migmine {

struct SynthConfig {
    std::size_t n_projects = 100;
    std::size_t n_snapshots = 50;
    std::size_t n_libraries = 40;
    double migration_rate = 0.02;     // per project and transition
    double alias_rate = 0.0;          // fraction of libraries with a second groupId
    double loopback_rate = 0.0;       // chance a migration is later undone
    double bounce_rate = 0.0;         // chance a migration is followed by a second hop
    double cohabitation_rate = 0.0;   // chance old and new library overlap 1-3 snapshots
    double decoy_rate = 0.0;          // per transition, unrelated add or drop
    std::uint64_t rng_seed = 42;

    void validate() const {
        for (double p : {migration_rate, alias_rate, loopback_rate, bounce_rate, cohabitation_rate, decoy_rate})
            if (!(p >= 0.0 && p <= 1.0)) throw Error("synth rates must lie in [0,1]");
        if (n_libraries < 2) throw Error("synth needs at least 2 libraries");
    }
};

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("n_projects", c.n_projects);
    get("n_snapshots", c.n_snapshots);
    get("n_libraries", c.n_libraries);
    get("migration_rate", c.migration_rate);
    get("alias_rate", c.alias_rate);
    get("loopback_rate", c.loopback_rate);
    get("bounce_rate", c.bounce_rate);
    get("cohabitation_rate", c.cohabitation_rate);
    get("decoy_rate", c.decoy_rate);
    get("rng_seed", c.rng_seed);
    c.validate();
    return c;
}

inline nlohmann::json to_json(const SynthConfig& c) {
    return {{"n_projects", c.n_projects},       {"n_snapshots", c.n_snapshots},
            {"n_libraries", c.n_libraries},     {"migration_rate", c.migration_rate},
            {"alias_rate", c.alias_rate},       {"loopback_rate", c.loopback_rate},
            {"bounce_rate", c.bounce_rate},     {"cohabitation_rate", c.cohabitation_rate},
            {"decoy_rate", c.decoy_rate},       {"rng_seed", c.rng_seed}};
}

enum class PlantShape { Single, Cohabiting, LoopbackReturn, BounceHop };

/// A planted migration plus what the miss-case bucketing needs: where the
/// source run started and where the target run ended (0 = kept to the end).
struct PlantedMigration {
    Migration migration;
    PlantShape shape = PlantShape::Single;
    std::size_t introduced = 1;
    std::size_t retired = 0;
};

struct DecoyEvent {
    ProjectId project;
    std::size_t index;  // first snapshot showing the change
    LibraryId library;
    bool added;
};

struct GroundTruth {
    std::vector<PlantedMigration> planted;
    std::vector<DecoyEvent> decoys;
    std::map<ProjectId, std::size_t> lengths;  // snapshots per project

    std::vector<Migration> migrations() const {
        std::vector<Migration> out;
        for (const auto& p : planted) out.push_back(p.migration);
        return out;
    }
};

struct SynthCorpus {
    std::vector<DependencyHistory> histories;
    GroundTruth truth;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr Timestamp kSynthEpoch = 1262304000;  // 2010-01-01
inline constexpr Timestamp kSynthWeek = 7 * 86400;

inline std::string padded(const char* prefix, std::size_t n, std::size_t width = 4) {
    auto digits = std::to_string(n);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return prefix + digits;
}

inline LibraryId synth_library(std::size_t k, bool alias = false) {
    const auto name = "lib" + std::to_string(k);
    return LibraryId((alias ? "com." : "org.") + name, name);
}

inline LibraryId decoy_library(std::size_t k) {
    const auto name = "extra" + std::to_string(k);
    return LibraryId("net." + name, name);
}

struct ScheduledMove {
    std::size_t slot;
    std::size_t target_lib;       // category library to switch to
    PlantShape shape;
    bool removal_only = false;    // second half of a cohabiting migration
};

class ProjectGenerator {
public:
    ProjectGenerator(const SynthConfig& cfg, const std::set<std::size_t>& aliased, std::size_t index)
        : cfg_(cfg), aliased_(aliased), rng_(splitmix64(cfg.rng_seed ^ splitmix64(index))),
          project_(padded("owner", index / 3), padded("proj", index)) {}

    void run(std::vector<DependencyHistory>& histories, GroundTruth& truth) {
        const std::size_t n_cat = std::max<std::size_t>(1, cfg_.n_libraries / 5);
        const std::size_t n_slots = std::min<std::size_t>(n_cat, 3);
        std::vector<std::size_t> cats(n_cat);
        for (std::size_t c = 0; c < n_cat; ++c) cats[c] = c;
        std::shuffle(cats.begin(), cats.end(), rng_);
        for (std::size_t s = 0; s < n_slots; ++s) {
            Slot slot;
            slot.category = cats[s];
            slot.lib = pick_in_category(slot.category, std::nullopt);
            slot.id = synth_library(slot.lib);
            slots_.push_back(slot);
        }
        const Timestamp t0 = kSynthEpoch + static_cast<Timestamp>(std::uniform_int_distribution<int>(0, 86399)(rng_));
        const std::size_t n = cfg_.n_snapshots;
        std::vector<Snapshot> snaps;
        snaps.reserve(n);
        if (n >= 1) snaps.push_back({1, t0, current_deps()});
        for (std::size_t k = 1; k < n; ++k) {
            step(k, truth);
            snaps.push_back({k + 1, t0 + static_cast<Timestamp>(k) * kSynthWeek, current_deps()});
        }
        for (auto& p : truth.planted)
            if (p.migration.project == project_) {
                p.migration.from_time = snaps[p.migration.from_index - 1].timestamp;
                p.migration.to_time = snaps[p.migration.to_index - 1].timestamp;
            }
        truth.lengths[project_] = n;
        histories.emplace_back(project_, std::move(snaps));
    }

private:
    struct Slot {
        std::size_t category = 0;
        std::size_t lib = 0;
        LibraryId id = synth_library(0);
        std::size_t since = 1;                       // index where `id` entered the slot
        std::optional<std::size_t> planted_in;        // truth entry that brought `id`
        std::optional<LibraryId> cohabitant;          // old library still present
        std::size_t locked_until = 0;                 // transitions <= this are reserved
    };

    bool chance(double p) { return p > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

    std::size_t pick_in_category(std::size_t category, std::optional<std::size_t> avoid) {
        const std::size_t n_cat = std::max<std::size_t>(1, cfg_.n_libraries / 5);
        std::vector<std::size_t> members;
        for (std::size_t l = category; l < cfg_.n_libraries; l += n_cat)
            if (!avoid || l != *avoid) members.push_back(l);
        if (members.empty()) return avoid.value_or(category);
        return members[std::uniform_int_distribution<std::size_t>(0, members.size() - 1)(rng_)];
    }

    LibrarySet current_deps() const {
        LibrarySet deps(extras_.begin(), extras_.end());
        for (const auto& s : slots_) {
            deps.insert(s.id);
            if (s.cohabitant) deps.insert(*s.cohabitant);
        }
        return deps;
    }

    // Replaces the slot's library; `to_index` is the first snapshot showing the change.
    void plant(std::size_t slot_no, std::size_t target, PlantShape shape, std::size_t from_index,
               std::size_t to_index, GroundTruth& truth) {
        auto& slot = slots_[slot_no];
        if (slot.planted_in) truth.planted[*slot.planted_in].retired = to_index;
        truth.planted.push_back({Migration{project_, from_index, to_index, 0, 0, slot.id, synth_library(target)},
                                 shape, slot.since, 0});
        slot.planted_in = truth.planted.size() - 1;
        slot.lib = target;
        slot.id = synth_library(target);
    }

    // Transition k: snapshot k -> snapshot k+1.
    void step(std::size_t k, GroundTruth& truth) {
        const std::size_t last_transition = cfg_.n_snapshots - 1;
        if (auto it = scheduled_.find(k); it != scheduled_.end()) {
            const auto move = it->second;
            scheduled_.erase(it);
            auto& slot = slots_[move.slot];
            if (move.removal_only) {
                slot.cohabitant.reset();
                return;
            }
            plant(move.slot, move.target_lib, move.shape, k, k + 1, truth);
            slot.since = k + 1;
            return;
        }
        std::vector<std::size_t> free;
        for (std::size_t s = 0; s < slots_.size(); ++s)
            if (slots_[s].locked_until < k) free.push_back(s);

        if (!free.empty() && chance(cfg_.migration_rate)) {
            const auto s = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng_)];
            auto& slot = slots_[s];
            const auto source_lib = slot.lib;
            const auto target = pick_in_category(slot.category, source_lib);
            if (target == source_lib) return;
            const std::size_t gap = std::uniform_int_distribution<std::size_t>(1, 3)(rng_);
            std::size_t busy_until = k;
            if (chance(cfg_.cohabitation_rate) && k + gap <= last_transition && !scheduled_.count(k + gap)) {
                // Target joins now; the source leaves `gap` transitions later.
                const auto old = slot.id;
                plant(s, target, PlantShape::Cohabiting, k, k + gap + 1, truth);
                slot.cohabitant = old;
                slot.since = k + 1;
                scheduled_[k + gap] = {s, target, PlantShape::Cohabiting, true};
                busy_until = k + gap;
            } else {
                plant(s, target, PlantShape::Single, k, k + 1, truth);
                slot.since = k + 1;
            }
            // Follow-up hop back to the source, or on to a third library.
            const std::size_t delay = std::uniform_int_distribution<std::size_t>(2, 5)(rng_);
            const std::size_t when = busy_until + delay;
            if (when <= last_transition && !scheduled_.count(when)) {
                if (chance(cfg_.loopback_rate)) {
                    scheduled_[when] = {s, source_lib, PlantShape::LoopbackReturn};
                    busy_until = when;
                } else if (chance(cfg_.bounce_rate)) {
                    const auto third = pick_in_category(slot.category, target);
                    if (third != source_lib && third != target) {
                        scheduled_[when] = {s, third, PlantShape::BounceHop};
                        busy_until = when;
                    }
                }
            }
            slot.locked_until = busy_until;
            return;
        }

        if (chance(cfg_.decoy_rate)) {
            const bool add = extras_.empty() || chance(0.5);
            if (add) {
                const auto lib = decoy_library(std::uniform_int_distribution<std::size_t>(0, 9)(rng_));
                if (extras_.insert(lib).second) truth.decoys.push_back({project_, k + 1, lib, true});
            } else {
                auto it = extras_.begin();
                std::advance(it, std::uniform_int_distribution<std::size_t>(0, extras_.size() - 1)(rng_));
                truth.decoys.push_back({project_, k + 1, *it, false});
                extras_.erase(it);
            }
            return;
        }

        // Alias noise: the same library under its second groupId.
        for (auto s : free) {
            auto& slot = slots_[s];
            if (aliased_.count(slot.lib) && !slot.cohabitant && chance(0.05)) {
                const bool to_alias = slot.id.group() != synth_library(slot.lib, true).group();
                slot.id = synth_library(slot.lib, to_alias);
                return;
            }
        }
    }

    const SynthConfig& cfg_;
    const std::set<std::size_t>& aliased_;
    std::mt19937_64 rng_;
    ProjectId project_;
    std::vector<Slot> slots_;
    LibrarySet extras_;
    std::map<std::size_t, ScheduledMove> scheduled_;
};

}  // namespace detail

/// Deterministic in `config.rng_seed`; each project draws from its own
/// sub-seed, so one project's shape does not depend on the others.
inline SynthCorpus generate(const SynthConfig& config) {
    config.validate();
    SynthCorpus corpus;
    std::set<std::size_t> aliased;
    std::mt19937_64 lib_rng(detail::splitmix64(config.rng_seed));
    for (std::size_t l = 0; l < config.n_libraries; ++l)
        if (config.alias_rate > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(lib_rng) < config.alias_rate)
            aliased.insert(l);
    if (config.n_snapshots == 0) return corpus;
    for (std::size_t p = 0; p < config.n_projects; ++p)
        detail::ProjectGenerator(config, aliased, p).run(corpus.histories, corpus.truth);
    return corpus;
}

inline void write_synth_log(std::ostream& out, const SynthCorpus& corpus, const SynthConfig& config) {
    out << "# synth " << to_json(config).dump() << '\n';
    write_snapshot_log(out, corpus.histories);
}

/// One commit per transition at the later snapshot's timestamp; planted
/// migrations get a message naming both libraries.
inline std::vector<CommitRecord> synth_commits(const SynthCorpus& corpus, std::uint64_t seed) {
    std::map<std::pair<ProjectId, std::size_t>, const Migration*> by_to;
    for (const auto& p : corpus.truth.planted) by_to[{p.migration.project, p.migration.to_index}] = &p.migration;
    std::vector<CommitRecord> out;
    for (const auto& h : corpus.histories) {
        std::mt19937_64 rng(detail::splitmix64(seed ^ std::hash<std::string>{}(h.project().str())));
        for (std::size_t k = 1; k < h.size(); ++k) {
            const auto& snap = h.snapshots()[k];
            CommitRecord c{h.project(), "c" + std::to_string(snap.index), snap.timestamp,
                           "dev" + std::to_string(std::uniform_int_distribution<int>(1, 3)(rng)), "Update build"};
            if (auto it = by_to.find({h.project(), snap.index}); it != by_to.end())
                c.message = "Replace " + it->second->source.artifact() + " with " + it->second->target.artifact();
            out.push_back(std::move(c));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

enum class MissCase { SmallDistance, LateIntroduction, EarlyDrop, Composite, Loopback, Other };

inline std::string_view to_string(MissCase c) {
    switch (c) {
        case MissCase::SmallDistance: return "small-distance";
        case MissCase::LateIntroduction: return "late-introduction";
        case MissCase::EarlyDrop: return "early-drop";
        case MissCase::Composite: return "composite";
        case MissCase::Loopback: return "loopback";
        case MissCase::Other: return "other";
    }
    return "?";
}

struct Evaluation {
    double precision = 1.0;
    double recall = 1.0;
    bool zero_support = false;  // nothing mined, or nothing planted
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t found = 0;      // planted migrations matched by some mined one
    std::size_t planted = 0;
    std::map<MissCase, std::size_t> misses;
    std::vector<Migration> composites;  // false positives chaining planted hops
};

namespace detail {

inline bool same_move(const Migration& a, const Migration& b) {
    return a.project == b.project && a.source == b.source && a.target == b.target;
}

inline bool overlaps(const Migration& mined, const Migration& planted) {
    return mined.from_index < planted.to_index && planted.from_index < mined.to_index;
}

}  // namespace detail

/// Couple of the sampling scheme containing index window [from, to], if any.
inline std::optional<Couple> enclosing_couple(std::size_t length, std::size_t step, std::size_t from,
                                              std::size_t to) {
    if (length < 2) return std::nullopt;
    std::vector<Snapshot> snaps;
    for (std::size_t k = 1; k <= length; ++k) snaps.push_back({k, 0, {}});
    for (const auto& c : sample_couples(DependencyHistory(ProjectId("x", "y"), std::move(snaps)), step))
        if (c.first <= from && to <= c.second) return c;
    return std::nullopt;
}

/// A mined migration is a true positive when a planted one has the same
/// (project, source, target) and an overlapping index window. Unmatched
/// planted migrations are bucketed by the couple that hid them; `step` is
/// the sampling step the mined list came from.
inline Evaluation evaluate(const std::vector<Migration>& mined, const GroundTruth& truth, std::size_t step) {
    Evaluation ev;
    ev.planted = truth.planted.size();
    std::map<ProjectId, std::vector<std::size_t>> by_project;
    for (std::size_t k = 0; k < truth.planted.size(); ++k)
        by_project[truth.planted[k].migration.project].push_back(k);

    std::vector<bool> matched(truth.planted.size(), false);
    for (const auto& m : mined) {
        bool tp = false;
        if (auto it = by_project.find(m.project); it != by_project.end())
            for (auto k : it->second)
                if (detail::same_move(m, truth.planted[k].migration) &&
                    detail::overlaps(m, truth.planted[k].migration)) {
                    tp = true;
                    matched[k] = true;
                }
        if (tp) {
            ++ev.true_positives;
            continue;
        }
        ++ev.false_positives;
        // x -> y and y -> z both planted inside the mined window.
        if (auto it = by_project.find(m.project); it != by_project.end()) {
            bool composite = false;
            for (auto a : it->second)
                for (auto b : it->second) {
                    const auto& p = truth.planted[a].migration;
                    const auto& q = truth.planted[b].migration;
                    if (p.source == m.source && q.target == m.target && p.target == q.source &&
                        p.to_index <= q.to_index && m.from_index <= p.from_index && q.to_index <= m.to_index)
                        composite = true;
                }
            if (composite) ev.composites.push_back(m);
        }
    }
    ev.found = static_cast<std::size_t>(std::count(matched.begin(), matched.end(), true));

    for (std::size_t k = 0; k < truth.planted.size(); ++k) {
        if (matched[k]) continue;
        const auto& pm = truth.planted[k];
        const auto& m = pm.migration;
        const auto len_it = truth.lengths.find(m.project);
        const std::size_t length = len_it == truth.lengths.end() ? 0 : len_it->second;
        const auto couple = enclosing_couple(length, step, m.from_index, m.to_index);
        MissCase bucket = MissCase::Other;
        if (!couple) {
            bucket = MissCase::SmallDistance;
        } else {
            const auto [i, j] = *couple;
            std::optional<MissCase> chained;
            for (auto other : by_project[m.project]) {
                if (other == k) continue;
                const auto& o = truth.planted[other].migration;
                if (o.from_index < i || o.to_index > j) continue;
                const bool next = o.source == m.target && o.to_index >= m.to_index;
                const bool prev = o.target == m.source && o.to_index <= m.to_index;
                if (next || prev) {
                    const bool back = next ? o.target == m.source : o.source == m.target;
                    chained = back ? MissCase::Loopback : MissCase::Composite;
                    if (back) break;
                }
            }
            if (chained)
                bucket = *chained;
            else if (pm.introduced > i)
                bucket = MissCase::LateIntroduction;
            else if (pm.retired != 0 && pm.retired <= j)
                bucket = MissCase::EarlyDrop;
        }
        ++ev.misses[bucket];
    }

    if (mined.empty() || truth.planted.empty()) ev.zero_support = true;
    if (!mined.empty()) ev.precision = static_cast<double>(ev.true_positives) / static_cast<double>(mined.size());
    if (!truth.planted.empty()) ev.recall = static_cast<double>(ev.found) / static_cast<double>(ev.planted);
    return ev;
}

// ---------------------------------------------------------------------------
// Miss-case fixtures: one project, nine snapshots, one slot.

inline SynthCorpus miss_case_fixture(MissCase which) {
    const ProjectId project("fixture", to_string(which).data());
    const auto base = LibraryId("org.base", "base");
    const auto x = detail::synth_library(1), y = detail::synth_library(2), z = detail::synth_library(3);
    constexpr std::size_t n = 9;
    std::vector<LibrarySet> deps(n + 1, LibrarySet{base});
    auto use = [&](const LibraryId& lib, std::size_t first, std::size_t last) {
        for (std::size_t k = first; k <= last; ++k) deps[k].insert(lib);
    };
    GroundTruth truth;
    auto planted = [&](const LibraryId& s, const LibraryId& t, std::size_t from, std::size_t to,
                       PlantShape shape, std::size_t introduced, std::size_t retired) {
        truth.planted.push_back({Migration{project, from, to, 0, 0, s, t}, shape, introduced, retired});
    };
    switch (which) {
        case MissCase::LateIntroduction:  // source appears after the couple's left end
            use(x, 3, 5);
            use(y, 6, 9);
            planted(x, y, 5, 6, PlantShape::Single, 3, 0);
            break;
        case MissCase::EarlyDrop:  // target gone before the right end
            use(x, 1, 4);
            use(y, 5, 7);
            planted(x, y, 4, 5, PlantShape::Single, 1, 8);
            break;
        case MissCase::Composite:  // x -> y -> z seen as x -> z
            use(x, 1, 3);
            use(y, 4, 6);
            use(z, 7, 9);
            planted(x, y, 3, 4, PlantShape::Single, 1, 7);
            planted(y, z, 6, 7, PlantShape::BounceHop, 4, 0);
            break;
        case MissCase::Loopback:  // x -> y -> x seen as nothing
            use(x, 1, 3);
            use(y, 4, 6);
            use(x, 7, 9);
            planted(x, y, 3, 4, PlantShape::Single, 1, 7);
            planted(y, x, 6, 7, PlantShape::LoopbackReturn, 4, 0);
            break;
        case MissCase::SmallDistance:  // old and new coexist at 4..5
            use(x, 1, 5);
            use(y, 4, 9);
            planted(x, y, 3, 6, PlantShape::Cohabiting, 1, 0);
            break;
        case MissCase::Other:
            throw Error("no fixture for miss case 'other'");
    }
    std::vector<Snapshot> snaps;
    for (std::size_t k = 1; k <= n; ++k)
        snaps.push_back({k, detail::kSynthEpoch + static_cast<Timestamp>(k - 1) * detail::kSynthWeek, deps[k]});
    for (auto& p : truth.planted) {
        p.migration.from_time = snaps[p.migration.from_index - 1].timestamp;
        p.migration.to_time = snaps[p.migration.to_index - 1].timestamp;
    }
    truth.lengths[project] = n;
    SynthCorpus corpus;
    corpus.histories.emplace_back(project, std::move(snaps));
    corpus.truth = std::move(truth);
    return corpus;
}

// ---------------------------------------------------------------------------
// Step sweep

struct SweepRow {
    std::size_t step = 0;
    std::size_t candidates = 0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    double runtime_ms = 0.0;
};

/// Mines the corpus once per step (no knowledge filtering) and scores the
/// candidates. Runtimes are left at zero when `timed` is false.
inline std::vector<SweepRow> step_sweep(const std::vector<DependencyHistory>& corpus, const GroundTruth& truth,
                                        const std::vector<std::size_t>& steps, unsigned jobs = 1,
                                        bool timed = true) {
    if (steps.empty()) throw Error("step sweep needs at least one step");
    std::vector<SweepRow> rows;
    for (auto step : steps) {
        MineOptions opt;
        opt.step = step;
        opt.jobs = jobs;
        const auto start = std::chrono::steady_clock::now();
        const auto mined = mine_corpus(corpus, {}, opt);
        const auto stop = std::chrono::steady_clock::now();
        const auto ev = evaluate(mined.candidates, truth, step);
        SweepRow row{step, mined.candidates.size(), ev.true_positives, ev.false_positives, 0.0};
        if (timed) row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "step,candidates,tp,fp,runtime_ms\n";
    for (const auto& r : rows)
        out << r.step << ',' << r.candidates << ',' << r.true_positives << ',' << r.false_positives << ','
            << csv::fixed(r.runtime_ms, 3) << '\n';
}

}  // namespace migmine

#endif  // MIGMINE_SYNTH_HPP
