/*
 * Copyright 2026 The salience-audit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "salience/csv.hpp"
#include "salience/domain.hpp"
#include "salience/errors.hpp"
#include "salience/json_codec.hpp"

namespace salience::ingest {

// ---------------------------------------------------------------------------
// Capture files (newline-delimited records, one JSON object per result)
// ---------------------------------------------------------------------------

namespace detail {

inline void check_record(const ResultRecord& r, int line_no) {
    auto fail = [&](const std::string& field, const std::string& why) {
        throw SchemaViolation("line " + std::to_string(line_no) + ": field '" + field +
                              "': " + why + " (record '" + r.record_id + "')");
    };
    if (r.record_id.empty()) fail("record_id", "must not be empty");
    if (r.is_llm()) {
        if (!r.answer_text) fail("answer_text", "LLM records must carry answer_text");
        if (r.url || r.headline) fail("url", "LLM records must not carry url or headline");
    } else {
        if (!r.url || !r.headline) fail("url", "SERP records must carry url and headline");
        if (r.answer_text) fail("answer_text", "SERP records must not carry answer_text");
        if (!r.rank || *r.rank < 1) fail("rank", "SERP records need a rank >= 1");
    }
}

}  // namespace detail

/// Loads a capture file. Order-preserving; throws ParseError or
/// SchemaViolation with the offending line number. Rank uniqueness within
/// (engine, location, replica, query, section) is enforced across the file.
inline std::vector<ResultRecord> load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::vector<ResultRecord> records;
    std::set<std::string> rank_keys;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
        ResultRecord record;
        try {
            record = j.get<ResultRecord>();
        } catch (const SchemaViolation& e) {
            throw SchemaViolation(path + ": line " + std::to_string(line_no) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw SchemaViolation(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
        detail::check_record(record, line_no);
        if (record.rank) {
            const std::string key = record.engine + "\x1f" + record.location + "\x1f" +
                                    std::to_string(record.replica) + "\x1f" + record.query_id +
                                    "\x1f" + codec::section_name(record.section) + "\x1f" +
                                    std::to_string(*record.rank);
            if (!rank_keys.insert(key).second)
                throw SchemaViolation(path + ": line " + std::to_string(line_no) +
                                      ": duplicate rank within (engine, location, replica, "
                                      "query, section)");
        }
        records.push_back(std::move(record));
    }
    return records;
}

inline void write_results(const std::string& path, const std::vector<ResultRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    for (const auto& r : records) {
        out << nlohmann::json(r).dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Benchmark files
// ---------------------------------------------------------------------------

[[noreturn]] inline void throw_with_location(const Error& e, const std::string& path,
                                             int line_no) {
    const std::string msg = path + ": line " + std::to_string(line_no) + ": " + e.what();
    if (dynamic_cast<const NegativeValue*>(&e)) throw NegativeValue(msg);
    if (dynamic_cast<const ZeroTotal*>(&e)) throw ZeroTotal(msg);
    if (dynamic_cast<const MissingCategory*>(&e)) throw MissingCategory(msg);
    throw ParseError(msg);
}

/// Loads a benchmark table: one row per stratum, one column per category,
/// values either counts (e.g. seats) or percentages. Rows are re-normalized
/// to proportions either way.
inline Benchmark load_benchmark(const std::string& path, BenchmarkKind kind, Scheme scheme) {
    const auto table = csv::read_file(path);
    const int stratum_col = table.column("stratum");
    if (stratum_col < 0) throw ParseError(path + ": missing 'stratum' column");
    std::vector<int> cat_cols;
    for (const auto& cat : categories(scheme)) {
        const int col = table.column(std::string(cat.name()));
        if (col < 0)
            throw MissingCategory(path + ": missing column for category '" +
                                  std::string(cat.name()) + "'");
        cat_cols.push_back(col);
    }
    Benchmark bench(kind, scheme);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const int line_no = table.line_numbers[i];
        std::vector<double> values;
        values.reserve(cat_cols.size());
        for (int col : cat_cols) {
            if (row[static_cast<std::size_t>(col)].empty())
                throw MissingCategory(path + ": line " + std::to_string(line_no) +
                                      ": empty category cell");
            values.push_back(
                csv::parse_number(row[static_cast<std::size_t>(col)], path, line_no));
        }
        try {
            bench.set_row(row[static_cast<std::size_t>(stratum_col)], std::move(values));
        } catch (const Error& e) {
            throw_with_location(e, path, line_no);
        }
    }
    if (bench.strata().empty()) throw ParseError(path + ": benchmark has no rows");
    return bench;
}

// ---------------------------------------------------------------------------
// Entity lexicon
// ---------------------------------------------------------------------------

struct LexiconEntry {
    std::string surface;   // case-folded pattern, matched on word boundaries
    std::string party_id;
    std::string country;
};

/// Surface-to-party dictionary plus the party -> group -> category mapping.
/// One CSV file holds all three tables, discriminated by the `kind` column:
///   kind=entry:  surface, party, country
///   kind=party:  party, group
///   kind=family: group, category   (category empty = tracked but uncounted)
class EntityLexicon {
public:
    Scheme scheme() const { return scheme_; }
    const std::vector<LexiconEntry>& entries() const { return entries_; }

    bool has_party(const std::string& party_id) const { return party_map_.contains(party_id); }

    const std::string& family_of(const std::string& party_id) const {
        const auto it = party_map_.find(party_id);
        if (it == party_map_.end())
            throw UnmappedParty("party '" + party_id + "' has no group mapping");
        return it->second;
    }

    /// Category for a party (via its group); nullopt when the group is
    /// deliberately uncounted (e.g. unresolved spectrum buckets).
    std::optional<Category> category_of(const std::string& party_id) const {
        const auto fam = family_of(party_id);
        const auto it = family_map_.find(fam);
        if (it == family_map_.end())
            throw UnmappedParty("group '" + fam + "' has no category mapping");
        return it->second;
    }

    static EntityLexicon load(const std::string& path, Scheme scheme) {
        const auto table = csv::read_file(path);
        const int kind_col = table.column("kind");
        const int surface_col = table.column("surface");
        const int party_col = table.column("party");
        const int country_col = table.column("country");
        const int group_col = table.column("group");
        const int category_col = table.column("category");
        if (kind_col < 0 || surface_col < 0 || party_col < 0 || country_col < 0 ||
            group_col < 0 || category_col < 0)
            throw ParseError(path +
                             ": lexicon needs columns kind,surface,party,country,group,category");

        EntityLexicon lex;
        lex.scheme_ = scheme;
        std::set<std::pair<std::string, std::string>> seen_surfaces;
        struct PendingEntry { LexiconEntry entry; int line; };
        std::vector<PendingEntry> pending;
        std::vector<std::tuple<std::string, std::string, int>> pending_parties;

        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            const int line_no = table.line_numbers[i];
            auto cell = [&](int col) { return row[static_cast<std::size_t>(col)]; };
            const std::string kind = cell(kind_col);
            if (kind == "entry") {
                LexiconEntry e{fold_case(cell(surface_col)), cell(party_col), cell(country_col)};
                if (e.surface.empty())
                    throw ParseError(path + ": line " + std::to_string(line_no) +
                                     ": entry with empty surface");
                if (!seen_surfaces.insert({e.surface, e.country}).second)
                    throw DuplicateSurface(path + ": line " + std::to_string(line_no) +
                                           ": duplicate surface '" + e.surface +
                                           "' for country '" + e.country + "'");
                pending.push_back({std::move(e), line_no});
            } else if (kind == "party") {
                pending_parties.emplace_back(cell(party_col), cell(group_col), line_no);
            } else if (kind == "family") {
                const std::string group = cell(group_col);
                const std::string cat_name = cell(category_col);
                if (cat_name.empty()) {
                    lex.family_map_[group] = std::nullopt;
                } else {
                    const auto cat = Category::from_name(scheme, cat_name);
                    if (!cat)
                        throw ParseError(path + ": line " + std::to_string(line_no) +
                                         ": unknown category '" + cat_name + "'");
                    lex.family_map_[group] = cat;
                }
            } else {
                throw ParseError(path + ": line " + std::to_string(line_no) +
                                 ": unknown kind '" + kind + "'");
            }
        }
        for (const auto& [party, group, line_no] : pending_parties) {
            if (!lex.family_map_.contains(group))
                throw UnmappedParty(path + ": line " + std::to_string(line_no) + ": party '" +
                                    party + "' references unknown group '" + group + "'");
            lex.party_map_[party] = group;
        }
        for (auto& p : pending) {
            if (!lex.party_map_.contains(p.entry.party_id))
                throw UnmappedParty(path + ": line " + std::to_string(p.line) + ": surface '" +
                                    p.entry.surface + "' references unmapped party '" +
                                    p.entry.party_id + "'");
            lex.entries_.push_back(std::move(p.entry));
        }
        return lex;
    }

    /// In-memory construction for tests and the simulator.
    static EntityLexicon from_tables(
        Scheme scheme, std::vector<LexiconEntry> entries,
        std::map<std::string, std::string> party_map,
        std::map<std::string, std::optional<Category>> family_map) {
        EntityLexicon lex;
        lex.scheme_ = scheme;
        lex.party_map_ = std::move(party_map);
        lex.family_map_ = std::move(family_map);
        std::set<std::pair<std::string, std::string>> seen;
        for (auto& e : entries) {
            e.surface = fold_case(e.surface);
            if (!seen.insert({e.surface, e.country}).second)
                throw DuplicateSurface("duplicate surface '" + e.surface + "'");
            if (!lex.party_map_.contains(e.party_id))
                throw UnmappedParty("surface '" + e.surface + "' references unmapped party '" +
                                    e.party_id + "'");
        }
        for (const auto& [party, group] : lex.party_map_) {
            if (!lex.family_map_.contains(group))
                throw UnmappedParty("party '" + party + "' references unknown group '" + group +
                                    "'");
        }
        lex.entries_ = std::move(entries);
        return lex;
    }

    static std::string fold_case(std::string s) {
        for (char& c : s)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        return s;
    }

private:
    Scheme scheme_ = Scheme::EU5;
    std::vector<LexiconEntry> entries_;
    std::map<std::string, std::string> party_map_;                   // party -> group
    std::map<std::string, std::optional<Category>> family_map_;      // group -> category
};

// ---------------------------------------------------------------------------
// Issue-importance surveys
// ---------------------------------------------------------------------------

/// The fifteen policy issues tracked in the US audit.
inline const std::vector<std::string>& canonical_issues() {
    static const std::vector<std::string> topics = {
        "Abortion",
        "Economy",
        "Healthcare",
        "Supreme Court appointments",
        "Foreign policy",
        "Violent crime",
        "Immigration",
        "Gun policy",
        "Terrorism",
        "Taxes and government spending",
        "Social Security",
        "Climate change and the environment",
        "Education",
        "Racial and ethnic inequality",
        "Civil rights and civil liberties",
    };
    return topics;
}

struct SurveyRow {
    long long rep_selected = 0;
    long long dem_selected = 0;
};

struct SurveyTable {
    std::string survey_id;
    std::map<std::string, SurveyRow> rows;  // topic -> selections
    long long rep_total = 0;
    long long dem_total = 0;
};

/// Loads one survey per path. Columns: topic, rep_selected, rep_total,
/// dem_selected, dem_total. Totals must agree across rows of a file.
inline std::vector<SurveyTable> load_surveys(const std::vector<std::string>& paths) {
    std::vector<SurveyTable> out;
    const std::set<std::string> known(canonical_issues().begin(), canonical_issues().end());
    for (const auto& path : paths) {
        const auto table = csv::read_file(path);
        const int topic_col = table.column("topic");
        const int rs_col = table.column("rep_selected");
        const int rt_col = table.column("rep_total");
        const int ds_col = table.column("dem_selected");
        const int dt_col = table.column("dem_total");
        if (topic_col < 0 || rs_col < 0 || rt_col < 0 || ds_col < 0 || dt_col < 0)
            throw ParseError(path + ": survey needs columns topic,rep_selected,rep_total,"
                                    "dem_selected,dem_total");
        SurveyTable survey;
        survey.survey_id = std::filesystem::path(path).stem().string();
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            const int line_no = table.line_numbers[i];
            auto num = [&](int col) {
                return static_cast<long long>(
                    csv::parse_number(row[static_cast<std::size_t>(col)], path, line_no));
            };
            const std::string topic = row[static_cast<std::size_t>(topic_col)];
            if (!known.contains(topic))
                throw ParseError(path + ": line " + std::to_string(line_no) +
                                 ": unknown topic '" + topic + "'");
            const long long rs = num(rs_col), rt = num(rt_col);
            const long long ds = num(ds_col), dt = num(dt_col);
            if (rt <= 0 || dt <= 0)
                throw ParseError(path + ": line " + std::to_string(line_no) +
                                 ": totals must be positive");
            if (rs > rt || ds > dt)
                throw SelectionExceedsTotal(path + ": line " + std::to_string(line_no) +
                                            ": selections exceed the respondent total");
            if (rs < 0 || ds < 0)
                throw NegativeValue(path + ": line " + std::to_string(line_no) +
                                    ": negative selection count");
            if (survey.rep_total == 0) {
                survey.rep_total = rt;
                survey.dem_total = dt;
            } else if (survey.rep_total != rt || survey.dem_total != dt) {
                throw ParseError(path + ": line " + std::to_string(line_no) +
                                 ": totals differ between rows of one survey");
            }
            survey.rows[topic] = SurveyRow{rs, ds};
        }
        out.push_back(std::move(survey));
    }
    return out;
}

}  // namespace salience::ingest
