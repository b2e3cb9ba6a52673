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

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salience/errors.hpp"

namespace salience {

// ---------------------------------------------------------------------------
// Core enumerations
// ---------------------------------------------------------------------------

enum class Election { EU2024, US2024 };
enum class Platform { SE, LLM };
enum class QueryKind { EntityQuery, IssueQuery };
enum class Section { Main, TopNews, PeopleAlsoAsk, LlmAnswer };
enum class SourceField { Headline, Url, AnswerText };
enum class PollLeaning { Dem, Rep, Contested };
enum class BenchmarkKind { Uniform, Media, Polls, PriorResults, IssueImportance };
enum class TestKind { BinomZ, BetaBinLRT, SignFlipPerm, Descriptive };

/// Leaning axes. Category order within a scheme is fixed; it drives report
/// layout and the omnibus degrees of freedom (K - 1).
enum class Scheme { EU5, USParty, USIssue5 };

/// The sixteen website categories used to classify landing pages.
enum class SiteCategory {
    News, MediaPublications, ReferenceDefinition, ScienceAcademic, Political,
    SocialMedia, ForumsDiscussionBoards, EntertainmentServices, EcommerceRetail,
    CorporateWebsites, EducationalPlatforms, SearchEnginesAggregators,
    UtilitiesTools, Blogs, AdultGamblingRestricted, FactCheckers,
};

namespace detail {

inline constexpr std::array<std::string_view, 5> kEu5Names = {
    "RadLeft", "MainLeft", "Greens", "MainRight", "RadRight"};
inline constexpr std::array<std::string_view, 2> kUsPartyNames = {"Dem", "Rep"};
inline constexpr std::array<std::string_view, 5> kUsIssueNames = {
    "Rep++", "Rep+", "Neutral", "Dem+", "Dem++"};

inline constexpr std::array<std::string_view, 5> kEu5Display = {
    "R. Left", "M. Left", "Greens", "M. Right", "R. Right"};
inline constexpr std::array<std::string_view, 2> kUsPartyDisplay = {"Dem.", "Rep."};
inline constexpr std::array<std::string_view, 5> kUsIssueDisplay = {
    "Rep ++", "Rep +", "Neutral", "Dem +", "Dem ++"};

}  // namespace detail

inline int category_count(Scheme s) {
    switch (s) {
        case Scheme::EU5: return 5;
        case Scheme::USParty: return 2;
        case Scheme::USIssue5: return 5;
    }
    return 0;
}

inline std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::EU5: return "eu5";
        case Scheme::USParty: return "usparty";
        case Scheme::USIssue5: return "usissue5";
    }
    return "";
}

inline std::optional<Scheme> scheme_from_name(std::string_view name) {
    if (name == "eu5") return Scheme::EU5;
    if (name == "usparty") return Scheme::USParty;
    if (name == "usissue5") return Scheme::USIssue5;
    return std::nullopt;
}

/// One leaning category: a (scheme, position) pair. Ordering follows the
/// fixed in-scheme position, so sorting outcomes is deterministic.
class Category {
public:
    Category(Scheme scheme, int index) : scheme_(scheme), index_(index) {}

    Scheme scheme() const { return scheme_; }
    int index() const { return index_; }

    std::string_view name() const {
        switch (scheme_) {
            case Scheme::EU5: return detail::kEu5Names[static_cast<std::size_t>(index_)];
            case Scheme::USParty: return detail::kUsPartyNames[static_cast<std::size_t>(index_)];
            case Scheme::USIssue5: return detail::kUsIssueNames[static_cast<std::size_t>(index_)];
        }
        return "";
    }

    /// Table heading form ("R. Right", "Dem.", "Rep ++", ...).
    std::string_view display_name() const {
        switch (scheme_) {
            case Scheme::EU5: return detail::kEu5Display[static_cast<std::size_t>(index_)];
            case Scheme::USParty: return detail::kUsPartyDisplay[static_cast<std::size_t>(index_)];
            case Scheme::USIssue5: return detail::kUsIssueDisplay[static_cast<std::size_t>(index_)];
        }
        return "";
    }

    static std::optional<Category> from_name(Scheme scheme, std::string_view name) {
        const int k = category_count(scheme);
        for (int i = 0; i < k; ++i) {
            if (Category(scheme, i).name() == name) return Category(scheme, i);
        }
        return std::nullopt;
    }

    friend auto operator<=>(const Category&, const Category&) = default;

private:
    Scheme scheme_;
    int index_;
};

inline std::vector<Category> categories(Scheme s) {
    std::vector<Category> out;
    out.reserve(static_cast<std::size_t>(category_count(s)));
    for (int i = 0; i < category_count(s); ++i) out.emplace_back(s, i);
    return out;
}

// ---------------------------------------------------------------------------
// Audit configuration
// ---------------------------------------------------------------------------

struct LocationSpec {
    std::string country_or_county;
    std::optional<PollLeaning> poll_leaning;  // US only

    friend bool operator==(const LocationSpec&, const LocationSpec&) = default;
};

struct QuerySpec {
    std::string id;  // defaults to "q<index>" when absent from the config file
    std::string text;
    std::string language;
    QueryKind kind = QueryKind::EntityQuery;
    Platform platform = Platform::SE;

    friend bool operator==(const QuerySpec&, const QuerySpec&) = default;
};

/// One audit run: which engines to query, from where, in which languages,
/// with how many technical replicas. Immutable after construction; a fixed
/// seed makes reruns bit-identical.
struct AuditConfig {
    Election election = Election::EU2024;
    std::vector<std::string> engines;
    std::vector<LocationSpec> locations;
    std::vector<std::string> languages;
    std::vector<QuerySpec> queries;
    int replicas_per_location = 1;
    std::uint64_t seed = 0;

    friend bool operator==(const AuditConfig&, const AuditConfig&) = default;
};

enum class ConfigError {
    EmptyQuerySet,
    UnknownLanguage,
    BadReplicaCount,
    EmptyEngineSet,
    EmptyLocationSet,
    EmptyLocationId,
    DuplicateLocationId,
    EmptyQueryText,
    IssueQueryOutsideUS,
};

struct ConfigIssue {
    ConfigError code;
    std::string message;
};

/// Checks every AuditConfig invariant and returns the full violation list
/// (empty means the config is valid).
inline std::vector<ConfigIssue> validate_config(const AuditConfig& config) {
    std::vector<ConfigIssue> issues;
    if (config.engines.empty())
        issues.push_back({ConfigError::EmptyEngineSet, "config lists no engines"});
    if (config.locations.empty())
        issues.push_back({ConfigError::EmptyLocationSet, "config lists no locations"});
    if (config.queries.empty())
        issues.push_back({ConfigError::EmptyQuerySet, "config lists no queries"});
    if (config.replicas_per_location < 1)
        issues.push_back({ConfigError::BadReplicaCount,
                          "replicas_per_location must be >= 1, got " +
                              std::to_string(config.replicas_per_location)});
    std::set<std::string> seen_locations;
    for (const auto& loc : config.locations) {
        if (loc.country_or_county.empty()) {
            issues.push_back({ConfigError::EmptyLocationId, "location with empty id"});
        } else if (!seen_locations.insert(loc.country_or_county).second) {
            issues.push_back({ConfigError::DuplicateLocationId,
                              "duplicate location id '" + loc.country_or_county + "'"});
        }
    }
    const std::set<std::string> langs(config.languages.begin(), config.languages.end());
    for (const auto& q : config.queries) {
        if (q.text.empty())
            issues.push_back({ConfigError::EmptyQueryText, "query '" + q.id + "' has empty text"});
        if (!langs.contains(q.language))
            issues.push_back({ConfigError::UnknownLanguage,
                              "query '" + q.id + "' uses language '" + q.language +
                                  "' not in the config language list"});
        if (q.kind == QueryKind::IssueQuery && config.election != Election::US2024)
            issues.push_back({ConfigError::IssueQueryOutsideUS,
                              "query '" + q.id + "' is an issue query outside a US audit"});
    }
    return issues;
}

// ---------------------------------------------------------------------------
// Collected results and mentions
// ---------------------------------------------------------------------------

/// One collected unit: a SERP item (url + headline + rank + section) or one
/// LLM answer, with full audit provenance. SERP records carry url/headline
/// and no answer_text; LLM records carry answer_text only.
struct ResultRecord {
    std::string record_id;
    std::string engine;
    std::string location;
    std::string language;
    std::string query_id;
    int replica = 1;
    std::optional<int> rank;  // SERP only, >= 1
    Section section = Section::Main;
    std::optional<std::string> url;
    std::optional<std::string> headline;
    std::optional<std::string> answer_text;
    std::optional<SiteCategory> site_category;
    std::int64_t collected_at_ms = 0;  // UTC epoch milliseconds

    bool is_llm() const { return section == Section::LlmAnswer; }
};

/// One deduplicated reference to a political entity or issue inside a record.
struct Mention {
    std::string record_id;
    std::string raw_surface;
    std::string resolved_id;  // party, family, or topic id
    Category category;
    SourceField source_field;
};

// ---------------------------------------------------------------------------
// Benchmarks and test outcomes
// ---------------------------------------------------------------------------

inline std::string_view benchmark_kind_name(BenchmarkKind k) {
    switch (k) {
        case BenchmarkKind::Uniform: return "uniform";
        case BenchmarkKind::Media: return "media";
        case BenchmarkKind::Polls: return "polls";
        case BenchmarkKind::PriorResults: return "prior";
        case BenchmarkKind::IssueImportance: return "issue_importance";
    }
    return "";
}

inline std::optional<BenchmarkKind> benchmark_kind_from_name(std::string_view name) {
    if (name == "uniform") return BenchmarkKind::Uniform;
    if (name == "media") return BenchmarkKind::Media;
    if (name == "polls") return BenchmarkKind::Polls;
    if (name == "prior") return BenchmarkKind::PriorResults;
    if (name == "issue_importance") return BenchmarkKind::IssueImportance;
    return std::nullopt;
}

/// Expected proportion per category per stratum. Rows are normalized to sum
/// to one; lookups fall back to the "GLOBAL" row, and a Uniform benchmark
/// answers 1/K for every stratum.
class Benchmark {
public:
    Benchmark(BenchmarkKind kind, Scheme scheme) : kind_(kind), scheme_(scheme) {}

    static Benchmark uniform(Scheme scheme) {
        Benchmark b(BenchmarkKind::Uniform, scheme);
        const int k = category_count(scheme);
        b.rows_["GLOBAL"] = std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
        return b;
    }

    BenchmarkKind kind() const { return kind_; }
    Scheme scheme() const { return scheme_; }

    /// Add a raw row (counts or percentages); it is normalized in place.
    void set_row(const std::string& stratum, std::vector<double> values) {
        if (values.size() != static_cast<std::size_t>(category_count(scheme_)))
            throw MissingCategory("benchmark row for '" + stratum +
                                  "' does not cover every category");
        double total = 0.0;
        for (double v : values) {
            if (v < 0.0)
                throw NegativeValue("benchmark row for '" + stratum + "' has a negative value");
            total += v;
        }
        if (total <= 0.0) throw ZeroTotal("benchmark row for '" + stratum + "' sums to zero");
        for (double& v : values) v /= total;
        rows_[stratum] = std::move(values);
    }

    bool has_stratum(const std::string& stratum) const {
        return kind_ == BenchmarkKind::Uniform || rows_.contains(stratum) ||
               rows_.contains("GLOBAL");
    }

    /// Expected proportion of `category` in `stratum`.
    double expected(const std::string& stratum, const Category& category) const {
        if (category.scheme() != scheme_)
            throw SchemeMismatch("benchmark scheme does not match category scheme");
        return row(stratum)[static_cast<std::size_t>(category.index())];
    }

    const std::vector<double>& row(const std::string& stratum) const {
        auto it = rows_.find(stratum);
        if (it != rows_.end()) return it->second;
        it = rows_.find("GLOBAL");
        if (it != rows_.end()) return it->second;
        throw MissingCategory("benchmark has no row for stratum '" + stratum +
                              "' and no GLOBAL fallback");
    }

    std::vector<std::string> strata() const {
        std::vector<std::string> out;
        out.reserve(rows_.size());
        for (const auto& [name, _] : rows_) out.push_back(name);
        return out;
    }

private:
    BenchmarkKind kind_;
    Scheme scheme_;
    std::map<std::string, std::vector<double>> rows_;
};

/// One tested cell: deviation of a category from a benchmark within a
/// stratum, the statistic behind it, and multiplicity-adjusted significance.
struct TestOutcome {
    Scheme scheme = Scheme::EU5;
    Category category{Scheme::EU5, 0};
    std::string stratum;       // location id or "GLOBAL"
    BenchmarkKind benchmark_kind = BenchmarkKind::Uniform;
    std::string engine;        // which algorithm produced the results
    std::string context;       // Holm correction family
    double diff_pp = 0.0;      // signed percentage points
    double statistic = 0.0;
    TestKind test_kind = TestKind::Descriptive;
    std::optional<double> p_raw;
    std::optional<double> p_adjusted;
    bool holm_significant = false;
    long long n_units = 0;
    int direction = 0;  // sign of the deviation
};

}  // namespace salience
