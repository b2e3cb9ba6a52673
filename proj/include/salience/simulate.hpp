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
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "salience/domain.hpp"
#include "salience/errors.hpp"
#include "salience/ingest.hpp"
#include "salience/json_codec.hpp"
#include "salience/rng.hpp"

namespace salience::sim {

// Deterministic stand-in for the live bot fleet: executes an AuditConfig
// against mock engines and writes capture files with the exact schema of a
// real collection. Every record stream is keyed by
// (engine, location, query, replica), so adding replicas or engines never
// disturbs the records of existing ones.

struct PageTemplate {
    std::string url;       // placeholders: {entity} {entity_slug} {query} {location} {rank}
    std::string headline;
    Section section = Section::Main;
};

/// Mock engine behaviour: which pages a query returns and how often planted
/// political mentions of each category appear in them.
struct EngineSpec {
    std::string engine_id;
    Platform platform = Platform::SE;
    Scheme scheme = Scheme::EU5;
    int results_per_page = 8;
    double mention_rate = 0.5;      // chance a result carries a planted mention
    double refusal_rate = 0.0;      // LLM only
    std::map<std::string, double> mention_distribution;            // category name -> weight
    std::map<std::string, std::vector<std::string>> entity_pool;   // category name -> surfaces
    std::map<std::string, std::vector<PageTemplate>> pages;        // query_id -> templates
    std::vector<PageTemplate> default_page;
    std::vector<std::string> neutral_pool;  // filler phrases for mention-free results
    std::vector<std::string> answer_templates;  // LLM answers, placeholder {entities}
};

inline void to_json(nlohmann::json& j, const PageTemplate& t) {
    j = nlohmann::json{{"url", t.url},
                       {"headline", t.headline},
                       {"section", codec::section_name(t.section)}};
}

inline void from_json(const nlohmann::json& j, PageTemplate& t) {
    t.url = j.at("url").get<std::string>();
    t.headline = j.at("headline").get<std::string>();
    const auto section = codec::section_from_name(j.value("section", "Main"));
    if (!section) throw SchemaViolation("unknown section in page template");
    t.section = *section;
}

inline void to_json(nlohmann::json& j, const EngineSpec& s) {
    j = nlohmann::json{
        {"engine_id", s.engine_id},
        {"platform", s.platform == Platform::SE ? "se" : "llm"},
        {"scheme", std::string(scheme_name(s.scheme))},
        {"results_per_page", s.results_per_page},
        {"mention_rate", s.mention_rate},
        {"refusal_rate", s.refusal_rate},
        {"mention_distribution", s.mention_distribution},
        {"entity_pool", s.entity_pool},
        {"pages", s.pages},
        {"default_page", s.default_page},
    };
    if (!s.neutral_pool.empty()) j["neutral_pool"] = s.neutral_pool;
    if (!s.answer_templates.empty()) j["answer_templates"] = s.answer_templates;
}

inline void from_json(const nlohmann::json& j, EngineSpec& s) {
    s.engine_id = j.at("engine_id").get<std::string>();
    const auto platform = j.value("platform", "se");
    if (platform == "se") s.platform = Platform::SE;
    else if (platform == "llm") s.platform = Platform::LLM;
    else throw SchemaViolation("unknown platform '" + platform + "'");
    const auto scheme = scheme_from_name(j.value("scheme", "eu5"));
    if (!scheme) throw SchemaViolation("unknown scheme in engine spec");
    s.scheme = *scheme;
    s.results_per_page = j.value("results_per_page", 8);
    s.mention_rate = j.value("mention_rate", 0.5);
    s.refusal_rate = j.value("refusal_rate", 0.0);
    s.mention_distribution =
        j.at("mention_distribution").get<std::map<std::string, double>>();
    if (j.contains("entity_pool"))
        s.entity_pool = j.at("entity_pool").get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("pages"))
        s.pages = j.at("pages").get<std::map<std::string, std::vector<PageTemplate>>>();
    if (j.contains("default_page"))
        s.default_page = j.at("default_page").get<std::vector<PageTemplate>>();
    if (j.contains("neutral_pool"))
        s.neutral_pool = j.at("neutral_pool").get<std::vector<std::string>>();
    if (j.contains("answer_templates"))
        s.answer_templates = j.at("answer_templates").get<std::vector<std::string>>();
}

inline std::vector<EngineSpec> load_engine_specs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        if (j.is_array()) return j.get<std::vector<EngineSpec>>();
        return j.at("engines").get<std::vector<EngineSpec>>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaViolation(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Validation and bias planting
// ---------------------------------------------------------------------------

namespace detail {

inline void check_distribution(const EngineSpec& spec) {
    double total = 0.0;
    for (const auto& cat : categories(spec.scheme)) {
        const auto it = spec.mention_distribution.find(std::string(cat.name()));
        if (it == spec.mention_distribution.end())
            throw BadDistribution("engine '" + spec.engine_id +
                                  "' distribution misses category '" +
                                  std::string(cat.name()) + "'");
        if (it->second < 0.0)
            throw BadDistribution("engine '" + spec.engine_id +
                                  "' has a negative weight for '" + std::string(cat.name()) +
                                  "'");
        total += it->second;
    }
    if (total <= 0.0)
        throw BadDistribution("engine '" + spec.engine_id + "' has all-zero weights");
}

}  // namespace detail

/// Returns a copy of the spec whose planted-mention distribution equals the
/// target. Generated category frequencies then match the target up to
/// multinomial sampling error.
inline EngineSpec plant_bias(const EngineSpec& spec,
                             const std::map<std::string, double>& target) {
    EngineSpec out = spec;
    out.mention_distribution = target;
    detail::check_distribution(out);
    return out;
}

// ---------------------------------------------------------------------------
// Audit plan
// ---------------------------------------------------------------------------

struct BotTask {
    std::string engine;
    std::string location;
    std::string language;
    std::string query_id;
    std::string query_text;
    Platform platform = Platform::SE;
    int replica = 1;
};

/// Expands a config into the full task list. Each task is an independent
/// fresh-instance bot visit; no state carries across queries.
inline std::vector<BotTask> plan_audit(const AuditConfig& config) {
    std::vector<BotTask> plan;
    for (const auto& engine : config.engines) {
        for (const auto& location : config.locations) {
            for (const auto& query : config.queries) {
                for (int replica = 1; replica <= config.replicas_per_location; ++replica) {
                    plan.push_back({engine, location.country_or_county, query.language,
                                    query.id, query.text, query.platform, replica});
                }
            }
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Capture generation
// ---------------------------------------------------------------------------

namespace detail {

inline std::string slugify(const std::string& text) {
    std::string out;
    for (unsigned char c : text) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out += static_cast<char>(c);
        else if (c >= 'A' && c <= 'Z') out += static_cast<char>(c - 'A' + 'a');
        else if (!out.empty() && out.back() != '-') out += '-';
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out;
}

inline std::string fill(std::string text, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

inline const std::vector<std::string>& default_neutral_pool() {
    static const std::vector<std::string> pool = {
        "election guide", "how to vote", "polling stations", "ballot measures explained",
        "voter registration", "election day schedule",
    };
    return pool;
}

inline std::string pick_category(const EngineSpec& spec, CounterRng& rng) {
    double total = 0.0;
    for (const auto& cat : categories(spec.scheme))
        total += spec.mention_distribution.at(std::string(cat.name()));
    double roll = rng.next_double() * total;
    for (const auto& cat : categories(spec.scheme)) {
        const double w = spec.mention_distribution.at(std::string(cat.name()));
        roll -= w;
        if (roll < 0.0 && w > 0.0) return std::string(cat.name());
    }
    // Fall through only on floating-point edge; take the last positive weight.
    for (auto it = spec.mention_distribution.rbegin(); it != spec.mention_distribution.rend();
         ++it)
        if (it->second > 0.0) return it->first;
    throw BadDistribution("no positive weights");
}

inline std::string pick_entity(const EngineSpec& spec, const std::string& category,
                               CounterRng& rng) {
    const auto it = spec.entity_pool.find(category);
    if (it == spec.entity_pool.end() || it->second.empty())
        throw MissingSpec("engine '" + spec.engine_id + "' has no entity pool for category '" +
                          category + "'");
    return it->second[rng.next_below(it->second.size())];
}

constexpr std::int64_t kCaptureEpochMs = 1704067200000;  // fixed base timestamp

}  // namespace detail

/// Executes the audit plan against the mock engine specs and writes one
/// capture file. Identical (config, specs, seed) inputs produce a
/// byte-identical file.
inline std::string run_audit(const AuditConfig& config, const std::vector<EngineSpec>& specs,
                             const std::string& out_path) {
    const auto issues = validate_config(config);
    if (!issues.empty()) {
        std::string msg = "invalid audit config:";
        for (const auto& issue : issues) msg += "\n  - " + issue.message;
        throw ConfigInvalid(msg);
    }
    std::map<std::string, const EngineSpec*> by_id;
    for (const auto& spec : specs) {
        detail::check_distribution(spec);
        by_id[spec.engine_id] = &spec;
    }
    for (const auto& engine : config.engines) {
        if (!by_id.contains(engine))
            throw MissingSpec("config engine '" + engine + "' has no engine spec");
    }
    // Every platform-matched (engine, query) pair needs page templates.
    for (const auto& engine : config.engines) {
        const auto& spec = *by_id.at(engine);
        for (const auto& query : config.queries) {
            if (query.platform != spec.platform) continue;
            if (spec.platform == Platform::SE && !spec.pages.contains(query.id) &&
                spec.default_page.empty())
                throw MissingSpec("engine '" + engine + "' has no page templates for query '" +
                                  query.id + "'");
        }
    }

    std::vector<ResultRecord> records;
    for (const auto& task : plan_audit(config)) {
        const auto& spec = *by_id.at(task.engine);
        if (task.platform != spec.platform) continue;
        auto rng = CounterRng::stream(config.seed, "audit|" + task.engine + "|" +
                                                       task.location + "|" + task.query_id +
                                                       "|r" + std::to_string(task.replica));
        const auto& neutral =
            spec.neutral_pool.empty() ? detail::default_neutral_pool() : spec.neutral_pool;

        if (spec.platform == Platform::SE) {
            const auto page_it = spec.pages.find(task.query_id);
            const auto& templates =
                (page_it != spec.pages.end()) ? page_it->second : spec.default_page;
            for (int rank = 1; rank <= spec.results_per_page; ++rank) {
                const auto& tpl =
                    templates[static_cast<std::size_t>(rank - 1) % templates.size()];
                const bool mention = rng.next_double() < spec.mention_rate;
                std::string entity;
                if (mention) {
                    entity = detail::pick_entity(spec, detail::pick_category(spec, rng), rng);
                } else {
                    entity = neutral[rng.next_below(neutral.size())];
                }
                ResultRecord r;
                r.engine = task.engine;
                r.location = task.location;
                r.language = task.language;
                r.query_id = task.query_id;
                r.replica = task.replica;
                r.rank = rank;
                r.section = tpl.section;
                auto expand = [&](const std::string& text) {
                    std::string out = detail::fill(text, "{entity}", entity);
                    out = detail::fill(out, "{entity_slug}", detail::slugify(entity));
                    out = detail::fill(out, "{query}", task.query_text);
                    out = detail::fill(out, "{location}", task.location);
                    out = detail::fill(out, "{rank}", std::to_string(rank));
                    return out;
                };
                r.url = expand(tpl.url);
                r.headline = expand(tpl.headline);
                r.record_id = task.engine + "-" + task.location + "-" + task.query_id + "-r" +
                              std::to_string(task.replica) + "-" + std::to_string(rank);
                r.collected_at_ms =
                    detail::kCaptureEpochMs + static_cast<std::int64_t>(records.size());
                records.push_back(std::move(r));
            }
        } else {
            ResultRecord r;
            r.engine = task.engine;
            r.location = task.location;
            r.language = task.language;
            r.query_id = task.query_id;
            r.replica = task.replica;
            r.section = Section::LlmAnswer;
            const bool refused = rng.next_double() < spec.refusal_rate;
            if (refused) {
                r.answer_text = "I cannot help with that request.";
            } else {
                const int n_entities = 1 + static_cast<int>(rng.next_below(3));
                std::string entities;
                for (int i = 0; i < n_entities; ++i) {
                    if (!entities.empty()) entities += ", ";
                    entities +=
                        detail::pick_entity(spec, detail::pick_category(spec, rng), rng);
                }
                const std::string tpl =
                    spec.answer_templates.empty()
                        ? std::string("Several parties are competing, including {entities}.")
                        : spec.answer_templates[rng.next_below(spec.answer_templates.size())];
                r.answer_text = detail::fill(tpl, "{entities}", entities);
            }
            r.record_id = task.engine + "-" + task.location + "-" + task.query_id + "-r" +
                          std::to_string(task.replica) + "-answer";
            r.collected_at_ms =
                detail::kCaptureEpochMs + static_cast<std::int64_t>(records.size());
            records.push_back(std::move(r));
        }
    }

    // Canonical output order, independent of generation order.
    std::sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
        return std::tie(a.engine, a.location, a.query_id, a.replica, a.section, a.rank) <
               std::tie(b.engine, b.location, b.query_id, b.replica, b.section, b.rank);
    });
    // Re-stamp times in canonical order so the file is reproducible.
    for (std::size_t i = 0; i < records.size(); ++i)
        records[i].collected_at_ms = detail::kCaptureEpochMs + static_cast<std::int64_t>(i);

    ingest::write_results(out_path, records);
    return out_path;
}

// ---------------------------------------------------------------------------
// Human-pacing event log
// ---------------------------------------------------------------------------

struct PacingConfig {
    int keystroke_ms = 100;
    int keystroke_jitter_ms = 0;
    int scrolls = 3;
    int scroll_ms = 400;
    int scroll_jitter_ms = 0;
    int collect_ms = 250;
};

struct PacingEvent {
    std::size_t task_index = 0;
    std::string action;  // "type", "scroll", "collect"
    std::int64_t t_ms = 0;  // offset from the task start
};

/// Emits per-action timestamps for every task in the plan. Purely cosmetic:
/// pacing affects the log only, never the collected results.
inline std::vector<PacingEvent> simulate_human_pacing(const std::vector<BotTask>& plan,
                                                      const PacingConfig& pacing,
                                                      std::uint64_t seed) {
    std::vector<PacingEvent> events;
    for (std::size_t t = 0; t < plan.size(); ++t) {
        auto rng = CounterRng::stream(seed, "pacing|" + std::to_string(t));
        std::int64_t clock = 0;
        auto jitter = [&](int amount) {
            return amount > 0 ? static_cast<std::int64_t>(
                                    rng.next_below(static_cast<std::uint64_t>(amount) + 1))
                              : 0;
        };
        for (std::size_t c = 0; c < plan[t].query_text.size(); ++c) {
            clock += pacing.keystroke_ms + jitter(pacing.keystroke_jitter_ms);
            events.push_back({t, "type", clock});
        }
        for (int s = 0; s < pacing.scrolls; ++s) {
            clock += pacing.scroll_ms + jitter(pacing.scroll_jitter_ms);
            events.push_back({t, "scroll", clock});
        }
        clock += pacing.collect_ms;
        events.push_back({t, "collect", clock});
    }
    return events;
}

}  // namespace salience::sim
