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

#include <optional>
#include <string>

#include <json.hpp>

#include "salience/domain.hpp"

// JSON codecs for the config file and the capture schema. Field names are
// part of the on-disk contract documented in the README; do not rename them.

namespace salience {

namespace codec {

inline std::string section_name(Section s) {
    switch (s) {
        case Section::Main: return "Main";
        case Section::TopNews: return "TopNews";
        case Section::PeopleAlsoAsk: return "PeopleAlsoAsk";
        case Section::LlmAnswer: return "LlmAnswer";
    }
    return "";
}

inline std::optional<Section> section_from_name(const std::string& s) {
    if (s == "Main") return Section::Main;
    if (s == "TopNews") return Section::TopNews;
    if (s == "PeopleAlsoAsk") return Section::PeopleAlsoAsk;
    if (s == "LlmAnswer") return Section::LlmAnswer;
    return std::nullopt;
}

inline std::string site_category_name(SiteCategory c) {
    switch (c) {
        case SiteCategory::News: return "News";
        case SiteCategory::MediaPublications: return "Media Publications";
        case SiteCategory::ReferenceDefinition: return "Reference definition";
        case SiteCategory::ScienceAcademic: return "Science/Academic";
        case SiteCategory::Political: return "Political";
        case SiteCategory::SocialMedia: return "Social Media";
        case SiteCategory::ForumsDiscussionBoards: return "Forums/Discussion Boards";
        case SiteCategory::EntertainmentServices: return "Entertainment Services";
        case SiteCategory::EcommerceRetail: return "E-commerce/Retail Platforms";
        case SiteCategory::CorporateWebsites: return "Corporate Websites";
        case SiteCategory::EducationalPlatforms: return "Educational Platforms";
        case SiteCategory::SearchEnginesAggregators: return "Search Engines/Aggregators";
        case SiteCategory::UtilitiesTools: return "Utilities/Tools";
        case SiteCategory::Blogs: return "Blogs";
        case SiteCategory::AdultGamblingRestricted: return "Adult/Gambling/Restricted";
        case SiteCategory::FactCheckers: return "Fact-Checkers";
    }
    return "";
}

inline std::optional<SiteCategory> site_category_from_name(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(SiteCategory::FactCheckers); ++i) {
        const auto c = static_cast<SiteCategory>(i);
        if (site_category_name(c) == s) return c;
    }
    return std::nullopt;
}

}  // namespace codec

inline void to_json(nlohmann::json& j, const LocationSpec& loc) {
    j = nlohmann::json{{"country_or_county", loc.country_or_county}};
    if (loc.poll_leaning) {
        switch (*loc.poll_leaning) {
            case PollLeaning::Dem: j["poll_leaning"] = "Dem"; break;
            case PollLeaning::Rep: j["poll_leaning"] = "Rep"; break;
            case PollLeaning::Contested: j["poll_leaning"] = "Contested"; break;
        }
    }
}

inline void from_json(const nlohmann::json& j, LocationSpec& loc) {
    loc.country_or_county = j.at("country_or_county").get<std::string>();
    loc.poll_leaning.reset();
    if (j.contains("poll_leaning")) {
        const auto s = j.at("poll_leaning").get<std::string>();
        if (s == "Dem") loc.poll_leaning = PollLeaning::Dem;
        else if (s == "Rep") loc.poll_leaning = PollLeaning::Rep;
        else if (s == "Contested") loc.poll_leaning = PollLeaning::Contested;
        else throw SchemaViolation("unknown poll_leaning '" + s + "'");
    }
}

inline void to_json(nlohmann::json& j, const QuerySpec& q) {
    j = nlohmann::json{
        {"id", q.id},
        {"text", q.text},
        {"language", q.language},
        {"kind", q.kind == QueryKind::EntityQuery ? "entity" : "issue"},
        {"platform", q.platform == Platform::SE ? "se" : "llm"},
    };
}

inline void from_json(const nlohmann::json& j, QuerySpec& q) {
    q.id = j.value("id", "");
    q.text = j.at("text").get<std::string>();
    q.language = j.at("language").get<std::string>();
    const auto kind = j.value("kind", "entity");
    if (kind == "entity") q.kind = QueryKind::EntityQuery;
    else if (kind == "issue") q.kind = QueryKind::IssueQuery;
    else throw SchemaViolation("unknown query kind '" + kind + "'");
    const auto platform = j.value("platform", "se");
    if (platform == "se") q.platform = Platform::SE;
    else if (platform == "llm") q.platform = Platform::LLM;
    else throw SchemaViolation("unknown query platform '" + platform + "'");
}

inline void to_json(nlohmann::json& j, const AuditConfig& c) {
    j = nlohmann::json{
        {"election", c.election == Election::EU2024 ? "EU2024" : "US2024"},
        {"engines", c.engines},
        {"locations", c.locations},
        {"languages", c.languages},
        {"queries", c.queries},
        {"replicas_per_location", c.replicas_per_location},
        {"seed", c.seed},
    };
}

inline void from_json(const nlohmann::json& j, AuditConfig& c) {
    const auto election = j.at("election").get<std::string>();
    if (election == "EU2024") c.election = Election::EU2024;
    else if (election == "US2024") c.election = Election::US2024;
    else throw SchemaViolation("unknown election '" + election + "'");
    c.engines = j.at("engines").get<std::vector<std::string>>();
    c.locations = j.at("locations").get<std::vector<LocationSpec>>();
    c.languages = j.at("languages").get<std::vector<std::string>>();
    c.queries = j.at("queries").get<std::vector<QuerySpec>>();
    if (!j.at("replicas_per_location").is_number_integer())
        throw SchemaViolation("replicas_per_location must be an integer");
    c.replicas_per_location = j.at("replicas_per_location").get<int>();
    if (!j.at("seed").is_number_unsigned())
        throw SchemaViolation("seed must be an unsigned integer");
    c.seed = j.at("seed").get<std::uint64_t>();
    // Queries without an explicit id get a positional one.
    for (std::size_t i = 0; i < c.queries.size(); ++i) {
        if (c.queries[i].id.empty()) c.queries[i].id = "q" + std::to_string(i);
    }
}

inline void to_json(nlohmann::json& j, const ResultRecord& r) {
    j = nlohmann::json{
        {"record_id", r.record_id}, {"engine", r.engine},
        {"location", r.location},   {"language", r.language},
        {"query_id", r.query_id},   {"replica", r.replica},
        {"section", codec::section_name(r.section)},
        {"collected_at", r.collected_at_ms},
    };
    if (r.rank) j["rank"] = *r.rank;
    if (r.url) j["url"] = *r.url;
    if (r.headline) j["headline"] = *r.headline;
    if (r.answer_text) j["answer_text"] = *r.answer_text;
    if (r.site_category) j["site_category"] = codec::site_category_name(*r.site_category);
}

inline void from_json(const nlohmann::json& j, ResultRecord& r) {
    r.record_id = j.at("record_id").get<std::string>();
    r.engine = j.at("engine").get<std::string>();
    r.location = j.at("location").get<std::string>();
    r.language = j.at("language").get<std::string>();
    r.query_id = j.at("query_id").get<std::string>();
    r.replica = j.at("replica").get<int>();
    const auto section = codec::section_from_name(j.at("section").get<std::string>());
    if (!section) throw SchemaViolation("unknown section '" +
                                        j.at("section").get<std::string>() + "'");
    r.section = *section;
    r.collected_at_ms = j.value("collected_at", static_cast<std::int64_t>(0));
    r.rank.reset();
    if (j.contains("rank")) r.rank = j.at("rank").get<int>();
    r.url.reset();
    if (j.contains("url")) r.url = j.at("url").get<std::string>();
    r.headline.reset();
    if (j.contains("headline")) r.headline = j.at("headline").get<std::string>();
    r.answer_text.reset();
    if (j.contains("answer_text")) r.answer_text = j.at("answer_text").get<std::string>();
    r.site_category.reset();
    if (j.contains("site_category")) {
        const auto sc = codec::site_category_from_name(j.at("site_category").get<std::string>());
        if (!sc) throw SchemaViolation("unknown site_category '" +
                                       j.at("site_category").get<std::string>() + "'");
        r.site_category = sc;
    }
}

}  // namespace salience
