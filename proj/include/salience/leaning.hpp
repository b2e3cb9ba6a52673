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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "salience/domain.hpp"
#include "salience/errors.hpp"
#include "salience/ingest.hpp"

namespace salience::leaning {

/// Resolves a party id to its leaning category through the lexicon's
/// party -> group -> category chain. Group aliases (a party id that names a
/// parliamentary group directly) resolve the same way. Throws UnmappedParty
/// for unknown ids and for ids whose group is deliberately uncounted.
inline Category map_party(const std::string& party_id, const ingest::EntityLexicon& lexicon) {
    const auto category = lexicon.category_of(party_id);
    if (!category)
        throw UnmappedParty("party '" + party_id + "' maps to an uncounted group");
    return *category;
}

struct IssueThresholds {
    double t1 = 0.05;
    double t2 = 0.15;
};

/// Piecewise classification of a topic leaning score into the five
/// issue-importance categories. Symmetric around zero:
///   L >= t2        -> Rep++        t1 <= L < t2   -> Rep+
///   -t1 < L < t1   -> Neutral      -t2 < L <= -t1 -> Dem+
///   L <= -t2       -> Dem++
inline Category classify_issue(double score, const IssueThresholds& thresholds = {}) {
    const double t1 = thresholds.t1, t2 = thresholds.t2;
    if (!(t1 > 0.0) || !(t1 < t2))
        throw BadThresholds("issue thresholds need 0 < t1 < t2, got t1=" + std::to_string(t1) +
                            ", t2=" + std::to_string(t2));
    const Scheme s = Scheme::USIssue5;
    if (score >= t2) return Category(s, 0);   // Rep++
    if (score >= t1) return Category(s, 1);   // Rep+
    if (score > -t1) return Category(s, 2);   // Neutral
    if (score > -t2) return Category(s, 3);   // Dem+
    return Category(s, 4);                    // Dem++
}

struct IssueLeaning {
    std::string topic;
    std::vector<double> rep_share;  // per survey containing the topic
    std::vector<double> dem_share;
    double score = 0.0;             // mean of per-survey (R - D)
    Category category = Category(Scheme::USIssue5, 2);
};

/// Computes per-topic leaning scores from the survey tables. A topic present
/// in several surveys gets the mean of its per-survey scores; a topic present
/// in a single survey keeps that value directly.
inline std::vector<IssueLeaning> issue_scores(
    const std::vector<ingest::SurveyTable>& surveys,
    const std::vector<std::string>& topics = ingest::canonical_issues(),
    const IssueThresholds& thresholds = {}) {
    std::vector<IssueLeaning> out;
    out.reserve(topics.size());
    for (const auto& topic : topics) {
        IssueLeaning entry;
        entry.topic = topic;
        double sum = 0.0;
        for (const auto& survey : surveys) {
            const auto it = survey.rows.find(topic);
            if (it == survey.rows.end()) continue;
            const double r = static_cast<double>(it->second.rep_selected) /
                             static_cast<double>(survey.rep_total);
            const double d = static_cast<double>(it->second.dem_selected) /
                             static_cast<double>(survey.dem_total);
            entry.rep_share.push_back(r);
            entry.dem_share.push_back(d);
            sum += r - d;
        }
        if (entry.rep_share.empty())
            throw TopicAbsentEverywhere("topic '" + topic + "' appears in no survey");
        entry.score = sum / static_cast<double>(entry.rep_share.size());
        entry.category = classify_issue(entry.score, thresholds);
        out.push_back(std::move(entry));
    }
    return out;
}

/// Convenience view: topic -> category, as needed by the issue dedup path.
inline std::map<std::string, Category> issue_category_map(
    const std::vector<IssueLeaning>& leanings) {
    std::map<std::string, Category> out;
    for (const auto& l : leanings) out.emplace(l.topic, l.category);
    return out;
}

}  // namespace salience::leaning
