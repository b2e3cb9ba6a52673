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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>

#include "salience/leaning.hpp"

using namespace salience;

namespace {

const std::string kFixtures = SALIENCE_FIXTURE_DIR;

const ingest::EntityLexicon& eu_lexicon() {
    static const auto lexicon =
        ingest::EntityLexicon::load(kFixtures + "/lexicon_eu2024.csv", Scheme::EU5);
    return lexicon;
}

ingest::SurveyTable survey(const std::string& id, long long rep_total, long long dem_total,
                           std::map<std::string, ingest::SurveyRow> rows) {
    ingest::SurveyTable t;
    t.survey_id = id;
    t.rep_total = rep_total;
    t.dem_total = dem_total;
    t.rows = std::move(rows);
    return t;
}

}  // namespace

TEST_CASE("map_party: national parties resolve to their leaning", "[leaning][party]") {
    REQUIRE(leaning::map_party("Brothers of Italy - Italy", eu_lexicon()) ==
            Category::from_name(Scheme::EU5, "RadRight"));
    REQUIRE(leaning::map_party("Socialist Party - Portugal", eu_lexicon()) ==
            Category::from_name(Scheme::EU5, "MainLeft"));
}

TEST_CASE("map_party: group aliases resolve like their member parties", "[leaning][party]") {
    REQUIRE(leaning::map_party("ECR", eu_lexicon()) ==
            Category::from_name(Scheme::EU5, "RadRight"));
    REQUIRE(leaning::map_party("EPP", eu_lexicon()) ==
            Category::from_name(Scheme::EU5, "MainRight"));
}

TEST_CASE("map_party: newly formed alliances inherit the ID grouping", "[leaning][party]") {
    REQUIRE(leaning::map_party("Patriots for Europe", eu_lexicon()) ==
            Category::from_name(Scheme::EU5, "RadRight"));
    REQUIRE(leaning::map_party("Europe of Sovereign Nations", eu_lexicon()) ==
            Category::from_name(Scheme::EU5, "RadRight"));
}

TEST_CASE("map_party: unknown parties throw", "[leaning][party]") {
    REQUIRE_THROWS_AS(leaning::map_party("No Such Party", eu_lexicon()), UnmappedParty);
}

TEST_CASE("map_party is total on the bundled lexicon", "[leaning][party][property]") {
    // Every surface's party resolves; uncounted spectrum/NI buckets excepted.
    for (const auto& entry : eu_lexicon().entries()) {
        const auto family = eu_lexicon().family_of(entry.party_id);
        if (family == "spectrum" || family == "NI") continue;
        REQUIRE_NOTHROW(leaning::map_party(entry.party_id, eu_lexicon()));
    }
}

TEST_CASE("issue_scores: single-survey arithmetic", "[leaning][issues]") {
    const auto scores = leaning::issue_scores(
        {survey("s1", 1000, 1000, {{"Economy", {600, 200}}})}, {"Economy"});
    REQUIRE(scores.size() == 1);
    REQUIRE(scores[0].score == Catch::Approx(0.4));
}

TEST_CASE("issue_scores: two surveys average", "[leaning][issues]") {
    // L = +0.4 in one survey, +0.2 in the other -> +0.3.
    const auto scores = leaning::issue_scores(
        {survey("s1", 1000, 1000, {{"Economy", {600, 200}}}),
         survey("s2", 500, 500, {{"Economy", {250, 150}}})},
        {"Economy"});
    REQUIRE(scores[0].score == Catch::Approx(0.3));
}

TEST_CASE("issue_scores: a topic in one survey only keeps that value",
          "[leaning][issues]") {
    const auto scores = leaning::issue_scores(
        {survey("s1", 1000, 1000, {{"Economy", {600, 200}}}),
         survey("s2", 400, 400, {{"Economy", {200, 120}}, {"Abortion", {100, 200}}})},
        {"Abortion"});
    REQUIRE(scores[0].score == Catch::Approx(-0.25));
}

TEST_CASE("issue_scores: topic absent everywhere throws", "[leaning][issues]") {
    REQUIRE_THROWS_AS(leaning::issue_scores({survey("s1", 10, 10, {{"Economy", {5, 5}}})},
                                            {"Abortion"}),
                      TopicAbsentEverywhere);
}

TEST_CASE("issue_scores is invariant to survey order", "[leaning][issues][property]") {
    const std::vector<ingest::SurveyTable> surveys = {
        survey("s1", 1000, 1000, {{"Economy", {600, 200}}, {"Abortion", {150, 450}}}),
        survey("s2", 500, 500, {{"Economy", {250, 150}}, {"Abortion", {100, 220}}}),
    };
    auto reversed = surveys;
    std::reverse(reversed.begin(), reversed.end());
    const auto a = leaning::issue_scores(surveys, {"Economy", "Abortion"});
    const auto b = leaning::issue_scores(reversed, {"Economy", "Abortion"});
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].score == Catch::Approx(b[i].score));
        REQUIRE(a[i].category == b[i].category);
    }
}

TEST_CASE("classify_issue: boundary behaviour", "[leaning][issues]") {
    REQUIRE(leaning::classify_issue(0.0).name() == "Neutral");
    REQUIRE(leaning::classify_issue(1.0).name() == "Rep++");
    REQUIRE(leaning::classify_issue(-1.0).name() == "Dem++");
    // Defaults t1=0.05, t2=0.15.
    REQUIRE(leaning::classify_issue(0.08).name() == "Rep+");
    REQUIRE(leaning::classify_issue(0.05).name() == "Rep+");
    REQUIRE(leaning::classify_issue(0.15).name() == "Rep++");
    REQUIRE(leaning::classify_issue(-0.05).name() == "Dem+");
    REQUIRE(leaning::classify_issue(-0.15).name() == "Dem++");
    REQUIRE(leaning::classify_issue(0.049).name() == "Neutral");
}

TEST_CASE("classify_issue: bad thresholds throw", "[leaning][issues]") {
    REQUIRE_THROWS_AS(leaning::classify_issue(0.0, {0.2, 0.1}), BadThresholds);
    REQUIRE_THROWS_AS(leaning::classify_issue(0.0, {0.0, 0.1}), BadThresholds);
    REQUIRE_THROWS_AS(leaning::classify_issue(0.0, {-0.1, 0.1}), BadThresholds);
}

TEST_CASE("classify_issue is antisymmetric", "[leaning][issues][property]") {
    auto mirror = [](const Category& c) {
        return Category(Scheme::USIssue5, category_count(Scheme::USIssue5) - 1 - c.index());
    };
    for (double score = -0.5; score <= 0.5; score += 0.01) {
        const auto pos = leaning::classify_issue(score);
        const auto neg = leaning::classify_issue(-score);
        REQUIRE(neg == mirror(pos));
    }
}

TEST_CASE("bundled surveys pin the documented classifications", "[leaning][issues]") {
    const auto surveys = ingest::load_surveys(
        {kFixtures + "/survey_pew_like.csv", kFixtures + "/survey_yougov_like.csv"});
    const auto scores = leaning::issue_scores(surveys);
    auto category_of = [&](const std::string& topic) -> std::string {
        for (const auto& s : scores)
            if (s.topic == topic) return std::string(s.category.name());
        FAIL("topic not scored: " + topic);
        return "";
    };
    REQUIRE(category_of("Economy") == "Rep+");
    REQUIRE(category_of("Immigration") == "Rep++");
    REQUIRE(category_of("Abortion") == "Dem+");
    REQUIRE(category_of("Civil rights and civil liberties") == "Dem++");
    REQUIRE(category_of("Gun policy") == "Neutral");
}
