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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "salience/ingest.hpp"

using namespace salience;

namespace {

const std::string kFixtures = SALIENCE_FIXTURE_DIR;

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& name, const std::string& content) {
        path = std::filesystem::temp_directory_path() / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

const char* kSerpLine =
    R"({"record_id":"r1","engine":"se-alpha","location":"PT","language":"en","query_id":"q0",)"
    R"("replica":1,"rank":1,"section":"Main","url":"https://a.example/x",)"
    R"("headline":"election guide","collected_at":1704067200000})";

}  // namespace

TEST_CASE("load_results: empty file gives an empty list", "[ingest][capture]") {
    TempFile f("capture_empty.jsonl", "");
    REQUIRE(ingest::load_results(f.path.string()).empty());
}

TEST_CASE("load_results: one valid SERP line", "[ingest][capture]") {
    TempFile f("capture_one.jsonl", std::string(kSerpLine) + "\n");
    const auto records = ingest::load_results(f.path.string());
    REQUIRE(records.size() == 1);
    REQUIRE(records[0].section == Section::Main);
    REQUIRE(records[0].engine == "se-alpha");
    REQUIRE(records[0].rank == 1);
    REQUIRE_FALSE(records[0].answer_text.has_value());
}

TEST_CASE("load_results: url plus answer_text violates the schema", "[ingest][capture]") {
    const std::string line =
        R"({"record_id":"r1","engine":"e","location":"PT","language":"en","query_id":"q0",)"
        R"("replica":1,"rank":1,"section":"Main","url":"https://a.example",)"
        R"("headline":"h","answer_text":"also an answer"})";
    TempFile f("capture_bad.jsonl", line + "\n");
    REQUIRE_THROWS_AS(ingest::load_results(f.path.string()), SchemaViolation);
    try {
        ingest::load_results(f.path.string());
    } catch (const SchemaViolation& e) {
        REQUIRE(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("load_results: malformed json reports the line number", "[ingest][capture]") {
    TempFile f("capture_parse.jsonl", std::string(kSerpLine) + "\nnot json at all\n");
    try {
        ingest::load_results(f.path.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("load_results: duplicate rank within a page is rejected", "[ingest][capture]") {
    TempFile f("capture_dup.jsonl", std::string(kSerpLine) + "\n" + kSerpLine + "\n");
    REQUIRE_THROWS_AS(ingest::load_results(f.path.string()), SchemaViolation);
}

TEST_CASE("load_results is order-preserving and idempotent", "[ingest][capture][property]") {
    std::string lines;
    for (int i = 1; i <= 5; ++i) {
        lines += R"({"record_id":"r)" + std::to_string(i) +
                 R"(","engine":"e","location":"PT","language":"en","query_id":"q0",)"
                 R"("replica":1,"rank":)" +
                 std::to_string(i) + R"(,"section":"Main","url":"u","headline":"h"})" + "\n";
    }
    TempFile f("capture_order.jsonl", lines);
    const auto first = ingest::load_results(f.path.string());
    const auto second = ingest::load_results(f.path.string());
    REQUIRE(first.size() == 5);
    for (std::size_t i = 0; i < first.size(); ++i) {
        REQUIRE(first[i].record_id == "r" + std::to_string(i + 1));
        REQUIRE(first[i].record_id == second[i].record_id);
        REQUIRE(first[i].rank == second[i].rank);
    }
}

TEST_CASE("write_results round-trips through load_results", "[ingest][capture]") {
    ResultRecord serp;
    serp.record_id = "a";
    serp.engine = "e";
    serp.location = "PT";
    serp.language = "en";
    serp.query_id = "q0";
    serp.replica = 2;
    serp.rank = 3;
    serp.section = Section::TopNews;
    serp.url = "https://x.example";
    serp.headline = "headline";
    serp.site_category = SiteCategory::News;
    serp.collected_at_ms = 1704067200123;

    ResultRecord llm;
    llm.record_id = "b";
    llm.engine = "llm";
    llm.location = "PT";
    llm.language = "en";
    llm.query_id = "q1";
    llm.replica = 1;
    llm.section = Section::LlmAnswer;
    llm.answer_text = "answer";

    const auto path = (std::filesystem::temp_directory_path() / "roundtrip.jsonl").string();
    ingest::write_results(path, {serp, llm});
    const auto back = ingest::load_results(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == 2);
    REQUIRE(back[0].site_category == SiteCategory::News);
    REQUIRE(back[0].rank == 3);
    REQUIRE(back[1].section == Section::LlmAnswer);
    REQUIRE(back[1].answer_text == "answer");
    REQUIRE_FALSE(back[1].rank.has_value());
}

TEST_CASE("load_benchmark: seat counts normalize to proportions", "[ingest][benchmark]") {
    TempFile f("bench_seats.csv",
               "stratum,RadLeft,MainLeft,Greens,MainRight,RadRight\nPT,1,3,1,3,2\n");
    const auto bench =
        ingest::load_benchmark(f.path.string(), BenchmarkKind::Polls, Scheme::EU5);
    REQUIRE(bench.expected("PT", Category(Scheme::EU5, 0)) == Catch::Approx(0.1));
    REQUIRE(bench.expected("PT", Category(Scheme::EU5, 1)) == Catch::Approx(0.3));
    REQUIRE(bench.expected("PT", Category(Scheme::EU5, 4)) == Catch::Approx(0.2));
}

TEST_CASE("load_benchmark: misordered columns still land on categories", "[ingest][benchmark]") {
    TempFile f("bench_cols.csv",
               "stratum,RadRight,RadLeft,MainLeft,Greens,MainRight\nPT,2,1,3,1,3\n");
    const auto bench =
        ingest::load_benchmark(f.path.string(), BenchmarkKind::Media, Scheme::EU5);
    REQUIRE(bench.expected("PT", Category(Scheme::EU5, 4)) == Catch::Approx(0.2));
    REQUIRE(bench.expected("PT", Category(Scheme::EU5, 0)) == Catch::Approx(0.1));
}

TEST_CASE("load_benchmark: a missing category column fails", "[ingest][benchmark]") {
    TempFile f("bench_missing.csv", "stratum,RadLeft,MainLeft,MainRight,RadRight\nPT,1,1,1,1\n");
    REQUIRE_THROWS_AS(ingest::load_benchmark(f.path.string(), BenchmarkKind::Polls, Scheme::EU5),
                      MissingCategory);
}

TEST_CASE("load_benchmark: negative and zero-total rows fail", "[ingest][benchmark]") {
    TempFile neg("bench_neg.csv",
                 "stratum,RadLeft,MainLeft,Greens,MainRight,RadRight\nPT,1,-1,1,1,1\n");
    REQUIRE_THROWS_AS(
        ingest::load_benchmark(neg.path.string(), BenchmarkKind::Polls, Scheme::EU5),
        NegativeValue);
    TempFile zero("bench_zero.csv",
                  "stratum,RadLeft,MainLeft,Greens,MainRight,RadRight\nPT,0,0,0,0,0\n");
    REQUIRE_THROWS_AS(
        ingest::load_benchmark(zero.path.string(), BenchmarkKind::Polls, Scheme::EU5),
        ZeroTotal);
}

TEST_CASE("every bundled benchmark row sums to one", "[ingest][benchmark][property]") {
    const struct {
        const char* file;
        Scheme scheme;
        BenchmarkKind kind;
    } fixtures[] = {
        {"benchmark_eu_polls.csv", Scheme::EU5, BenchmarkKind::Polls},
        {"benchmark_eu_results2019.csv", Scheme::EU5, BenchmarkKind::PriorResults},
        {"benchmark_eu_media.csv", Scheme::EU5, BenchmarkKind::Media},
        {"benchmark_us_polls.csv", Scheme::USParty, BenchmarkKind::Polls},
        {"benchmark_us_prior.csv", Scheme::USParty, BenchmarkKind::PriorResults},
        {"benchmark_us_media.csv", Scheme::USParty, BenchmarkKind::Media},
        {"benchmark_us_issue_importance.csv", Scheme::USIssue5, BenchmarkKind::IssueImportance},
    };
    for (const auto& fx : fixtures) {
        const auto bench = ingest::load_benchmark(kFixtures + "/" + fx.file, fx.kind, fx.scheme);
        for (const auto& stratum : bench.strata()) {
            double total = 0.0;
            for (const auto& cat : categories(fx.scheme)) total += bench.expected(stratum, cat);
            REQUIRE(total == Catch::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("load_lexicon: afd resolves through party and group", "[ingest][lexicon]") {
    const auto lexicon =
        ingest::EntityLexicon::load(kFixtures + "/lexicon_eu2024.csv", Scheme::EU5);
    REQUIRE(lexicon.category_of("Alternative for Germany - Germany") ==
            Category::from_name(Scheme::EU5, "RadRight"));
    bool found = false;
    for (const auto& e : lexicon.entries()) {
        if (e.surface == "afd") {
            found = true;
            REQUIRE(e.party_id == "Alternative for Germany - Germany");
        }
    }
    REQUIRE(found);
}

TEST_CASE("load_lexicon: duplicate surfaces are rejected", "[ingest][lexicon]") {
    TempFile f("lex_dup.csv",
               "kind,surface,party,country,group,category\n"
               "family,,,,ID,RadRight\n"
               "party,,P1,,ID,\n"
               "entry,afd,P1,de,,\n"
               "entry,afd,P1,de,,\n");
    REQUIRE_THROWS_AS(ingest::EntityLexicon::load(f.path.string(), Scheme::EU5),
                      DuplicateSurface);
}

TEST_CASE("load_lexicon: entries need a mapped party", "[ingest][lexicon]") {
    TempFile f("lex_unmapped.csv",
               "kind,surface,party,country,group,category\n"
               "family,,,,ID,RadRight\n"
               "entry,afd,Unknown Party,de,,\n");
    REQUIRE_THROWS_AS(ingest::EntityLexicon::load(f.path.string(), Scheme::EU5), UnmappedParty);
}

TEST_CASE("load_lexicon: an empty lexicon is valid and matches nothing", "[ingest][lexicon]") {
    TempFile f("lex_empty.csv", "kind,surface,party,country,group,category\n");
    const auto lexicon = ingest::EntityLexicon::load(f.path.string(), Scheme::EU5);
    REQUIRE(lexicon.entries().empty());
}

TEST_CASE("load_surveys: rows are stored verbatim with totals", "[ingest][survey]") {
    TempFile f("survey_ok.csv",
               "topic,rep_selected,rep_total,dem_selected,dem_total\n"
               "Economy,600,1000,200,1000\n");
    const auto surveys = ingest::load_surveys({f.path.string()});
    REQUIRE(surveys.size() == 1);
    REQUIRE(surveys[0].rows.at("Economy").rep_selected == 600);
    REQUIRE(surveys[0].rows.at("Economy").dem_selected == 200);
    REQUIRE(surveys[0].rep_total == 1000);
    REQUIRE(surveys[0].dem_total == 1000);
}

TEST_CASE("load_surveys: selections above the total fail", "[ingest][survey]") {
    TempFile f("survey_over.csv",
               "topic,rep_selected,rep_total,dem_selected,dem_total\n"
               "Economy,1200,1000,200,1000\n");
    REQUIRE_THROWS_AS(ingest::load_surveys({f.path.string()}), SelectionExceedsTotal);
}

TEST_CASE("load_surveys: a topic may appear in only one survey", "[ingest][survey]") {
    TempFile a("survey_a.csv",
               "topic,rep_selected,rep_total,dem_selected,dem_total\n"
               "Economy,600,1000,200,1000\n");
    TempFile b("survey_b.csv",
               "topic,rep_selected,rep_total,dem_selected,dem_total\n"
               "Economy,500,1000,300,1000\n"
               "Abortion,200,1000,450,1000\n");
    const auto surveys = ingest::load_surveys({a.path.string(), b.path.string()});
    REQUIRE(surveys.size() == 2);
    REQUIRE_FALSE(surveys[0].rows.contains("Abortion"));
    REQUIRE(surveys[1].rows.contains("Abortion"));
}

TEST_CASE("load_surveys: unknown topics are rejected", "[ingest][survey]") {
    TempFile f("survey_topic.csv",
               "topic,rep_selected,rep_total,dem_selected,dem_total\n"
               "Space exploration,10,1000,10,1000\n");
    REQUIRE_THROWS_AS(ingest::load_surveys({f.path.string()}), ParseError);
}
