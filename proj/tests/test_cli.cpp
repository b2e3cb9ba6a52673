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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "salience/cli.hpp"

using namespace salience;

namespace {

const std::string kFixtures = SALIENCE_FIXTURE_DIR;

std::string temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli: simulate then analyze on the bundled EU demo", "[cli]") {
    const auto dir = temp_dir("cli_eu");
    const auto capture = dir + "/capture.jsonl";
    std::ostringstream err;
    REQUIRE(cli::run({"simulate", "--config", kFixtures + "/config_eu_demo.json", "--engines",
                      kFixtures + "/engines_eu_demo.json", "--out", capture},
                     std::cout, err) == cli::kExitOk);
    // 4 engines x 5 locations x 6 queries x 5 replicas x 8 results.
    const auto records = ingest::load_results(capture);
    REQUIRE(records.size() == 4u * 5 * 6 * 5 * 8);

    const auto reports = dir + "/reports";
    REQUIRE(cli::run({"analyze", "--capture", capture, "--lexicon",
                      kFixtures + "/lexicon_eu2024.csv", "--scheme", "eu5", "--benchmark",
                      "uniform", "--benchmark", "polls=" + kFixtures + "/benchmark_eu_polls.csv",
                      "--out-dir", reports, "--seed", "11"},
                     std::cout, err) == cli::kExitOk);
    REQUIRE(std::filesystem::exists(reports + "/proportions.csv"));
    REQUIRE(std::filesystem::exists(reports + "/proportions.txt"));
    REQUIRE(std::filesystem::exists(reports + "/outcomes.csv"));
    REQUIRE(std::filesystem::exists(reports + "/diff_tables.txt"));
    REQUIRE(std::filesystem::exists(reports + "/omnibus.txt"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: rerunning simulate is byte-identical", "[cli][determinism]") {
    const auto dir = temp_dir("cli_det");
    std::ostringstream err;
    for (const char* name : {"/a.jsonl", "/b.jsonl"}) {
        REQUIRE(cli::run({"simulate", "--config", kFixtures + "/config_eu_llm_demo.json",
                          "--engines", kFixtures + "/engines_eu_llm_demo.json", "--out",
                          dir + name},
                         std::cout, err) == cli::kExitOk);
    }
    REQUIRE(slurp(dir + "/a.jsonl") == slurp(dir + "/b.jsonl"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: a missing benchmark file exits 2 and names the path", "[cli]") {
    const auto dir = temp_dir("cli_missing");
    const auto capture = dir + "/capture.jsonl";
    std::ostringstream err;
    REQUIRE(cli::run({"simulate", "--config", kFixtures + "/config_eu_demo.json", "--engines",
                      kFixtures + "/engines_eu_demo.json", "--out", capture},
                     std::cout, err) == cli::kExitOk);
    const int code = cli::run({"analyze", "--capture", capture, "--lexicon",
                               kFixtures + "/lexicon_eu2024.csv", "--scheme", "eu5",
                               "--benchmark", "polls=/no/such/file.csv", "--out-dir",
                               dir + "/reports"},
                              std::cout, err);
    REQUIRE(code == cli::kExitInput);
    REQUIRE(err.str().find("/no/such/file.csv") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: a bad seed type in the config exits 2", "[cli]") {
    const auto dir = temp_dir("cli_badseed");
    const auto config = dir + "/config.json";
    {
        std::ofstream out(config);
        out << R"({"election":"EU2024","engines":["e"],"locations":)"
            << R"([{"country_or_county":"PT"}],"languages":["en"],)"
            << R"("queries":[{"text":"x","language":"en"}],)"
            << R"("replicas_per_location":1,"seed":"not-a-number"})";
    }
    std::ostringstream err;
    const int code = cli::run({"simulate", "--config", config, "--engines",
                               kFixtures + "/engines_eu_demo.json", "--out", dir + "/c.jsonl"},
                              std::cout, err);
    REQUIRE(code == cli::kExitInput);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: unknown scheme and malformed benchmark flags exit 2", "[cli]") {
    std::ostringstream err;
    REQUIRE(cli::run({"analyze", "--capture", "x.jsonl", "--scheme", "eu7", "--out-dir", "r"},
                     std::cout, err) == cli::kExitInput);
    REQUIRE(cli::run({"analyze", "--capture", "x.jsonl", "--scheme", "eu5", "--benchmark",
                      "nonsense=path", "--out-dir", "r"},
                     std::cout, err) == cli::kExitInput);
    REQUIRE(cli::run({"analyze", "--capture", "x.jsonl", "--scheme", "eu5", "--benchmark",
                      "media", "--out-dir", "r"},
                     std::cout, err) == cli::kExitInput);
}

TEST_CASE("cli: usissue5 analysis runs end to end", "[cli][issues]") {
    const auto dir = temp_dir("cli_issues");
    const auto capture = dir + "/capture.jsonl";
    {
        // A small hand-written capture mentioning issue terms.
        std::ofstream out(capture);
        const char* headlines[] = {"Where candidates stand on immigration",
                                   "Economy and inflation in focus",
                                   "Healthcare plans compared",
                                   "Climate change on the ballot",
                                   "Gun policy debate continues"};
        for (int q = 0; q < 5; ++q) {
            out << R"({"record_id":"r)" << q
                << R"(","engine":"se-a","location":"GLOBAL","language":"en","query_id":"q)" << q
                << R"(","replica":1,"rank":1,"section":"Main","url":"https://x.example/)" << q
                << R"(","headline":")" << headlines[q] << R"("})"
                << "\n";
        }
    }
    std::ostringstream err;
    const int code = cli::run(
        {"analyze", "--capture", capture, "--scheme", "usissue5", "--issues",
         kFixtures + "/issues_us2024.csv", "--surveys",
         kFixtures + "/survey_pew_like.csv," + kFixtures + "/survey_yougov_like.csv",
         "--benchmark", "uniform", "--benchmark",
         "issue_importance=" + kFixtures + "/benchmark_us_issue_importance.csv", "--out-dir",
         dir + "/reports", "--seed", "3"},
        std::cout, err);
    INFO(err.str());
    REQUIRE(code == cli::kExitOk);
    const auto proportions = slurp(dir + "/reports/proportions.csv");
    REQUIRE(proportions.find("Rep++") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli: analyze rerun is byte-identical across all reports", "[cli][determinism]") {
    const auto dir = temp_dir("cli_det_analyze");
    const auto capture = dir + "/capture.jsonl";
    std::ostringstream err;
    REQUIRE(cli::run({"simulate", "--config", kFixtures + "/config_us_demo.json", "--engines",
                      kFixtures + "/engines_us_demo.json", "--out", capture},
                     std::cout, err) == cli::kExitOk);
    for (const char* sub : {"/r1", "/r2"}) {
        REQUIRE(cli::run({"analyze", "--capture", capture, "--lexicon",
                          kFixtures + "/lexicon_us2024.csv", "--scheme", "usparty",
                          "--benchmark", "uniform", "--benchmark",
                          "polls=" + kFixtures + "/benchmark_us_polls.csv", "--out-dir",
                          dir + sub, "--seed", "21"},
                         std::cout, err) == cli::kExitOk);
    }
    for (const char* file : {"/proportions.csv", "/proportions.txt", "/outcomes.csv",
                             "/diff_tables.txt", "/omnibus.txt", "/omnibus.csv"}) {
        REQUIRE(slurp(dir + "/r1" + file) == slurp(dir + "/r2" + file));
    }
    std::filesystem::remove_all(dir);
}
