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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "salience/domain.hpp"
#include "salience/errors.hpp"
#include "salience/extract.hpp"
#include "salience/ingest.hpp"
#include "salience/json_codec.hpp"
#include "salience/leaning.hpp"
#include "salience/report.hpp"
#include "salience/simulate.hpp"

namespace salience::cli {

// Exit codes: 0 success, 2 input error, 3 statistical-engine failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitStats = 3;

inline AuditConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
        return j.get<AuditConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaViolation(path + ": " + e.what());
    }
}

/// `salience simulate`: run an audit config against mock engine specs.
inline int cmd_simulate(const std::string& config_path, const std::string& specs_path,
                        const std::string& out_path, std::ostream& err = std::cerr) {
    try {
        const auto config = load_config(config_path);
        const auto issues = validate_config(config);
        if (!issues.empty()) {
            for (const auto& issue : issues) err << config_path << ": " << issue.message << "\n";
            return kExitInput;
        }
        const auto specs = sim::load_engine_specs(specs_path);
        sim::run_audit(config, specs, out_path);
        return kExitOk;
    } catch (const Error& e) {
        err << "simulate: " << e.what() << "\n";
        return kExitInput;
    }
}

struct AnalyzeArgs {
    std::string capture_path;
    std::string lexicon_path;                 // entity schemes
    std::string issues_path;                  // usissue5
    std::vector<std::string> survey_paths;    // usissue5
    Scheme scheme = Scheme::EU5;
    std::vector<std::pair<BenchmarkKind, std::string>> benchmarks;  // path empty => uniform
    std::string out_dir;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int n_perms = 9999;
    int n_bootstrap = 1000;
    std::string context;
    std::optional<int> top_k;
    leaning::IssueThresholds thresholds;
};

/// `salience analyze`: extraction, leaning mapping, statistical battery,
/// report files.
inline int cmd_analyze(const AnalyzeArgs& args, std::ostream& err = std::cerr) {
    std::vector<ResultRecord> records;
    std::vector<Mention> mentions;
    std::vector<Benchmark> benchmarks;
    try {
        records = ingest::load_results(args.capture_path);

        for (const auto& [kind, path] : args.benchmarks) {
            if (kind == BenchmarkKind::Uniform && path.empty()) {
                benchmarks.push_back(Benchmark::uniform(args.scheme));
            } else {
                if (!std::filesystem::exists(path))
                    throw ParseError("benchmark file '" + path + "' does not exist");
                benchmarks.push_back(ingest::load_benchmark(path, kind, args.scheme));
            }
        }
        if (benchmarks.empty()) benchmarks.push_back(Benchmark::uniform(args.scheme));

        if (args.scheme == Scheme::USIssue5) {
            if (args.issues_path.empty() || args.survey_paths.empty())
                throw ParseError("scheme usissue5 needs --issues and --surveys");
            const auto catalog = extract::IssueCatalog::load(args.issues_path);
            const auto surveys = ingest::load_surveys(args.survey_paths);
            const auto leanings =
                leaning::issue_scores(surveys, ingest::canonical_issues(), args.thresholds);
            const auto topic_categories = leaning::issue_category_map(leanings);
            const auto resolve = extract::resolver_for_issues(topic_categories);
            for (const auto& record : records) {
                const auto hits = extract::match_issues(record, catalog);
                for (auto& m : extract::dedupe(hits, args.scheme, resolve))
                    mentions.push_back(std::move(m));
            }
        } else {
            if (args.lexicon_path.empty())
                throw ParseError("entity schemes need --lexicon");
            const auto lexicon = ingest::EntityLexicon::load(args.lexicon_path, args.scheme);
            const auto resolve = extract::resolver_for(lexicon);
            for (const auto& record : records) {
                const auto hits = extract::match_lexicon(record, lexicon);
                for (auto& m : extract::dedupe(hits, args.scheme, resolve))
                    mentions.push_back(std::move(m));
            }
        }
    } catch (const Error& e) {
        err << "analyze: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        report::AnalysisOptions options;
        options.scheme = args.scheme;
        options.alpha = args.alpha;
        options.seed = args.seed;
        options.n_perms = args.n_perms;
        options.n_bootstrap = args.n_bootstrap;
        options.context =
            args.context.empty() ? std::string(scheme_name(args.scheme)) : args.context;
        options.top_k = args.top_k;

        const auto result = report::analyze(records, mentions, benchmarks, options);

        std::filesystem::create_directories(args.out_dir);
        const auto dir = std::filesystem::path(args.out_dir);
        report::write_proportions_csv(result, (dir / "proportions.csv").string());
        report::write_proportions_txt(result, (dir / "proportions.txt").string());
        report::write_outcomes_csv(result, (dir / "outcomes.csv").string());
        report::write_diff_tables(result, (dir / "diff_tables.txt").string());
        report::write_omnibus(result, (dir / "omnibus.txt").string(),
                              (dir / "omnibus.csv").string());
        return kExitOk;
    } catch (const Error& e) {
        err << "analyze: statistical engine: " << e.what() << "\n";
        return kExitStats;
    }
}

inline std::optional<std::pair<BenchmarkKind, std::string>> parse_benchmark_flag(
    const std::string& flag) {
    const auto eq = flag.find('=');
    const std::string kind_name = flag.substr(0, eq);
    const auto kind = benchmark_kind_from_name(kind_name);
    if (!kind) return std::nullopt;
    std::string path = (eq == std::string::npos) ? "" : flag.substr(eq + 1);
    if (*kind != BenchmarkKind::Uniform && path.empty()) return std::nullopt;
    return std::make_pair(*kind, std::move(path));
}

/// Full command-line front end; returns the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"political-salience audit toolkit"};
    app.require_subcommand(1);

    // simulate
    std::string config_path, specs_path, sim_out;
    auto* simulate = app.add_subcommand("simulate", "run a simulated audit");
    simulate->add_option("--config", config_path, "audit config (JSON)")->required();
    simulate->add_option("--engines", specs_path, "mock engine specs (JSON)")->required();
    simulate->add_option("--out", sim_out, "capture output path")->required();

    // analyze
    AnalyzeArgs analyze_args;
    std::string scheme_flag = "eu5";
    std::vector<std::string> benchmark_flags;
    std::string surveys_flag;
    int top_k_flag = 0;
    auto* analyze = app.add_subcommand("analyze", "analyze a capture file");
    analyze->add_option("--capture", analyze_args.capture_path, "capture file")->required();
    analyze->add_option("--lexicon", analyze_args.lexicon_path, "entity lexicon (CSV)");
    analyze->add_option("--issues", analyze_args.issues_path, "issue catalog (CSV)");
    analyze->add_option("--surveys", surveys_flag, "survey CSVs, comma separated");
    analyze->add_option("--scheme", scheme_flag, "eu5 | usparty | usissue5")->required();
    analyze->add_option("--benchmark", benchmark_flags,
                        "kind=path (uniform|media|polls|prior|issue_importance); "
                        "'uniform' needs no path; repeatable");
    analyze->add_option("--out-dir", analyze_args.out_dir, "report directory")->required();
    analyze->add_option("--alpha", analyze_args.alpha, "significance level");
    analyze->add_option("--seed", analyze_args.seed, "random seed");
    analyze->add_option("--perms", analyze_args.n_perms, "permutation count");
    analyze->add_option("--bootstrap", analyze_args.n_bootstrap, "bootstrap resamples");
    analyze->add_option("--context", analyze_args.context, "Holm correction family");
    analyze->add_option("--top-k", top_k_flag, "restrict to the top k ranked results");
    analyze->add_option("--issue-t1", analyze_args.thresholds.t1, "issue threshold t1");
    analyze->add_option("--issue-t2", analyze_args.thresholds.t2, "issue threshold t2");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << e.what() << "\n";
        return kExitInput;
    }

    if (simulate->parsed()) return cmd_simulate(config_path, specs_path, sim_out, err);

    const auto scheme = scheme_from_name(scheme_flag);
    if (!scheme) {
        err << "unknown scheme '" << scheme_flag << "'\n";
        return kExitInput;
    }
    analyze_args.scheme = *scheme;
    for (const auto& flag : benchmark_flags) {
        const auto parsed = parse_benchmark_flag(flag);
        if (!parsed) {
            err << "bad --benchmark flag '" << flag << "'\n";
            return kExitInput;
        }
        analyze_args.benchmarks.push_back(*parsed);
    }
    if (!surveys_flag.empty()) {
        std::size_t start = 0;
        while (start <= surveys_flag.size()) {
            const auto comma = surveys_flag.find(',', start);
            const auto part = surveys_flag.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!part.empty()) analyze_args.survey_paths.push_back(part);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (top_k_flag > 0) analyze_args.top_k = top_k_flag;
    return cmd_analyze(analyze_args, err);
}

}  // namespace salience::cli
