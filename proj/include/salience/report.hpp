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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "salience/domain.hpp"
#include "salience/errors.hpp"
#include "salience/stats.hpp"

namespace salience::report {

// ---------------------------------------------------------------------------
// Cell formatting
// ---------------------------------------------------------------------------

struct TableCell {
    std::string text;
    bool bold = false;  // Holm-significant
};

/// Rounds half away from zero to one decimal.
inline double round_pp(double x) { return std::round(x * 10.0) / 10.0; }

/// Renders one diff cell: signed percentage points with one decimal and
/// significance suffix (* for adjusted p < 0.05, ** for adjusted p < 0.01).
/// Descriptive cells render as "---".
inline TableCell format_cell(const TestOutcome& outcome) {
    if (outcome.test_kind == TestKind::Descriptive || !outcome.p_adjusted.has_value())
        return {"---", false};
    const double rounded = round_pp(outcome.diff_pp);
    const bool negative = rounded < 0.0 || (rounded == 0.0 && outcome.diff_pp < 0.0);
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%c%.1fpp", negative ? '-' : '+', std::fabs(rounded));
    std::string text = buffer;
    const double p = *outcome.p_adjusted;
    if (p < 0.01) text += "**";
    else if (p < 0.05) text += "*";
    return {text, outcome.holm_significant};
}

/// Lays out one diff table: categories as rows, engines as columns. All
/// outcomes must share a scheme and a benchmark kind.
inline std::string format_table(const std::vector<TestOutcome>& outcomes,
                                const std::string& title) {
    if (outcomes.empty()) return title + "\n  (no testable cells)\n";
    const Scheme scheme = outcomes.front().scheme;
    std::set<std::string> engine_set;
    for (const auto& o : outcomes) {
        if (o.scheme != scheme) throw MixedSchemes("format_table saw two schemes");
        if (o.benchmark_kind != outcomes.front().benchmark_kind)
            throw MixedSchemes("format_table saw two benchmark kinds");
        engine_set.insert(o.engine);
    }
    const std::vector<std::string> engines(engine_set.begin(), engine_set.end());
    std::map<std::pair<std::string, int>, TableCell> cells;
    for (const auto& o : outcomes) cells[{o.engine, o.category.index()}] = format_cell(o);

    std::size_t label_width = 8;
    for (const auto& cat : categories(scheme))
        label_width = std::max(label_width, cat.display_name().size());
    std::vector<std::size_t> widths;
    for (const auto& engine : engines) {
        std::size_t w = engine.size();
        for (const auto& cat : categories(scheme)) {
            const auto it = cells.find({engine, cat.index()});
            if (it != cells.end()) w = std::max(w, it->second.text.size());
        }
        widths.push_back(w);
    }

    std::string out = title + "\n";
    out += std::string(label_width, ' ');
    for (std::size_t e = 0; e < engines.size(); ++e) {
        out += "  " + std::string(widths[e] - engines[e].size(), ' ') + engines[e];
    }
    out += '\n';
    for (const auto& cat : categories(scheme)) {
        std::string row(cat.display_name());
        row += std::string(label_width - cat.display_name().size(), ' ');
        for (std::size_t e = 0; e < engines.size(); ++e) {
            const auto it = cells.find({engines[e], cat.index()});
            const std::string text = (it != cells.end()) ? it->second.text : "---";
            row += "  " + std::string(widths[e] - text.size(), ' ') + text;
        }
        out += row + '\n';
    }
    out += "(cells in bold in the CSV export are Holm-significant; "
           "* p<0.05, ** p<0.01 after correction; --- descriptive)\n";
    return out;
}

// ---------------------------------------------------------------------------
// Analysis pipeline
// ---------------------------------------------------------------------------

struct AnalysisOptions {
    Scheme scheme = Scheme::EU5;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int n_perms = 9999;
    int n_bootstrap = 1000;
    std::string context = "default";
    std::optional<int> top_k;  // keep only SERP ranks <= k (answers always kept)
};

struct ProportionCell {
    std::string engine;
    std::string stratum;  // location or "GLOBAL"
    Category category{Scheme::EU5, 0};
    long long mentions = 0;
    double share_pct = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct EngineSummary {
    std::string engine;
    long long n_records = 0;
    long long n_records_with_mentions = 0;
    long long n_mentions = 0;

    double mention_rate_pct() const {
        return n_records > 0 ? 100.0 * static_cast<double>(n_records_with_mentions) /
                                   static_cast<double>(n_records)
                             : 0.0;
    }
};

struct OmnibusRow {
    std::string engine;
    BenchmarkKind benchmark = BenchmarkKind::Uniform;
    std::optional<stats::OmnibusResult> result;  // unset when a category was untestable
    std::optional<double> p_adjusted;
    bool holm_significant = false;
};

struct AnalysisResult {
    Scheme scheme = Scheme::EU5;
    std::vector<EngineSummary> engines;
    std::vector<ProportionCell> proportions;
    std::vector<TestOutcome> aggregated;   // pooled binomial z-test rows
    std::vector<TestOutcome> query_level;  // per-stratum rows plus pooled GLOBAL rows
    std::vector<OmnibusRow> omnibus;
};

namespace detail {

struct EngineData {
    std::vector<const ResultRecord*> records;
    std::vector<Mention> mentions;
    std::map<std::string, std::vector<Mention>> mentions_by_stratum;
    std::map<std::string, std::set<std::string>> queries_by_stratum;
    // (stratum, query) -> per-category counts and totals
    std::map<std::pair<std::string, std::string>, std::vector<long long>> query_counts;
    std::map<std::pair<std::string, std::string>, long long> query_totals;
    std::set<std::string> records_with_mentions;
};

inline int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace detail

/// Runs the full battery over a capture: mention shares with bootstrap CIs,
/// the pooled binomial z-test, the adaptive per-query tests pooled with
/// Stouffer's method, the omnibus distributional test, and Holm correction
/// within each analysis family.
inline AnalysisResult analyze(const std::vector<ResultRecord>& records,
                              const std::vector<Mention>& mentions,
                              const std::vector<Benchmark>& benchmarks,
                              const AnalysisOptions& options) {
    for (const auto& b : benchmarks) {
        if (b.scheme() != options.scheme)
            throw SchemeMismatch("benchmark scheme does not match the analysis scheme");
    }
    const int k = category_count(options.scheme);
    const auto cats = categories(options.scheme);

    // Index mentions by record and group records by engine.
    std::map<std::string, std::vector<const Mention*>> mentions_by_record;
    for (const auto& m : mentions) {
        if (m.category.scheme() != options.scheme)
            throw SchemeMismatch("mention scheme does not match the analysis scheme");
        mentions_by_record[m.record_id].push_back(&m);
    }
    std::map<std::string, detail::EngineData> engines;
    for (const auto& r : records) {
        if (options.top_k && r.rank && *r.rank > *options.top_k) continue;
        auto& data = engines[r.engine];
        data.records.push_back(&r);
        data.queries_by_stratum[r.location].insert(r.query_id);
        const auto key = std::make_pair(r.location, r.query_id);
        if (!data.query_counts.contains(key))
            data.query_counts[key] = std::vector<long long>(static_cast<std::size_t>(k), 0);
        auto it = mentions_by_record.find(r.record_id);
        if (it == mentions_by_record.end()) {
            data.query_totals.try_emplace(key, 0);
            continue;
        }
        data.records_with_mentions.insert(r.record_id);
        for (const auto* m : it->second) {
            data.mentions.push_back(*m);
            data.mentions_by_stratum[r.location].push_back(*m);
            data.query_counts[key][static_cast<std::size_t>(m->category.index())] += 1;
            data.query_totals[key] += 1;
        }
        data.query_totals.try_emplace(key, 0);
    }

    AnalysisResult result;
    result.scheme = options.scheme;

    std::map<stats::HypothesisKey, double> aggregated_p;
    std::map<stats::HypothesisKey, double> pooled_p;
    std::map<stats::HypothesisKey, double> omnibus_p;
    std::vector<TestOutcome*> outcome_index;  // for Holm write-back

    for (auto& [engine, data] : engines) {
        EngineSummary summary;
        summary.engine = engine;
        summary.n_records = static_cast<long long>(data.records.size());
        summary.n_records_with_mentions =
            static_cast<long long>(data.records_with_mentions.size());
        summary.n_mentions = static_cast<long long>(data.mentions.size());
        result.engines.push_back(summary);

        // Shares and bootstrap intervals, per stratum and pooled.
        auto emit_proportions = [&](const std::string& stratum,
                                    const std::vector<Mention>& cell_mentions) {
            if (cell_mentions.empty()) return;
            std::map<Category, long long> counts;
            for (const auto& m : cell_mentions) counts[m.category] += 1;
            const auto shares = stats::proportions(counts);
            const auto cell_seed =
                CounterRng::stream(options.seed, "bootstrap|" + engine + "|" + stratum)
                    .next_u64();
            const auto ci = stats::bootstrap_ci(cell_mentions, cell_seed,
                                                {options.n_bootstrap, 0.95});
            for (const auto& cat : cats) {
                ProportionCell cell;
                cell.engine = engine;
                cell.stratum = stratum;
                cell.category = cat;
                const auto it = counts.find(cat);
                cell.mentions = it == counts.end() ? 0 : it->second;
                cell.share_pct = shares.at(cat);
                cell.ci_lo = ci.at(cat).first;
                cell.ci_hi = ci.at(cat).second;
                result.proportions.push_back(std::move(cell));
            }
        };
        emit_proportions("GLOBAL", data.mentions);
        for (const auto& [stratum, stratum_mentions] : data.mentions_by_stratum)
            emit_proportions(stratum, stratum_mentions);

        if (data.mentions.empty()) continue;  // nothing to test for this engine

        std::map<Category, long long> global_counts;
        for (const auto& m : data.mentions) global_counts[m.category] += 1;
        const auto global_shares = stats::proportions(global_counts);
        const long long total_mentions = static_cast<long long>(data.mentions.size());

        std::vector<std::string> strata;
        for (const auto& [stratum, _] : data.queries_by_stratum) strata.push_back(stratum);

        for (const auto& benchmark : benchmarks) {
            const std::string bench_name{benchmark_kind_name(benchmark.kind())};

            // --- Aggregated proportion test on pooled counts. The expected
            // value is the equal-weight average of per-stratum benchmarks.
            for (const auto& cat : cats) {
                double p0 = 0.0;
                for (const auto& stratum : strata) p0 += benchmark.expected(stratum, cat);
                p0 /= static_cast<double>(strata.size());
                TestOutcome outcome;
                outcome.scheme = options.scheme;
                outcome.category = cat;
                outcome.stratum = "GLOBAL";
                outcome.benchmark_kind = benchmark.kind();
                outcome.engine = engine;
                outcome.context = options.context + "/aggregated";
                outcome.diff_pp = global_shares.at(cat) - 100.0 * p0;
                outcome.direction = detail::sign_of(outcome.diff_pp);
                outcome.n_units = total_mentions;
                if (p0 > 0.0 && p0 < 1.0) {
                    const auto it = global_counts.find(cat);
                    const long long k_cat = it == global_counts.end() ? 0 : it->second;
                    const auto bz = stats::binom_z(k_cat, total_mentions, p0);
                    outcome.test_kind = TestKind::BinomZ;
                    outcome.statistic = bz.z;
                    outcome.p_raw = bz.p;
                    aggregated_p[{outcome.context, engine, bench_name,
                                  std::string(cat.name())}] = bz.p;
                } else {
                    outcome.test_kind = TestKind::Descriptive;
                }
                result.aggregated.push_back(std::move(outcome));
            }

            // --- Query-level adaptive tests per stratum, pooled by Stouffer.
            std::map<Category, double> pooled_z;
            bool omnibus_ok = true;
            for (const auto& cat : cats) {
                std::vector<stats::StratumResult> per_stratum;
                std::vector<double> stratum_diffs;
                for (const auto& stratum : strata) {
                    const double p0 = benchmark.expected(stratum, cat);
                    std::vector<stats::QueryObservation> obs;
                    for (const auto& query : data.queries_by_stratum.at(stratum)) {
                        const auto key = std::make_pair(stratum, query);
                        stats::QueryObservation o;
                        o.query_id = query;
                        o.stratum = stratum;
                        o.n = data.query_totals.at(key);
                        o.k = data.query_counts.at(key)[static_cast<std::size_t>(cat.index())];
                        obs.push_back(std::move(o));
                    }
                    const auto seed = CounterRng::stream(
                        options.seed, "adaptive|" + engine + "|" + bench_name + "|" +
                                          std::string(cat.name()) + "|" + stratum)
                                         .next_u64();
                    stats::AdaptiveOptions adaptive;
                    adaptive.n_perms = options.n_perms;
                    auto sr = stats::adaptive_test(obs, p0, seed, adaptive);
                    sr.stratum = stratum;

                    TestOutcome row;
                    row.scheme = options.scheme;
                    row.category = cat;
                    row.stratum = stratum;
                    row.benchmark_kind = benchmark.kind();
                    row.engine = engine;
                    row.context = options.context + "/query";
                    row.diff_pp = sr.mean_deviation * 100.0;
                    row.direction = detail::sign_of(row.diff_pp);
                    row.statistic = sr.z_equivalent;
                    row.test_kind = sr.test_kind;
                    row.p_raw = sr.p;
                    row.n_units = sr.n_queries;
                    result.query_level.push_back(std::move(row));

                    stratum_diffs.push_back(sr.mean_deviation * 100.0);
                    per_stratum.push_back(std::move(sr));
                }

                // Pooled row across strata.
                TestOutcome pooled;
                pooled.scheme = options.scheme;
                pooled.category = cat;
                pooled.stratum = "GLOBAL";
                pooled.benchmark_kind = benchmark.kind();
                pooled.engine = engine;
                pooled.context = options.context + "/query";
                double diff_sum = 0.0;
                for (double d : stratum_diffs) diff_sum += d;
                pooled.diff_pp =
                    stratum_diffs.empty() ? 0.0 : diff_sum / static_cast<double>(stratum_diffs.size());
                pooled.direction = detail::sign_of(pooled.diff_pp);
                long long total_queries = 0;
                std::map<TestKind, int> kind_votes;
                for (const auto& sr : per_stratum) {
                    total_queries += sr.n_queries;
                    if (sr.inferential()) kind_votes[sr.test_kind] += 1;
                }
                pooled.n_units = total_queries;
                try {
                    const auto pooled_result = stats::stouffer(per_stratum);
                    pooled.statistic = pooled_result.z;
                    pooled.p_raw = pooled_result.p;
                    pooled.test_kind = kind_votes[TestKind::BetaBinLRT] >=
                                               kind_votes[TestKind::SignFlipPerm]
                                           ? TestKind::BetaBinLRT
                                           : TestKind::SignFlipPerm;
                    pooled_z[cat] = pooled_result.z;
                    pooled_p[{pooled.context, engine, bench_name, std::string(cat.name())}] =
                        pooled_result.p;
                } catch (const NoTestableStrata&) {
                    pooled.test_kind = TestKind::Descriptive;
                    omnibus_ok = false;
                }
                result.query_level.push_back(std::move(pooled));
            }

            // --- Omnibus distributional test from the pooled z-scores.
            OmnibusRow omni;
            omni.engine = engine;
            omni.benchmark = benchmark.kind();
            if (omnibus_ok && static_cast<int>(pooled_z.size()) == k) {
                omni.result = stats::omnibus(pooled_z, options.scheme);
                omnibus_p[{options.context + "/omnibus", engine, bench_name, "all"}] =
                    omni.result->p;
            }
            result.omnibus.push_back(std::move(omni));
        }
    }

    // --- Holm correction within each analysis family.
    const auto aggregated_adjusted = stats::holm(aggregated_p, options.alpha);
    const auto pooled_adjusted = stats::holm(pooled_p, options.alpha);
    const auto omnibus_adjusted = stats::holm(omnibus_p, options.alpha);
    auto apply = [&](std::vector<TestOutcome>& outcomes,
                     const std::map<stats::HypothesisKey, stats::HolmAdjusted>& adjusted) {
        for (auto& o : outcomes) {
            if (o.stratum != "GLOBAL" || !o.p_raw.has_value()) continue;
            const stats::HypothesisKey key{o.context, o.engine,
                                           std::string(benchmark_kind_name(o.benchmark_kind)),
                                           std::string(o.category.name())};
            const auto it = adjusted.find(key);
            if (it == adjusted.end()) continue;
            o.p_adjusted = it->second.p_adjusted;
            o.holm_significant = it->second.reject;
        }
    };
    apply(result.aggregated, aggregated_adjusted);
    apply(result.query_level, pooled_adjusted);
    for (auto& omni : result.omnibus) {
        if (!omni.result) continue;
        const stats::HypothesisKey key{options.context + "/omnibus", omni.engine,
                                       std::string(benchmark_kind_name(omni.benchmark)), "all"};
        const auto it = omnibus_adjusted.find(key);
        if (it == omnibus_adjusted.end()) continue;
        omni.p_adjusted = it->second.p_adjusted;
        omni.holm_significant = it->second.reject;
    }

    return result;
}

// ---------------------------------------------------------------------------
// Report writers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_full(double x) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    return buffer;
}

inline std::string fmt_short(double x) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4g", x);
    return buffer;
}

inline std::string test_kind_name(TestKind k) {
    switch (k) {
        case TestKind::BinomZ: return "binom_z";
        case TestKind::BetaBinLRT: return "betabin_lrt";
        case TestKind::SignFlipPerm: return "signflip_perm";
        case TestKind::Descriptive: return "descriptive";
    }
    return "";
}

}  // namespace detail

/// Proportions with bootstrap CIs; doubles as the plot-data export
/// (category/value/interval triples).
inline void write_proportions_csv(const AnalysisResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << "engine,stratum,category,mentions,share_pct,ci_lo,ci_hi\n";
    for (const auto& cell : result.proportions) {
        out << cell.engine << ',' << cell.stratum << ',' << cell.category.name() << ','
            << cell.mentions << ',' << detail::fmt_full(cell.share_pct) << ','
            << detail::fmt_full(cell.ci_lo) << ',' << detail::fmt_full(cell.ci_hi) << '\n';
    }
}

inline void write_proportions_txt(const AnalysisResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << "Mention shares with 95% bootstrap intervals\n";
    for (const auto& summary : result.engines) {
        char line[256];
        std::snprintf(line, sizeof(line),
                      "\n%s: %lld results, %lld with political mentions (%.1f%%), "
                      "%lld mentions\n",
                      summary.engine.c_str(), summary.n_records,
                      summary.n_records_with_mentions, summary.mention_rate_pct(),
                      summary.n_mentions);
        out << line;
        for (const auto& cell : result.proportions) {
            if (cell.engine != summary.engine || cell.stratum != "GLOBAL") continue;
            std::snprintf(line, sizeof(line), "  %-10s %6.1f%%  [%5.1f, %5.1f]  (n=%lld)\n",
                          std::string(cell.category.display_name()).c_str(), cell.share_pct,
                          cell.ci_lo, cell.ci_hi, cell.mentions);
            out << line;
        }
        if (summary.n_mentions == 0)
            out << "  no political mentions; statistical tests skipped\n";
    }
}

/// Full outcome export, unrounded.
inline void write_outcomes_csv(const AnalysisResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << "analysis,engine,benchmark,stratum,category,n_units,test_kind,diff_pp,"
           "statistic,p_raw,p_adjusted,holm_significant,direction\n";
    auto dump = [&](const std::vector<TestOutcome>& outcomes, const std::string& analysis) {
        for (const auto& o : outcomes) {
            out << analysis << ',' << o.engine << ',' << benchmark_kind_name(o.benchmark_kind)
                << ',' << o.stratum << ',' << o.category.name() << ',' << o.n_units << ','
                << detail::test_kind_name(o.test_kind) << ',' << detail::fmt_full(o.diff_pp)
                << ',' << detail::fmt_full(o.statistic) << ','
                << (o.p_raw ? detail::fmt_full(*o.p_raw) : "") << ','
                << (o.p_adjusted ? detail::fmt_full(*o.p_adjusted) : "") << ','
                << (o.holm_significant ? "1" : "0") << ',' << o.direction << '\n';
        }
    };
    dump(result.aggregated, "aggregated");
    dump(result.query_level, "query");
}

inline void write_diff_tables(const AnalysisResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    auto emit = [&](const std::vector<TestOutcome>& outcomes, const std::string& label) {
        std::map<BenchmarkKind, std::vector<TestOutcome>> by_benchmark;
        for (const auto& o : outcomes) {
            if (o.stratum != "GLOBAL") continue;
            by_benchmark[o.benchmark_kind].push_back(o);
        }
        for (const auto& [kind, rows] : by_benchmark) {
            out << format_table(rows, "Deviation vs " +
                                          std::string(benchmark_kind_name(kind)) + " (" +
                                          label + ")")
                << '\n';
        }
    };
    emit(result.aggregated, "aggregated test");
    emit(result.query_level, "per-query test");
}

inline void write_omnibus(const AnalysisResult& result, const std::string& txt_path,
                          const std::string& csv_path) {
    std::ofstream txt(txt_path, std::ios::binary);
    std::ofstream csv(csv_path, std::ios::binary);
    if (!txt || !csv) throw ParseError("cannot open omnibus report files for writing");
    txt << "Omnibus distributional test (chi2 = sum of squared pooled z-scores)\n";
    csv << "engine,benchmark,chi2,df,p_raw,p_adjusted,holm_significant\n";
    for (const auto& row : result.omnibus) {
        const std::string bench{benchmark_kind_name(row.benchmark)};
        if (row.result) {
            std::string marker;
            if (row.p_adjusted && *row.p_adjusted < 0.01) marker = "**";
            else if (row.p_adjusted && *row.p_adjusted < 0.05) marker = "*";
            char line[256];
            std::snprintf(line, sizeof(line), "  %-12s vs %-16s chi2=%8.2f%-2s df=%d\n",
                          row.engine.c_str(), bench.c_str(), row.result->chi2, marker.c_str(),
                          row.result->df);
            txt << line;
            csv << row.engine << ',' << bench << ',' << detail::fmt_full(row.result->chi2)
                << ',' << row.result->df << ',' << detail::fmt_full(row.result->p) << ','
                << (row.p_adjusted ? detail::fmt_full(*row.p_adjusted) : "") << ','
                << (row.holm_significant ? "1" : "0") << '\n';
        } else {
            txt << "  " + row.engine + " vs " + bench + ": ---\n";
            csv << row.engine << ',' << bench << ",,,,,\n";
        }
    }
}

}  // namespace salience::report
