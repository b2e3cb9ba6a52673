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
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salience/domain.hpp"
#include "salience/errors.hpp"
#include "salience/optimize.hpp"
#include "salience/rng.hpp"
#include "salience/special.hpp"

namespace salience::stats {

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

/// Per-query counts for one target category within one stratum: k mentions
/// of the category out of n political mentions in the query. Queries with no
/// mentions at all keep n = 0 and contribute a proportion of zero.
struct QueryObservation {
    std::string query_id;
    std::string stratum;
    long long k = 0;
    long long n = 0;

    double proportion() const { return n > 0 ? static_cast<double>(k) / n : 0.0; }
};

struct StratumResult {
    std::string stratum;
    double z_equivalent = 0.0;
    std::optional<double> p;       // unset for descriptive strata
    long long n_queries = 0;       // all queries, including zero-mention ones
    TestKind test_kind = TestKind::Descriptive;
    double mean_deviation = 0.0;   // mean of p_q - p0 over all queries
    long long dropped_zero_n = 0;  // n = 0 observations excluded from the likelihood

    bool inferential() const { return test_kind != TestKind::Descriptive && p.has_value(); }
};

// ---------------------------------------------------------------------------
// Proportions and diffs
// ---------------------------------------------------------------------------

/// Mention shares in percent. Every category of the scheme appears in the
/// output, including zero-count ones; the values sum to 100.
inline std::map<Category, double> proportions(const std::map<Category, long long>& counts) {
    if (counts.empty()) throw EmptyCounts("no category counts");
    const Scheme scheme = counts.begin()->first.scheme();
    long long total = 0;
    for (const auto& [cat, count] : counts) {
        if (cat.scheme() != scheme)
            throw SchemeMismatch("counts mix categories from different schemes");
        if (count < 0) throw NegativeValue("negative mention count");
        total += count;
    }
    if (total == 0) throw EmptyCounts("all category counts are zero");
    std::map<Category, double> out;
    for (const auto& cat : categories(scheme)) {
        const auto it = counts.find(cat);
        const long long count = (it == counts.end()) ? 0 : it->second;
        out.emplace(cat, 100.0 * static_cast<double>(count) / static_cast<double>(total));
    }
    return out;
}

/// Percentage-point deviation of observed shares from a benchmark row:
/// Diff = P - 100 * E per category. The diffs sum to zero.
inline std::map<Category, double> diff_vs_benchmark(const std::map<Category, double>& shares,
                                                    const Benchmark& benchmark,
                                                    const std::string& stratum) {
    if (shares.empty()) throw EmptyCounts("no shares to compare");
    std::map<Category, double> out;
    for (const auto& [cat, pct] : shares) {
        if (cat.scheme() != benchmark.scheme())
            throw SchemeMismatch("shares and benchmark use different schemes");
        out.emplace(cat, pct - 100.0 * benchmark.expected(stratum, cat));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Aggregated binomial proportion z-test
// ---------------------------------------------------------------------------

struct BinomZResult {
    double z = 0.0;
    double p = 1.0;
};

inline BinomZResult binom_z(long long k, long long n, double p0) {
    if (n < 1) throw EmptyCounts("binom_z needs n >= 1");
    if (k < 0 || k > n) throw NegativeValue("binom_z needs 0 <= k <= n");
    if (!(p0 > 0.0 && p0 < 1.0))
        throw DegenerateP0("binom_z needs 0 < p0 < 1, got " + std::to_string(p0));
    const double phat = static_cast<double>(k) / static_cast<double>(n);
    const double z = (phat - p0) / std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
    return {z, normal_two_tailed(z)};
}

// ---------------------------------------------------------------------------
// Beta-Binomial likelihood ratio test
// ---------------------------------------------------------------------------

struct BetaBinOptions {
    // Search box in (logit mu, log M). The dispersion cap at log M = 18.5
    // (M ~ 1.1e8) is numerically indistinguishable from the binomial limit.
    double logit_mu_lo = -12.0;
    double logit_mu_hi = 12.0;
    double log_m_lo = -7.0;
    double log_m_hi = 18.5;
    std::optional<double> fixed_log_m;  // freeze dispersion (binomial-limit checks)
    double ftol = 1e-8;
    long long min_queries = 30;
};

struct BetaBinResult {
    double lambda = 0.0;        // 2 * (llh1 - llh0), clamped at zero
    double z_equivalent = 0.0;  // sign(mu_hat - p0) * sqrt(lambda)
    double p = 1.0;             // chi-square(1) upper tail
    double mu_hat = 0.0;
    double m_hat = 0.0;
    double h1_loglik = 0.0;
    double h0_loglik = 0.0;
    long long n_used = 0;
    long long n_dropped = 0;    // observations with n = 0
};

namespace detail {

/// Beta-Binomial log-likelihood over compressed (k, n) pairs. Keeping the
/// full log pmf (binomial coefficient included) makes the reported values
/// actual log-likelihoods, not just quantities proportional to them.
///
/// Gamma ratios with integer offsets are evaluated as log rising factorials,
/// lgamma(k + a) - lgamma(a) = sum_j log(a + j). The lgamma-difference form
/// cancels catastrophically once M approaches the dispersion cap (lgamma
/// values ~1e9, differences ~1e2), which an optimizer happily exploits; the
/// product form is exact at any M.
class BetaBinLoglik {
public:
    explicit BetaBinLoglik(std::span<const QueryObservation> obs) {
        std::map<std::pair<long long, long long>, long long> counts;
        for (const auto& o : obs) {
            if (o.n <= 0) continue;
            if (o.k < 0 || o.k > o.n)
                throw NegativeValue("observation with k outside [0, n]");
            counts[{o.k, o.n}] += 1;
            n_used_ += 1;
        }
        pairs_.reserve(counts.size());
        for (const auto& [kn, c] : counts) {
            const auto [k, n] = kn;
            const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                                      std::lgamma(static_cast<double>(k) + 1.0) -
                                      std::lgamma(static_cast<double>(n - k) + 1.0);
            pairs_.push_back({k, n, static_cast<double>(c), log_choose});
        }
    }

    long long n_used() const { return n_used_; }

    double operator()(double logit_mu, double log_m) const {
        const double mu = 1.0 / (1.0 + std::exp(-logit_mu));
        const double m = std::exp(log_m);
        const double a = mu * m;
        const double b = (1.0 - mu) * m;
        if (!(a > 0.0) || !(b > 0.0)) return -std::numeric_limits<double>::infinity();
        double total = 0.0;
        for (const auto& p : pairs_) {
            total += p.count * (p.log_choose + log_rising(a, p.k) + log_rising(b, p.n - p.k) -
                                log_rising(m, p.n));
        }
        return total;
    }

private:
    static double log_rising(double x, long long steps) {
        double out = 0.0;
        for (long long j = 0; j < steps; ++j) out += std::log(x + static_cast<double>(j));
        return out;
    }

    struct Pair {
        long long k, n;
        double count, log_choose;
    };
    std::vector<Pair> pairs_;
    long long n_used_ = 0;
};

struct FitResult {
    double logit_mu = 0.0;
    double log_m = 0.0;
    double loglik = -std::numeric_limits<double>::infinity();
    bool converged = false;
};

inline double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

/// H1 fit: maximize over (logit mu, log M). Five fixed Nelder-Mead starts;
/// a deterministic coarse grid acts as a safety net, with one more polish
/// from the grid argmax when it beats every start.
inline FitResult fit_free(const BetaBinLoglik& ll, const BetaBinOptions& opt) {
    auto objective = [&](double lmu, double lm) {
        return -ll(clamp(lmu, opt.logit_mu_lo, opt.logit_mu_hi),
                   clamp(lm, opt.log_m_lo, opt.log_m_hi));
    };
    FitResult best;
    auto consider = [&](const Min2dResult& r) {
        const double lmu = clamp(r.x[0], opt.logit_mu_lo, opt.logit_mu_hi);
        const double lm = clamp(r.x[1], opt.log_m_lo, opt.log_m_hi);
        const double value = ll(lmu, lm);
        if (value > best.loglik) best = {lmu, lm, value, r.converged};
    };
    static constexpr std::array<std::array<double, 2>, 5> kStarts = {{
        {-2.0, 1.0}, {0.0, 1.0}, {2.0, 1.0}, {0.0, 5.0}, {0.0, -1.0},
    }};
    for (const auto& start : kStarts) {
        consider(nelder_mead_2d(objective, start, {0.5, 0.5}, opt.ftol));
    }
    // Coarse-grid fallback, 49 x 49 over the search box.
    double grid_best = -std::numeric_limits<double>::infinity();
    std::array<double, 2> grid_arg{0.0, 0.0};
    constexpr int kGrid = 49;
    for (int i = 0; i < kGrid; ++i) {
        const double lmu = opt.logit_mu_lo +
                           (opt.logit_mu_hi - opt.logit_mu_lo) * i / (kGrid - 1.0);
        for (int j = 0; j < kGrid; ++j) {
            const double lm = opt.log_m_lo + (opt.log_m_hi - opt.log_m_lo) * j / (kGrid - 1.0);
            const double value = ll(lmu, lm);
            if (value > grid_best) {
                grid_best = value;
                grid_arg = {lmu, lm};
            }
        }
    }
    if (grid_best > best.loglik || !best.converged) {
        consider(nelder_mead_2d(objective, grid_arg, {0.25, 0.25}, opt.ftol));
    }
    if (!best.converged && best.loglik < grid_best) best = {grid_arg[0], grid_arg[1], grid_best, false};
    return best;
}

/// H0 fit: mu pinned at p0, dispersion free.
inline FitResult fit_null(const BetaBinLoglik& ll, double p0, const BetaBinOptions& opt) {
    const double logit_p0 = std::log(p0 / (1.0 - p0));
    const auto r = brent_min([&](double lm) { return -ll(logit_p0, lm); }, opt.log_m_lo,
                             opt.log_m_hi, 1e-11);
    return {logit_p0, r.x, -r.fx, r.converged};
}

}  // namespace detail

/// Likelihood ratio test of H0: mu = p0 against a free mean, with the
/// dispersion M = alpha + beta free under both hypotheses. Handles the
/// replica-correlation overdispersion a plain binomial test ignores.
/// Observations with n = 0 carry no likelihood and are dropped (the count is
/// reported); at least `min_queries` usable observations are required.
inline BetaBinResult betabin_lrt(std::span<const QueryObservation> obs, double p0,
                                 const BetaBinOptions& options = {}) {
    if (!(p0 > 0.0 && p0 < 1.0))
        throw DegenerateP0("betabin_lrt needs 0 < p0 < 1, got " + std::to_string(p0));
    const detail::BetaBinLoglik loglik(obs);
    const long long dropped = static_cast<long long>(obs.size()) - loglik.n_used();
    if (loglik.n_used() < options.min_queries)
        throw TooFewQueries("betabin_lrt needs at least " +
                            std::to_string(options.min_queries) + " usable queries, got " +
                            std::to_string(loglik.n_used()));

    detail::FitResult h1, h0;
    if (options.fixed_log_m) {
        const double lm = *options.fixed_log_m;
        const auto r = brent_min([&](double lmu) { return -loglik(lmu, lm); },
                                 options.logit_mu_lo, options.logit_mu_hi, 1e-11);
        h1 = {r.x, lm, -r.fx, r.converged};
        h0 = {std::log(p0 / (1.0 - p0)), lm, loglik(std::log(p0 / (1.0 - p0)), lm), true};
    } else {
        h1 = detail::fit_free(loglik, options);
        h0 = detail::fit_null(loglik, p0, options);
        if (h1.loglik < h0.loglik) {
            // The free fit can never genuinely fall below the constrained
            // one; re-polish from the null optimum before clamping.
            const auto polish = nelder_mead_2d(
                [&](double lmu, double lm) {
                    return -loglik(detail::clamp(lmu, options.logit_mu_lo, options.logit_mu_hi),
                                   detail::clamp(lm, options.log_m_lo, options.log_m_hi));
                },
                {h0.logit_mu, h0.log_m}, {0.05, 0.05}, options.ftol);
            const double lmu = detail::clamp(polish.x[0], options.logit_mu_lo, options.logit_mu_hi);
            const double lm = detail::clamp(polish.x[1], options.log_m_lo, options.log_m_hi);
            const double value = loglik(lmu, lm);
            if (value > h1.loglik) h1 = {lmu, lm, value, polish.converged};
        }
    }
    if (!h1.converged && !h0.converged)
        throw OptimizerNoConverge("beta-binomial fits did not converge");

    double lambda = 2.0 * (h1.loglik - h0.loglik);
    if (lambda < -1e-6)
        throw OptimizerNoConverge("free fit fell below the null fit by " +
                                  std::to_string(-lambda));
    lambda = std::max(0.0, lambda);

    BetaBinResult result;
    result.lambda = lambda;
    result.mu_hat = 1.0 / (1.0 + std::exp(-h1.logit_mu));
    result.m_hat = std::exp(h1.log_m);
    result.h1_loglik = h1.loglik;
    result.h0_loglik = h0.loglik;
    result.n_used = loglik.n_used();
    result.n_dropped = dropped;
    result.p = chi2_sf(lambda, 1.0);
    const double sign = (result.mu_hat > p0) ? 1.0 : (result.mu_hat < p0 ? -1.0 : 0.0);
    result.z_equivalent = sign * std::sqrt(lambda);
    return result;
}

// ---------------------------------------------------------------------------
// Sign-flip permutation test
// ---------------------------------------------------------------------------

struct SignFlipResult {
    double mean_deviation = 0.0;
    double p = 1.0;
};

/// One-sample location test that flips the sign of each deviation
/// independently. Two-tailed; exact under the null that positive and
/// negative deviations are equally likely. p = (#{|mean_pi| >= |mean|} + 1)
/// / (n_perms + 1), reproducible for a fixed seed.
inline SignFlipResult signflip_perm(std::span<const double> deviations, int n_perms,
                                    std::uint64_t seed) {
    const std::size_t n = deviations.size();
    if (n < 3)
        throw TooFewQueries("signflip_perm needs at least 3 deviations, got " +
                            std::to_string(n));
    double observed_sum = 0.0;
    for (double d : deviations) observed_sum += d;
    const double observed = std::fabs(observed_sum / static_cast<double>(n));

    auto rng = CounterRng::stream(seed, "signflip");
    long long exceed = 0;
    for (int perm = 0; perm < n_perms; ++perm) {
        double sum = 0.0;
        std::uint64_t bits = 0;
        int available = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (available == 0) {
                bits = rng.next_u64();
                available = 64;
            }
            sum += (bits & 1u) ? deviations[i] : -deviations[i];
            bits >>= 1;
            --available;
        }
        if (std::fabs(sum / static_cast<double>(n)) >= observed) ++exceed;
    }
    return {observed_sum / static_cast<double>(n),
            static_cast<double>(exceed + 1) / static_cast<double>(n_perms + 1)};
}

// ---------------------------------------------------------------------------
// Adaptive per-stratum dispatch
// ---------------------------------------------------------------------------

struct AdaptiveOptions {
    int n_perms = 9999;
    BetaBinOptions betabin;
};

/// Chooses the test from the number of available queries: the Beta-Binomial
/// LRT when at least 30 queries carry usable counts, the sign-flip
/// permutation test for 3 <= N < 30 (or whenever counts are unusable, e.g. a
/// degenerate benchmark value), and descriptive reporting below three
/// queries.
inline StratumResult adaptive_test(std::span<const QueryObservation> obs, double p0,
                                   std::uint64_t seed, const AdaptiveOptions& options = {}) {
    StratumResult result;
    result.n_queries = static_cast<long long>(obs.size());
    if (!obs.empty()) result.stratum = obs.front().stratum;

    std::vector<double> deviations;
    deviations.reserve(obs.size());
    long long usable = 0;
    double dev_sum = 0.0;
    for (const auto& o : obs) {
        const double d = o.proportion() - p0;
        deviations.push_back(d);
        dev_sum += d;
        if (o.n > 0) ++usable;
    }
    result.mean_deviation = obs.empty() ? 0.0 : dev_sum / static_cast<double>(obs.size());
    result.dropped_zero_n = result.n_queries - usable;

    if (result.n_queries < 3) {
        result.test_kind = TestKind::Descriptive;
        return result;
    }
    const bool counts_ok = usable >= options.betabin.min_queries && p0 > 0.0 && p0 < 1.0;
    if (result.n_queries >= options.betabin.min_queries && counts_ok) {
        const auto bb = betabin_lrt(obs, p0, options.betabin);
        result.test_kind = TestKind::BetaBinLRT;
        result.z_equivalent = bb.z_equivalent;
        result.p = bb.p;
        return result;
    }
    const auto sf = signflip_perm(deviations, options.n_perms, seed);
    result.test_kind = TestKind::SignFlipPerm;
    result.p = sf.p;
    const double sign =
        (sf.mean_deviation > 0.0) ? 1.0 : (sf.mean_deviation < 0.0 ? -1.0 : 0.0);
    result.z_equivalent = sign * inv_normal_cdf(1.0 - sf.p / 2.0);
    return result;
}

// ---------------------------------------------------------------------------
// Stouffer aggregation and the omnibus test
// ---------------------------------------------------------------------------

struct StoufferResult {
    double z = 0.0;
    double p = 1.0;
    long long n_strata = 0;
};

/// Combines per-stratum z-equivalents, weighted by sqrt(N_c):
/// Z = sum(w_c z_c) / sqrt(sum(w_c^2)). Descriptive strata are excluded.
inline StoufferResult stouffer(std::span<const StratumResult> strata) {
    double num = 0.0, den = 0.0;
    long long used = 0;
    for (const auto& s : strata) {
        if (!s.inferential()) continue;
        const double w = std::sqrt(static_cast<double>(s.n_queries));
        num += w * s.z_equivalent;
        den += w * w;
        ++used;
    }
    if (used == 0) throw NoTestableStrata("no stratum passed an inferential test");
    const double z = num / std::sqrt(den);
    return {z, normal_two_tailed(z), used};
}

struct OmnibusResult {
    double chi2 = 0.0;
    int df = 0;
    double p = 1.0;
};

/// Global distributional test: sums squared per-category z-scores and refers
/// the total to chi-square with K - 1 degrees of freedom.
inline OmnibusResult omnibus(const std::map<Category, double>& z_by_category, Scheme scheme) {
    const int k = category_count(scheme);
    double chi2 = 0.0;
    for (const auto& cat : categories(scheme)) {
        const auto it = z_by_category.find(cat);
        if (it == z_by_category.end())
            throw MissingCategory("omnibus needs a z-score for category '" +
                                  std::string(cat.name()) + "'");
        chi2 += it->second * it->second;
    }
    const int df = k - 1;
    return {chi2, df, chi2_sf(chi2, static_cast<double>(df))};
}

// ---------------------------------------------------------------------------
// Holm-Bonferroni step-down correction
// ---------------------------------------------------------------------------

/// Identifies one hypothesis inside one correction family. Correction is
/// applied separately within each `context`.
struct HypothesisKey {
    std::string context;
    std::string engine;
    std::string benchmark;
    std::string category;

    friend auto operator<=>(const HypothesisKey&, const HypothesisKey&) = default;
};

struct HolmAdjusted {
    double p_adjusted = 1.0;
    bool reject = false;
};

/// Step-down Holm within each context: sort the m raw p-values ascending,
/// p_adj(i) = max over j <= i of (m - j + 1) p(j) clamped to one, and reject
/// down the list while p_adj <= alpha.
inline std::map<HypothesisKey, HolmAdjusted> holm(
    const std::map<HypothesisKey, double>& p_raw, double alpha = 0.05) {
    std::map<std::string, std::vector<std::pair<HypothesisKey, double>>> by_context;
    for (const auto& [key, p] : p_raw) by_context[key.context].emplace_back(key, p);

    std::map<HypothesisKey, HolmAdjusted> out;
    for (auto& [_, items] : by_context) {
        std::sort(items.begin(), items.end(),
                  [](const auto& a, const auto& b) {
                      return a.second != b.second ? a.second < b.second : a.first < b.first;
                  });
        const std::size_t m = items.size();
        double running_max = 0.0;
        bool rejecting = true;
        for (std::size_t i = 0; i < m; ++i) {
            const double scaled = static_cast<double>(m - i) * items[i].second;
            running_max = std::max(running_max, scaled);
            const double adjusted = std::min(1.0, running_max);
            if (adjusted > alpha) rejecting = false;
            out.emplace(items[i].first, HolmAdjusted{adjusted, rejecting});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bootstrap confidence intervals
// ---------------------------------------------------------------------------

struct BootstrapOptions {
    int n_resamples = 1000;
    double level = 0.95;
};

/// Percentile bootstrap over mentions: resamples the mention list with
/// replacement and returns per-category share intervals in percent.
/// Deterministic for a fixed seed, independent of any parallelism.
inline std::map<Category, std::pair<double, double>> bootstrap_ci(
    std::span<const Mention> mentions, std::uint64_t seed,
    const BootstrapOptions& options = {}) {
    if (mentions.empty()) throw EmptyMentions("bootstrap over an empty mention list");
    const Scheme scheme = mentions.front().category.scheme();
    const int k = category_count(scheme);
    const std::size_t n = mentions.size();

    std::vector<int> category_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (mentions[i].category.scheme() != scheme)
            throw SchemeMismatch("mentions mix categories from different schemes");
        category_of[i] = mentions[i].category.index();
    }

    const int b = options.n_resamples;
    std::vector<std::vector<double>> shares(static_cast<std::size_t>(k),
                                            std::vector<double>(static_cast<std::size_t>(b)));
    auto rng = CounterRng::stream(seed, "bootstrap");
    std::vector<long long> counts(static_cast<std::size_t>(k));
    for (int r = 0; r < b; ++r) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto pick = rng.next_below(n);
            counts[static_cast<std::size_t>(category_of[pick])] += 1;
        }
        for (int c = 0; c < k; ++c) {
            shares[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] =
                100.0 * static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                static_cast<double>(n);
        }
    }

    auto quantile = [](std::vector<double>& values, double q) {
        std::sort(values.begin(), values.end());
        const double h = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = static_cast<std::size_t>(std::ceil(h));
        return values[lo] + (h - std::floor(h)) * (values[hi] - values[lo]);
    };

    const double tail = (1.0 - options.level) / 2.0;
    std::map<Category, std::pair<double, double>> out;
    for (int c = 0; c < k; ++c) {
        auto& column = shares[static_cast<std::size_t>(c)];
        const double lo = quantile(column, tail);
        const double hi = quantile(column, 1.0 - tail);
        out.emplace(Category(scheme, c), std::make_pair(lo, hi));
    }
    return out;
}

}  // namespace salience::stats
