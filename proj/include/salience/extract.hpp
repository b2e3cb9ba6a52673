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
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "salience/csv.hpp"
#include "salience/domain.hpp"
#include "salience/errors.hpp"
#include "salience/ingest.hpp"

namespace salience::extract {

/// One pre-dedup occurrence of a lexicon entry or issue term in a record.
struct RawHit {
    std::string record_id;
    std::string surface;
    std::string party_or_topic;
    SourceField source_field;
};

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

// Word-boundary matching is token-sequence matching: both the pattern and
// the scanned field are split on non-alphanumeric bytes (UTF-8 continuation
// bytes count as word characters) and lowercased, and a pattern matches when
// its token sequence appears contiguously. URLs get the same treatment, which
// realizes "split on non-alphanumeric characters" for paths like
// example.de/afd-news.

inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        const bool word = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          (c >= '0' && c <= '9') || c >= 0x80;
        if (word) {
            current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                              : static_cast<char>(c);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline bool contains_sequence(const std::vector<std::string>& haystack,
                              const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (haystack[i + j] != needle[j]) { ok = false; break; }
        }
        if (ok) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Deterministic lexicon matcher
// ---------------------------------------------------------------------------

/// Scans headline and url for SERP records, answer_text for LLM records.
/// Emits at most one hit per (lexicon entry, field).
inline std::vector<RawHit> match_lexicon(const ResultRecord& record,
                                         const ingest::EntityLexicon& lexicon) {
    std::vector<RawHit> hits;
    std::vector<std::pair<SourceField, std::vector<std::string>>> fields;
    if (record.is_llm()) {
        if (record.answer_text)
            fields.emplace_back(SourceField::AnswerText, tokenize(*record.answer_text));
    } else {
        if (record.headline)
            fields.emplace_back(SourceField::Headline, tokenize(*record.headline));
        if (record.url) fields.emplace_back(SourceField::Url, tokenize(*record.url));
    }
    for (const auto& entry : lexicon.entries()) {
        const auto pattern = tokenize(entry.surface);
        for (const auto& [field, tokens] : fields) {
            if (contains_sequence(tokens, pattern)) {
                hits.push_back({record.record_id, entry.surface, entry.party_id, field});
            }
        }
    }
    return hits;
}

// ---------------------------------------------------------------------------
// Issue matching
// ---------------------------------------------------------------------------

/// Topic term lists: each canonical topic with its matchable synonyms.
/// CSV columns: topic, synonyms (semicolon-separated).
class IssueCatalog {
public:
    static IssueCatalog load(const std::string& path) {
        const auto table = csv::read_file(path);
        const int topic_col = table.column("topic");
        const int syn_col = table.column("synonyms");
        if (topic_col < 0 || syn_col < 0)
            throw ParseError(path + ": issue catalog needs columns topic,synonyms");
        IssueCatalog catalog;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            const std::string topic = row[static_cast<std::size_t>(topic_col)];
            std::vector<std::vector<std::string>> patterns;
            std::string synonyms = row[static_cast<std::size_t>(syn_col)];
            std::size_t start = 0;
            while (start <= synonyms.size()) {
                const auto end = synonyms.find(';', start);
                const std::string term = synonyms.substr(
                    start, end == std::string::npos ? std::string::npos : end - start);
                auto tokens = tokenize(term);
                if (!tokens.empty()) patterns.push_back(std::move(tokens));
                if (end == std::string::npos) break;
                start = end + 1;
            }
            catalog.topics_.emplace_back(topic, std::move(patterns));
        }
        return catalog;
    }

    static IssueCatalog from_terms(
        const std::vector<std::pair<std::string, std::vector<std::string>>>& topic_terms) {
        IssueCatalog catalog;
        for (const auto& [topic, terms] : topic_terms) {
            std::vector<std::vector<std::string>> patterns;
            for (const auto& t : terms) {
                auto tokens = tokenize(t);
                if (!tokens.empty()) patterns.push_back(std::move(tokens));
            }
            catalog.topics_.emplace_back(topic, std::move(patterns));
        }
        return catalog;
    }

    const std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>>& topics()
        const {
        return topics_;
    }

private:
    std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>> topics_;
};

/// Finds policy-issue references; a topic hits when any of its terms occurs.
inline std::vector<RawHit> match_issues(const ResultRecord& record,
                                        const IssueCatalog& catalog) {
    std::vector<RawHit> hits;
    std::vector<std::pair<SourceField, std::vector<std::string>>> fields;
    if (record.is_llm()) {
        if (record.answer_text)
            fields.emplace_back(SourceField::AnswerText, tokenize(*record.answer_text));
    } else {
        if (record.headline)
            fields.emplace_back(SourceField::Headline, tokenize(*record.headline));
        if (record.url) fields.emplace_back(SourceField::Url, tokenize(*record.url));
    }
    for (const auto& [topic, patterns] : catalog.topics()) {
        for (const auto& [field, tokens] : fields) {
            bool found = false;
            std::string matched;
            for (const auto& pattern : patterns) {
                if (contains_sequence(tokens, pattern)) {
                    found = true;
                    for (const auto& t : pattern) {
                        if (!matched.empty()) matched += ' ';
                        matched += t;
                    }
                    break;
                }
            }
            if (found) hits.push_back({record.record_id, matched, topic, field});
        }
    }
    return hits;
}

// ---------------------------------------------------------------------------
// Dedup
// ---------------------------------------------------------------------------

/// Maps a resolved party/topic id to its category; ids without a category
/// (unresolved spectrum terms, uncounted groups) are excluded from counting.
using CategoryResolver = std::function<std::optional<Category>(const std::string&)>;

inline CategoryResolver resolver_for(const ingest::EntityLexicon& lexicon) {
    return [&lexicon](const std::string& id) { return lexicon.category_of(id); };
}

inline CategoryResolver resolver_for_issues(const std::map<std::string, Category>& topic_cats) {
    return [&topic_cats](const std::string& topic) -> std::optional<Category> {
        const auto it = topic_cats.find(topic);
        if (it == topic_cats.end())
            throw UnmappedParty("topic '" + topic + "' has no issue category");
        return it->second;
    };
}

/// Applies the counting rules to one record's hits:
///  - a party seen in both headline and url counts once;
///  - EU5: entities of the same group/leaning collapse to one mention;
///  - USParty: one mention per party; USIssue5: one mention per topic.
/// Output order is deterministic (category, then resolved id).
inline std::vector<Mention> dedupe(const std::vector<RawHit>& hits, Scheme scheme,
                                   const CategoryResolver& resolve) {
    if (hits.empty()) return {};
    const std::string& record_id = hits.front().record_id;
    for (const auto& h : hits) {
        if (h.record_id != record_id)
            throw MixedRecordIds("dedupe expects hits from a single record, got '" + record_id +
                                 "' and '" + h.record_id + "'");
    }
    std::map<std::pair<int, std::string>, Mention> slots;  // (category index, dedup key)
    for (const auto& h : hits) {
        const auto category = resolve(h.party_or_topic);
        if (!category) continue;  // uncounted bucket
        // EU family counting collapses at the leaning level; US keeps one
        // per party, issues one per topic. For USParty the party and the
        // category coincide, so the key reduces to the category there too.
        const std::string key = (scheme == Scheme::USIssue5) ? h.party_or_topic : "";
        const auto slot_key = std::make_pair(category->index(), key);
        auto it = slots.find(slot_key);
        if (it == slots.end()) {
            slots.emplace(slot_key,
                          Mention{h.record_id, h.surface, h.party_or_topic, *category,
                                  h.source_field});
        } else if (h.source_field == SourceField::Headline &&
                   it->second.source_field == SourceField::Url) {
            // Prefer the headline occurrence as the representative.
            it->second.raw_surface = h.surface;
            it->second.source_field = SourceField::Headline;
        }
    }
    std::vector<Mention> mentions;
    mentions.reserve(slots.size());
    for (auto& [_, m] : slots) mentions.push_back(std::move(m));
    return mentions;
}

// ---------------------------------------------------------------------------
// Remote extractor (mirrors the LLM-assisted pipeline behind an interface)
// ---------------------------------------------------------------------------

/// Transport for the remote extraction service. Implementations throw
/// RateLimited or RemoteUnavailable for transient failures.
class RemoteClient {
public:
    virtual ~RemoteClient() = default;
    virtual std::string send(const std::string& prompt) = 0;
};

struct PromptTemplate {
    std::string text;  // placeholders: {url} {headline} {answer}

    static PromptTemplate load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open prompt template '" + path + "'");
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        return PromptTemplate{std::move(content)};
    }

    std::string render(const ResultRecord& r) const {
        std::string out = text;
        auto replace_all = [&out](const std::string& key, const std::string& value) {
            std::size_t pos = 0;
            while ((pos = out.find(key, pos)) != std::string::npos) {
                out.replace(pos, key.size(), value);
                pos += value.size();
            }
        };
        replace_all("{url}", r.url.value_or(""));
        replace_all("{headline}", r.headline.value_or(""));
        replace_all("{answer}", r.answer_text.value_or(""));
        return out;
    }
};

struct RemoteOptions {
    int max_retries = 5;
    std::chrono::milliseconds backoff_base{100};
    // Injectable so tests do not sleep for real.
    std::function<void(std::chrono::milliseconds)> sleeper =
        [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
};

/// Parses the remote response: one party name per line (or semicolon
/// separated), "NONE" or an empty body meaning no entities. Every name must
/// resolve through the lexicon party map; anything else is a format error
/// and the record goes to the manual-review queue.
inline std::vector<RawHit> parse_remote_response(const std::string& body,
                                                 const ResultRecord& record,
                                                 const ingest::EntityLexicon& lexicon) {
    std::vector<RawHit> hits;
    std::string token;
    std::vector<std::string> names;
    for (char c : body + "\n") {
        if (c == '\n' || c == ';') {
            const auto begin = token.find_first_not_of(" \t\r-*");
            const auto end = token.find_last_not_of(" \t\r");
            if (begin != std::string::npos) names.push_back(token.substr(begin, end - begin + 1));
            token.clear();
        } else {
            token += c;
        }
    }
    const SourceField field = record.is_llm() ? SourceField::AnswerText : SourceField::Headline;
    for (const auto& name : names) {
        if (name == "NONE") continue;
        if (!lexicon.has_party(name))
            throw RemoteFormatError("remote response names unknown party '" + name + "'");
        hits.push_back({record.record_id, name, name, field});
    }
    return hits;
}

/// Sends one record through the remote extractor with bounded retries.
inline std::vector<RawHit> extract_remote(const ResultRecord& record, RemoteClient& client,
                                          const PromptTemplate& prompt,
                                          const ingest::EntityLexicon& lexicon,
                                          const RemoteOptions& options = {}) {
    const std::string rendered = prompt.render(record);
    int attempt = 0;
    for (;;) {
        try {
            return parse_remote_response(client.send(rendered), record, lexicon);
        } catch (const RateLimited&) {
            if (++attempt > options.max_retries) throw;
        } catch (const RemoteUnavailable&) {
            if (++attempt > options.max_retries) throw;
        }
        options.sleeper(options.backoff_base * (1 << (attempt - 1)));
    }
}

struct RemoteBatchResult {
    std::map<std::string, std::vector<RawHit>> hits_by_record;
    std::vector<std::string> flagged_for_review;  // record ids with format errors
};

/// Batch variant: bounded parallel in-flight requests (default 4), output
/// keyed and ordered by record_id regardless of scheduling.
inline RemoteBatchResult extract_remote_batch(const std::vector<ResultRecord>& records,
                                              RemoteClient& client,
                                              const PromptTemplate& prompt,
                                              const ingest::EntityLexicon& lexicon,
                                              int max_in_flight = 4,
                                              const RemoteOptions& options = {}) {
    RemoteBatchResult result;
    std::mutex mutex;
    std::size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            std::size_t index;
            {
                std::lock_guard lock(mutex);
                if (next >= records.size()) return;
                index = next++;
            }
            const auto& record = records[index];
            try {
                auto hits = extract_remote(record, client, prompt, lexicon, options);
                std::lock_guard lock(mutex);
                result.hits_by_record[record.record_id] = std::move(hits);
            } catch (const RemoteFormatError&) {
                std::lock_guard lock(mutex);
                result.flagged_for_review.push_back(record.record_id);
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(max_in_flight,
                                                    static_cast<int>(records.size())));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    std::sort(result.flagged_for_review.begin(), result.flagged_for_review.end());
    return result;
}

}  // namespace salience::extract
