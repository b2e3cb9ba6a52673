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

#include <stdexcept>
#include <string>

namespace salience {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SALIENCE_DEFINE_ERROR(Name)                                 \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& msg) : Error(msg) {}       \
    }

// ingestion
SALIENCE_DEFINE_ERROR(ParseError);
SALIENCE_DEFINE_ERROR(SchemaViolation);
SALIENCE_DEFINE_ERROR(NegativeValue);
SALIENCE_DEFINE_ERROR(MissingCategory);
SALIENCE_DEFINE_ERROR(ZeroTotal);
SALIENCE_DEFINE_ERROR(DuplicateSurface);
SALIENCE_DEFINE_ERROR(UnmappedParty);
SALIENCE_DEFINE_ERROR(SelectionExceedsTotal);

// extraction
SALIENCE_DEFINE_ERROR(MixedRecordIds);
SALIENCE_DEFINE_ERROR(RemoteUnavailable);
SALIENCE_DEFINE_ERROR(RemoteFormatError);
SALIENCE_DEFINE_ERROR(RateLimited);

// leaning
SALIENCE_DEFINE_ERROR(TopicAbsentEverywhere);
SALIENCE_DEFINE_ERROR(BadThresholds);

// stats
SALIENCE_DEFINE_ERROR(EmptyCounts);
SALIENCE_DEFINE_ERROR(SchemeMismatch);
SALIENCE_DEFINE_ERROR(DegenerateP0);
SALIENCE_DEFINE_ERROR(TooFewQueries);
SALIENCE_DEFINE_ERROR(OptimizerNoConverge);
SALIENCE_DEFINE_ERROR(NoTestableStrata);
SALIENCE_DEFINE_ERROR(EmptyMentions);

// simulation
SALIENCE_DEFINE_ERROR(MissingSpec);
SALIENCE_DEFINE_ERROR(BadDistribution);
SALIENCE_DEFINE_ERROR(ConfigInvalid);

// reporting
SALIENCE_DEFINE_ERROR(MixedSchemes);

#undef SALIENCE_DEFINE_ERROR

}  // namespace salience
