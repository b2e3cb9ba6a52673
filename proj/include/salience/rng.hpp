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

#include <cstdint>
#include <string_view>

namespace salience {

/// Counter-based 64-bit generator (SplitMix64 finalizer over an affine
/// counter sequence). Output i of a stream is mix(seed + (i+1)*GAMMA), so the
/// sequence depends only on (seed, label, i) and is identical on every
/// platform and under any threading layout. Named substreams are derived by
/// hashing a label into the seed, which keeps replica/bootstrap/permutation
/// streams independent of one another.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : base_(seed) {}

    /// Derive an independent substream from a text label.
    static CounterRng stream(std::uint64_t seed, std::string_view label) {
        return CounterRng(mix(seed ^ mix(fnv1a(label))));
    }

    /// Derive an independent substream from an integer label.
    static CounterRng stream(std::uint64_t seed, std::uint64_t label) {
        return CounterRng(mix(seed ^ mix(label + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t next_u64() {
        counter_ += 1;
        return mix(base_ + counter_ * kGamma);
    }

    /// Uniform double in [0, 1), 53 bits of resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). Lemire multiply-shift with rejection,
    /// unbiased and platform-stable.
    std::uint64_t next_below(std::uint64_t bound) {
        using u128 = unsigned __int128;
        std::uint64_t x = next_u64();
        u128 m = static_cast<u128>(x) * static_cast<u128>(bound);
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<u128>(x) * static_cast<u128>(bound);
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool next_bool() { return (next_u64() >> 63) != 0; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    static constexpr std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace salience
