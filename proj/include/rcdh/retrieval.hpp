// Copyright 2026-present the rcdh project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rcdh {

// N packed K-bit codes. Bit j of a code is stored in word j/64 at position
// j%64; set means +1, clear means -1. Padding bits above K are zero.
struct HashCodeSet {
    std::size_t n = 0;
    std::size_t bits = 0;
    std::vector<std::uint64_t> words;

    std::size_t words_per_code() const { return (bits + 63) / 64; }
    const std::uint64_t* code(std::size_t i) const { return words.data() + i * words_per_code(); }
    std::uint64_t* code(std::size_t i) { return words.data() + i * words_per_code(); }
};

struct QueryHit {
    std::size_t index = 0;
    std::uint32_t distance = 0;
};

// Packs sign(u) into out (words_per_code words for k bits); bit j set iff
// u[j] >= 0. Clears padding bits.
void binarize(const double* u, std::size_t k, std::uint64_t* out);

// Binarize n rows of k-dim outputs into a code set.
HashCodeSet binarize_rows(const double* u, std::size_t n, std::size_t k);

// Hamming distance between two packed codes of the same width.
std::uint32_t hamming(const HashCodeSet& a, std::size_t i, const HashCodeSet& b, std::size_t j);

// Exhaustive scan: the min(top, n) gallery entries nearest to q, ascending
// distance, ties by ascending index.
std::vector<QueryHit> query(const HashCodeSet& gallery, const std::uint64_t* q,
                            std::size_t q_bits, std::size_t top);

void save_codes(const HashCodeSet& codes, const std::string& path);
HashCodeSet load_codes(const std::string& path);

}  // namespace rcdh
