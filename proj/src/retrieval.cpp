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

#include "rcdh/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "rcdh/io.hpp"
#include "rcdh/kernels.hpp"

namespace rcdh {

namespace {
constexpr char kMagic[4] = {'R', 'C', 'B', 'C'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void binarize(const double* u, std::size_t k, std::uint64_t* out) {
    const std::size_t nwords = (k + 63) / 64;
    std::fill(out, out + nwords, std::uint64_t{0});
    for (std::size_t j = 0; j < k; ++j) {
        if (u[j] >= 0.0) out[j / 64] |= std::uint64_t{1} << (j % 64);
    }
}

HashCodeSet binarize_rows(const double* u, std::size_t n, std::size_t k) {
    HashCodeSet set;
    set.n = n;
    set.bits = k;
    set.words.assign(n * set.words_per_code(), 0);
    for (std::size_t i = 0; i < n; ++i) binarize(u + i * k, k, set.code(i));
    return set;
}

std::uint32_t hamming(const HashCodeSet& a, std::size_t i, const HashCodeSet& b, std::size_t j) {
    if (a.bits != b.bits) throw std::invalid_argument("hamming: code width mismatch");
    return static_cast<std::uint32_t>(
        kernels::hamming_u64(a.code(i), b.code(j), a.words_per_code()));
}

std::vector<QueryHit> query(const HashCodeSet& gallery, const std::uint64_t* q,
                            std::size_t q_bits, std::size_t top) {
    if (q_bits != gallery.bits) throw std::invalid_argument("query: code width mismatch");
    if (top == 0) throw std::invalid_argument("query: top must be >= 1");

    const std::size_t nwords = gallery.words_per_code();
    std::vector<QueryHit> hits(gallery.n);
    for (std::size_t i = 0; i < gallery.n; ++i) {
        hits[i].index = i;
        hits[i].distance =
            static_cast<std::uint32_t>(kernels::hamming_u64(gallery.code(i), q, nwords));
    }
    std::sort(hits.begin(), hits.end(), [](const QueryHit& x, const QueryHit& y) {
        if (x.distance != y.distance) return x.distance < y.distance;
        return x.index < y.index;
    });
    if (hits.size() > top) hits.resize(top);
    return hits;
}

void save_codes(const HashCodeSet& codes, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open codes file for writing: " + path);
    io::write_magic(out, kMagic);
    io::write_u32(out, kVersion);
    io::write_u32(out, static_cast<std::uint32_t>(codes.n));
    io::write_u32(out, static_cast<std::uint32_t>(codes.bits));
    const std::size_t row_bytes = (codes.bits + 7) / 8;
    for (std::size_t i = 0; i < codes.n; ++i) {
        const std::uint64_t* row = codes.code(i);
        for (std::size_t b = 0; b < row_bytes; ++b) {
            const std::uint64_t word = row[b / 8];
            io::write_u8(out, static_cast<std::uint8_t>((word >> ((b % 8) * 8)) & 0xffu));
        }
    }
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

HashCodeSet load_codes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open codes file: " + path);
    io::expect_magic(in, kMagic, "codes");
    const std::uint32_t version = io::read_u32(in, "codes version");
    if (version != kVersion)
        throw std::runtime_error("unsupported codes version " + std::to_string(version));

    HashCodeSet set;
    set.n = io::read_u32(in, "codes count");
    set.bits = io::read_u32(in, "codes width");
    if (set.bits == 0) throw std::runtime_error("codes file: zero code width");
    set.words.assign(set.n * set.words_per_code(), 0);

    const std::size_t row_bytes = (set.bits + 7) / 8;
    for (std::size_t i = 0; i < set.n; ++i) {
        std::uint64_t* row = set.code(i);
        for (std::size_t b = 0; b < row_bytes; ++b) {
            const std::uint64_t byte = io::read_u8(in, "code row");
            row[b / 8] |= byte << ((b % 8) * 8);
        }
        // Bits beyond the declared width must be clear, both in the last
        // byte and in the tail of the last word.
        if (set.bits % 64 != 0) {
            const std::uint64_t mask = (std::uint64_t{1} << (set.bits % 64)) - 1;
            if ((row[set.words_per_code() - 1] & ~mask) != 0)
                throw std::runtime_error("codes file: nonzero padding bits in row " +
                                         std::to_string(i));
        }
    }
    return set;
}

}  // namespace rcdh
