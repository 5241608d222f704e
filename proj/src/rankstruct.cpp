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

#include "rcdh/rankstruct.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace rcdh {

std::size_t common_label_count(const std::uint8_t* a, const std::uint8_t* b, std::size_t c) {
    std::size_t s = 0;
    for (std::size_t t = 0; t < c; ++t) s += static_cast<std::size_t>(a[t] & b[t]);
    return s;
}

std::vector<std::size_t> select_candidates(const MultiLabelDataset& ds, std::size_t anchor,
                                           std::size_t n_r) {
    if (anchor >= ds.n) throw std::out_of_range("select_candidates: anchor out of range");
    if (n_r == 0) throw std::invalid_argument("select_candidates: n_r must be >= 1");

    const std::uint8_t* ya = ds.label_row(anchor);
    std::vector<std::pair<std::size_t, std::size_t>> scored;  // (count, index)
    scored.reserve(ds.n > 0 ? ds.n - 1 : 0);
    for (std::size_t j = 0; j < ds.n; ++j) {
        if (j == anchor) continue;
        scored.emplace_back(common_label_count(ya, ds.label_row(j), ds.c), j);
    }
    // Highest count first; equal counts keep ascending index order.
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (scored.size() > n_r) scored.resize(n_r);

    std::vector<std::size_t> out;
    out.reserve(scored.size());
    for (const auto& [count, idx] : scored) out.push_back(idx);
    return out;
}

RankPartition build_partition(const MultiLabelDataset& ds, std::size_t anchor,
                              const std::vector<std::size_t>& candidates, std::size_t bits,
                              IntervalStrategy strategy) {
    if (candidates.empty()) throw std::invalid_argument("build_partition: empty candidate list");
    if (bits == 0) throw std::invalid_argument("build_partition: bits must be >= 1");
    if (anchor >= ds.n) throw std::out_of_range("build_partition: anchor out of range");

    const std::uint8_t* ya = ds.label_row(anchor);
    std::map<std::size_t, std::vector<std::size_t>, std::greater<>> groups;
    for (std::size_t j : candidates) {
        if (j >= ds.n) throw std::out_of_range("build_partition: candidate out of range");
        groups[common_label_count(ya, ds.label_row(j), ds.c)].push_back(j);
    }

    RankPartition part;
    part.anchor = anchor;
    part.bits = bits;
    part.subsets.reserve(groups.size());
    for (auto& [count, members] : groups) {
        std::sort(members.begin(), members.end());
        RankSubset sub;
        sub.common_labels = count;
        sub.members = std::move(members);
        part.subsets.push_back(std::move(sub));
    }

    const double k = static_cast<double>(bits);
    const std::size_t p1 = part.subsets.front().common_labels;
    const std::size_t pm = part.subsets.back().common_labels;

    if (strategy == IntervalStrategy::kCrcdh) {
        // Equal-width overlapping intervals: step s = K/(p_1 - p_m + 2),
        // subset j gets [s*(p_1 - p_j), s*(p_1 - p_j + 2)].
        const double s = k / static_cast<double>(p1 - pm + 2);
        for (auto& sub : part.subsets) {
            const double drop = static_cast<double>(p1 - sub.common_labels);
            sub.d_lo = s * drop;
            // The top of the last interval is K up to rounding; clamp so the
            // d_hi <= K contract holds bit-for-bit.
            sub.d_hi = std::min(s * (drop + 2.0), k);
        }
    } else {
        // Contiguous tiling of [0, K]: width proportional to the gap from the
        // previous subset's count, with the first gap pinned at 1. Bounds are
        // computed from cumulative gap sums so the tiles meet exactly and the
        // last one ends at exactly K.
        const std::size_t m = part.subsets.size();
        std::vector<double> gap(m);
        gap[0] = 1.0;
        for (std::size_t j = 1; j < m; ++j)
            gap[j] = static_cast<double>(part.subsets[j - 1].common_labels -
                                         part.subsets[j].common_labels);
        double total = 0.0;
        for (double g : gap) total += g;
        double cum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            part.subsets[j].d_lo = k * cum / total;
            cum += gap[j];
            part.subsets[j].d_hi = k * cum / total;
        }
        part.subsets.back().d_hi = k;  // cum == total here; make it exact
    }
    return part;
}

}  // namespace rcdh
