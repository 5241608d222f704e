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
#include <vector>

#include "rcdh/dataset.hpp"

namespace rcdh {

// How hamming-distance intervals are assigned to the per-anchor subsets.
// Crcdh gives every subset the same width 2s with neighbors overlapping;
// LegacyRcdh tiles [0, K] with widths proportional to the label-count gaps.
enum class IntervalStrategy { kCrcdh, kLegacyRcdh };

struct RankSubset {
    std::size_t common_labels = 0;      // shared-label count with the anchor
    std::vector<std::size_t> members;   // sample indices, ascending
    double d_lo = 0.0;                  // target hamming interval, in bits
    double d_hi = 0.0;
};

struct RankPartition {
    std::size_t anchor = 0;
    std::size_t bits = 0;
    std::vector<RankSubset> subsets;  // common_labels strictly decreasing
};

// Number of labels two rows share: dot product of their binary label rows.
std::size_t common_label_count(const std::uint8_t* a, const std::uint8_t* b, std::size_t c);

// The up-to n_r candidates most similar to the anchor, by descending
// common-label count, ties broken by ascending index. Anchor excluded.
std::vector<std::size_t> select_candidates(const MultiLabelDataset& ds, std::size_t anchor,
                                           std::size_t n_r);

// Group candidates by common-label count (descending) and assign each
// group its hamming interval per the chosen strategy.
RankPartition build_partition(const MultiLabelDataset& ds, std::size_t anchor,
                              const std::vector<std::size_t>& candidates, std::size_t bits,
                              IntervalStrategy strategy);

}  // namespace rcdh
