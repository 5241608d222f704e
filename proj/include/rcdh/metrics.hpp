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
#include "rcdh/retrieval.hpp"

namespace rcdh {

// Relevance of gallery item i to a query = number of labels they share.
// Computed over a ranked retrieval list, in retrieved order.
std::vector<std::size_t> relevance(const std::uint8_t* y_q, std::size_t c,
                                   const std::vector<std::size_t>& ranked,
                                   const MultiLabelDataset& gallery);

// Discounted cumulative gain truncated at p: sum of (2^r_i - 1)/ln(1+i),
// i counted from 1. The log base cancels in the NDCG ratio.
double dcg(const std::vector<std::size_t>& rel, std::size_t p);

// dcg(rel)/dcg(ideal), where ideal is the same relevance multiset sorted
// descending and truncated at p. Returns 0 when the ideal gain is 0.
double ndcg(const std::vector<std::size_t>& rel, const std::vector<std::size_t>& ideal,
            std::size_t p);

// Mean of the first p relevances (p clamped to the list length).
double acg(const std::vector<std::size_t>& rel, std::size_t p);

struct EvalResult {
    double mean_ndcg = 0.0;
    double mean_acg = 0.0;
    std::size_t queries = 0;
};

// Rank the full gallery for every query by hamming distance, then average
// NDCG@p and ACG@p. The normalizer of each query's NDCG comes from its own
// full-gallery relevance multiset. exclude_self removes gallery row q from
// query q's ranking (for the gallery == query-set protocol).
EvalResult evaluate(const MultiLabelDataset& queries, const MultiLabelDataset& gallery,
                    const HashCodeSet& query_codes, const HashCodeSet& gallery_codes,
                    std::size_t p, bool exclude_self = false);

}  // namespace rcdh
