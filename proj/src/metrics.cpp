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

#include "rcdh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "rcdh/rankstruct.hpp"

namespace rcdh {

std::vector<std::size_t> relevance(const std::uint8_t* y_q, std::size_t c,
                                   const std::vector<std::size_t>& ranked,
                                   const MultiLabelDataset& gallery) {
    if (c != gallery.c) throw std::invalid_argument("relevance: class count mismatch");
    std::vector<std::size_t> rel;
    rel.reserve(ranked.size());
    for (std::size_t idx : ranked) {
        if (idx >= gallery.n) throw std::out_of_range("relevance: gallery index out of range");
        rel.push_back(common_label_count(y_q, gallery.label_row(idx), c));
    }
    return rel;
}

double dcg(const std::vector<std::size_t>& rel, std::size_t p) {
    if (p < 1) throw std::invalid_argument("dcg: p must be >= 1");
    const std::size_t depth = std::min(p, rel.size());
    double g = 0.0;
    for (std::size_t i = 0; i < depth; ++i) {
        const double gain = std::pow(2.0, static_cast<double>(rel[i])) - 1.0;
        g += gain / std::log(static_cast<double>(i + 2));  // positions are 1-based
    }
    return g;
}

double ndcg(const std::vector<std::size_t>& rel, const std::vector<std::size_t>& ideal,
            std::size_t p) {
    const double z = dcg(ideal, p);
    if (z == 0.0) return 0.0;
    return dcg(rel, p) / z;
}

double acg(const std::vector<std::size_t>& rel, std::size_t p) {
    if (p < 1) throw std::invalid_argument("acg: p must be >= 1");
    const std::size_t depth = std::min(p, rel.size());
    if (depth == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < depth; ++i) s += static_cast<double>(rel[i]);
    return s / static_cast<double>(depth);
}

EvalResult evaluate(const MultiLabelDataset& queries, const MultiLabelDataset& gallery,
                    const HashCodeSet& query_codes, const HashCodeSet& gallery_codes,
                    std::size_t p, bool exclude_self) {
    if (p < 1) throw std::invalid_argument("evaluate: p must be >= 1");
    if (queries.c != gallery.c) throw std::invalid_argument("evaluate: class count mismatch");
    if (query_codes.n != queries.n)
        throw std::invalid_argument("evaluate: query codes do not match query set size");
    if (gallery_codes.n != gallery.n)
        throw std::invalid_argument("evaluate: gallery codes do not match gallery size");
    if (query_codes.bits != gallery_codes.bits)
        throw std::invalid_argument("evaluate: code width mismatch");
    if (gallery.n == 0) throw std::invalid_argument("evaluate: empty gallery");

    EvalResult result;
    result.queries = queries.n;
    std::vector<std::size_t> ranked;
    for (std::size_t q = 0; q < queries.n; ++q) {
        const auto hits = query(gallery_codes, query_codes.code(q), query_codes.bits, gallery.n);
        ranked.clear();
        for (const auto& h : hits) {
            if (exclude_self && h.index == q) continue;
            ranked.push_back(h.index);
        }
        const auto rel = relevance(queries.label_row(q), queries.c, ranked, gallery);
        auto ideal = rel;
        std::sort(ideal.begin(), ideal.end(), std::greater<>());
        result.mean_ndcg += ndcg(rel, ideal, p);
        result.mean_acg += acg(rel, p);
    }
    if (queries.n > 0) {
        result.mean_ndcg /= static_cast<double>(queries.n);
        result.mean_acg /= static_cast<double>(queries.n);
    }
    return result;
}

}  // namespace rcdh
