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

struct GradCheckDims {
    std::size_t bits = 8;
    std::size_t batch = 6;
    std::size_t classes = 4;
    std::size_t dim = 10;
    std::size_t hidden = 0;
};

struct GradCheckRow {
    std::string term;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::uint64_t seed = 0;
    std::vector<GradCheckRow> rows;

    double worst() const;
    bool all_below(double tol) const;
};

// Compares every analytic gradient (the four loss terms with respect to the
// outputs, the classifier parameters, and all head parameters through the
// combined objective) against central finite differences on a random
// problem of the given dimensions. Deterministic in (dims, seed).
GradCheckReport run_gradcheck(const GradCheckDims& dims, std::uint64_t seed);

}  // namespace rcdh
