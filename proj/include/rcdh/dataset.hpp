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

// Multi-label dataset: N rows of D-dim float features plus N rows of C
// binary labels. Features are precomputed embeddings; no image decoding
// happens anywhere in this library.
struct MultiLabelDataset {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t c = 0;
    std::vector<float> features;   // n*d, row-major
    std::vector<std::uint8_t> labels;  // n*c, each 0 or 1

    const float* feature_row(std::size_t i) const { return features.data() + i * d; }
    float* feature_row(std::size_t i) { return features.data() + i * d; }
    std::uint8_t label(std::size_t i, std::size_t t) const { return labels[i * c + t]; }
    const std::uint8_t* label_row(std::size_t i) const { return labels.data() + i * c; }
};

struct SyntheticSpec {
    std::size_t c = 0;
    std::size_t per_class = 0;  // samples per label combination
    std::size_t d = 0;
    std::vector<std::vector<std::uint8_t>> label_combos;  // each of length c, multi-hot
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

// Throws std::runtime_error on bad magic, truncation, all-zero label rows
// (message names the row), or non-finite features.
MultiLabelDataset load_dataset(const std::string& path);

void save_dataset(const MultiLabelDataset& ds, const std::string& path);

// One gaussian cluster per label combo. Each class gets an anchor
// direction and a combo's mean is the sum of its classes' anchors scaled
// onto a radius-4 hypersphere, so shared labels show up as nearby clusters
// while distinct combos stay separable at moderate noise. Samples are
// mean + noise_sigma * standard normal, laid out combo-major.
MultiLabelDataset generate_synthetic(const SyntheticSpec& spec);

// Throws if any invariant fails (label entries binary, no all-zero label
// row, all features finite, sizes consistent).
void validate_dataset(const MultiLabelDataset& ds);

}  // namespace rcdh
