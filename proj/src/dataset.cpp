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

#include "rcdh/dataset.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "rcdh/io.hpp"
#include "rcdh/rng.hpp"

namespace rcdh {

namespace {
constexpr char kMagic[4] = {'R', 'C', 'H', 'D'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void validate_dataset(const MultiLabelDataset& ds) {
    if (ds.features.size() != ds.n * ds.d)
        throw std::runtime_error("dataset: feature buffer size mismatch");
    if (ds.labels.size() != ds.n * ds.c)
        throw std::runtime_error("dataset: label buffer size mismatch");
    for (std::size_t i = 0; i < ds.n; ++i) {
        bool any = false;
        for (std::size_t t = 0; t < ds.c; ++t) {
            const std::uint8_t y = ds.labels[i * ds.c + t];
            if (y > 1)
                throw std::runtime_error("dataset: non-binary label at row " + std::to_string(i));
            any = any || (y == 1);
        }
        if (!any)
            throw std::runtime_error("dataset: all-zero label row " + std::to_string(i));
    }
    for (std::size_t i = 0; i < ds.features.size(); ++i) {
        if (!std::isfinite(ds.features[i]))
            throw std::runtime_error("dataset: non-finite feature at row " +
                                     std::to_string(i / ds.d));
    }
}

MultiLabelDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    io::expect_magic(in, kMagic, "dataset");
    const std::uint32_t version = io::read_u32(in, "dataset version");
    if (version != kVersion)
        throw std::runtime_error("unsupported dataset version " + std::to_string(version));

    MultiLabelDataset ds;
    ds.n = io::read_u32(in, "dataset row count");
    ds.d = io::read_u32(in, "dataset feature dim");
    ds.c = io::read_u32(in, "dataset class count");
    if (ds.d == 0 || ds.c == 0)
        throw std::runtime_error("dataset: zero feature dim or class count");

    ds.features.resize(ds.n * ds.d);
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        ds.features[i] = io::read_f32(in, "dataset feature");

    const std::size_t row_bytes = (ds.c + 7) / 8;
    ds.labels.assign(ds.n * ds.c, 0);
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t b = 0; b < row_bytes; ++b) {
            const std::uint8_t byte = io::read_u8(in, "dataset label row");
            for (std::size_t bit = 0; bit < 8; ++bit) {
                const std::size_t t = b * 8 + bit;
                if (t < ds.c) ds.labels[i * ds.c + t] = (byte >> bit) & 1u;
            }
        }
    }
    validate_dataset(ds);
    return ds;
}

void save_dataset(const MultiLabelDataset& ds, const std::string& path) {
    validate_dataset(ds);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path);
    io::write_magic(out, kMagic);
    io::write_u32(out, kVersion);
    io::write_u32(out, static_cast<std::uint32_t>(ds.n));
    io::write_u32(out, static_cast<std::uint32_t>(ds.d));
    io::write_u32(out, static_cast<std::uint32_t>(ds.c));
    for (float f : ds.features) io::write_f32(out, f);

    const std::size_t row_bytes = (ds.c + 7) / 8;
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t b = 0; b < row_bytes; ++b) {
            std::uint8_t byte = 0;
            for (std::size_t bit = 0; bit < 8; ++bit) {
                const std::size_t t = b * 8 + bit;
                if (t < ds.c && ds.labels[i * ds.c + t]) byte |= std::uint8_t(1u << bit);
            }
            io::write_u8(out, byte);
        }
    }
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

MultiLabelDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.c == 0 || spec.d == 0 || spec.per_class == 0)
        throw std::runtime_error("synthetic spec: c, d, per_class must be positive");
    if (spec.label_combos.empty())
        throw std::runtime_error("synthetic spec: need at least one label combo");
    if (spec.noise_sigma < 0)
        throw std::runtime_error("synthetic spec: noise_sigma must be >= 0");
    for (const auto& combo : spec.label_combos) {
        if (combo.size() != spec.c)
            throw std::runtime_error("synthetic spec: combo length != class count");
        bool any = false;
        for (std::uint8_t b : combo) {
            if (b > 1) throw std::runtime_error("synthetic spec: combo entries must be 0/1");
            any = any || (b == 1);
        }
        if (!any) throw std::runtime_error("synthetic spec: all-zero combo");
    }

    Rng rng(spec.seed);
    const std::size_t m = spec.label_combos.size();

    // One anchor direction per class; a combo's mean is the sum of its
    // classes' anchors pushed onto a radius-4 hypersphere. Multi-label
    // clusters therefore sit between their single-label parents, the way a
    // two-tag image sits between the two tags' visual clusters, so label
    // overlap is echoed in feature space instead of every combo being an
    // island. Anchors are drawn before any samples so the layout is stable
    // when per_class changes.
    std::vector<double> anchors(spec.c * spec.d);
    for (double& a : anchors) a = rng.gaussian();

    std::vector<double> means(m * spec.d);
    for (std::size_t j = 0; j < m; ++j) {
        double* mean = means.data() + j * spec.d;
        for (std::size_t k = 0; k < spec.d; ++k) {
            double s = 0.0;
            for (std::size_t t = 0; t < spec.c; ++t)
                if (spec.label_combos[j][t]) s += anchors[t * spec.d + k];
            mean[k] = s;
        }
        double norm2 = 0.0;
        for (std::size_t k = 0; k < spec.d; ++k) norm2 += mean[k] * mean[k];
        if (norm2 <= 0.0)
            throw std::runtime_error("synthetic spec: degenerate combo mean, change the seed");
        const double scale = 4.0 / std::sqrt(norm2);
        for (std::size_t k = 0; k < spec.d; ++k) mean[k] *= scale;
    }

    MultiLabelDataset ds;
    ds.n = m * spec.per_class;
    ds.d = spec.d;
    ds.c = spec.c;
    ds.features.resize(ds.n * ds.d);
    ds.labels.resize(ds.n * ds.c);

    std::size_t row = 0;
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t s = 0; s < spec.per_class; ++s, ++row) {
            for (std::size_t k = 0; k < spec.d; ++k) {
                // Noise is drawn even at sigma 0 so the rng stream, and
                // therefore every later sample, does not shift with sigma.
                const double g = rng.gaussian();
                ds.features[row * ds.d + k] =
                    static_cast<float>(means[j * spec.d + k] + spec.noise_sigma * g);
            }
            for (std::size_t t = 0; t < spec.c; ++t)
                ds.labels[row * ds.c + t] = spec.label_combos[j][t];
        }
    }
    return ds;
}

}  // namespace rcdh
