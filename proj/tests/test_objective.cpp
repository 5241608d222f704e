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

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rcdh/objective.hpp"
#include "rcdh/rng.hpp"

namespace {

constexpr double kFdStep = 1e-6;

// Central finite difference of f at x[i].
double fd(std::vector<double>& x, std::size_t i, const std::function<double()>& f) {
    const double keep = x[i];
    x[i] = keep + kFdStep;
    const double up = f();
    x[i] = keep - kFdStep;
    const double dn = f();
    x[i] = keep;
    return (up - dn) / (2.0 * kFdStep);
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

rcdh::OutputBatch random_batch(std::size_t rows, std::size_t bits, rcdh::Rng& rng) {
    rcdh::OutputBatch batch;
    batch.bits = bits;
    batch.indices.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) batch.indices[r] = r;
    batch.u.resize(rows * bits);
    for (auto& x : batch.u) x = rng.uniform(-2.0, 2.0);
    return batch;
}

std::vector<std::uint8_t> random_label_rows(std::size_t rows, std::size_t classes,
                                            rcdh::Rng& rng) {
    std::vector<std::uint8_t> labels(rows * classes, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        bool any = false;
        for (std::size_t t = 0; t < classes; ++t) {
            const std::uint8_t y = rng.uniform01() < 0.45 ? 1 : 0;
            labels[r * classes + t] = y;
            any = any || y;
        }
        if (!any) labels[r * classes + rng.index(classes)] = 1;
    }
    return labels;
}

rcdh::ClassifierHead random_head(std::size_t classes, std::size_t bits, rcdh::Rng& rng) {
    rcdh::ClassifierHead head;
    head.classes = classes;
    head.bits = bits;
    head.w.resize(classes * bits);
    head.v.resize(classes);
    for (auto& x : head.w) x = rng.uniform(-0.7, 0.7);
    for (auto& x : head.v) x = rng.uniform(-0.2, 0.2);
    return head;
}

rcdh::CenterBank random_bank(std::size_t classes, std::size_t bits, rcdh::Rng& rng) {
    rcdh::CenterBank bank;
    bank.classes = classes;
    bank.bits = bits;
    bank.centers.resize(classes * bits);
    for (auto& x : bank.centers) x = rng.uniform(-1.0, 1.0);
    return bank;
}

// A partition list over every ordered anchor with all other rows as members,
// grouped per the equal-width strategy, built from explicit label rows.
std::vector<rcdh::RankPartition> all_pairs_partitions(const std::vector<std::uint8_t>& labels,
                                                      std::size_t rows, std::size_t classes,
                                                      std::size_t bits) {
    rcdh::MultiLabelDataset ds;
    ds.n = rows;
    ds.c = classes;
    ds.d = 1;
    ds.features.assign(rows, 0.0f);
    ds.labels = labels;
    std::vector<rcdh::RankPartition> parts;
    for (std::size_t a = 0; a < rows; ++a) {
        const auto cand = rcdh::select_candidates(ds, a, rows);
        parts.push_back(rcdh::build_partition(ds, a, cand, bits,
                                              rcdh::IntervalStrategy::kCrcdh));
    }
    return parts;
}

}  // namespace

TEST_SUITE("objective") {

TEST_CASE("softplus values, tails and identities") {
    CHECK(rcdh::softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(rcdh::softplus(100.0) == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(rcdh::softplus(-100.0) == doctest::Approx(std::exp(-100.0)).epsilon(1e-12));
    CHECK(std::isfinite(rcdh::softplus(1000.0)));
    CHECK(rcdh::softplus(1000.0) == 1000.0);

    for (double z : {-5.0, -1.3, 0.0, 0.7, 2.5, 20.0}) {
        // softplus(z) - softplus(-z) = z
        CHECK(rcdh::softplus(z) - rcdh::softplus(-z) == doctest::Approx(z).epsilon(1e-12));
        // d/dz softplus = sigmoid
        const double num =
            (rcdh::softplus(z + kFdStep) - rcdh::softplus(z - kFdStep)) / (2.0 * kFdStep);
        CHECK(rel_err(num, rcdh::sigmoid(z)) < 1e-8);
    }
}

TEST_CASE("sigmoid basics") {
    CHECK(rcdh::sigmoid(0.0) == 0.5);
    CHECK(rcdh::sigmoid(30.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rcdh::sigmoid(-30.0) == doctest::Approx(0.0).epsilon(1e-12));
    for (double z : {-3.0, -0.5, 1.0, 4.0})
        CHECK(rcdh::sigmoid(z) + rcdh::sigmoid(-z) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sign maps zero to plus one") {
    CHECK(rcdh::sign_pm(3.2) == 1.0);
    CHECK(rcdh::sign_pm(-0.001) == -1.0);
    CHECK(rcdh::sign_pm(0.0) == 1.0);
}

TEST_CASE("relaxed hamming distance on hand vectors") {
    const std::vector<double> ones(8, 1.0);
    const std::vector<double> neg(8, -1.0);
    const std::vector<double> small(8, 0.2);
    CHECK(rcdh::relaxed_hamming(ones.data(), ones.data(), 8) == 0.0);
    CHECK(rcdh::relaxed_hamming(ones.data(), neg.data(), 8) == 8.0);
    // (8 - 8*0.2)/2 = 3.2
    CHECK(rcdh::relaxed_hamming(ones.data(), small.data(), 8) ==
          doctest::Approx(3.2).epsilon(1e-15));

    const std::vector<double> a = {1.0, -1.0, 1.0, -1.0};
    const std::vector<double> b = {1.0, 1.0, -1.0, -1.0};  // orthogonal
    CHECK(rcdh::relaxed_hamming(a.data(), b.data(), 4) == 2.0);
}

TEST_CASE("rank loss on a single hand-computed pair") {
    // K=8, anchor all ones, member all 0.2: relaxed distance 3.2; with the
    // interval (0, 6.4) and gamma=8 both hinge arguments are 3.2, so the
    // loss is 2*softplus(-3.2).
    rcdh::OutputBatch batch;
    batch.bits = 8;
    batch.indices = {0, 1};
    batch.u.assign(16, 1.0);
    for (std::size_t j = 8; j < 16; ++j) batch.u[j] = 0.2;

    rcdh::RankPartition part;
    part.anchor = 0;
    part.bits = 8;
    part.subsets.resize(1);
    part.subsets[0].common_labels = 1;
    part.subsets[0].members = {1};
    part.subsets[0].d_lo = 0.0;
    part.subsets[0].d_hi = 6.4;

    const double got = rcdh::rank_loss(batch, {part}, 8.0);
    const double want = 2.0 * std::log1p(std::exp(-3.2));
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got == doctest::Approx(0.0799067).epsilon(1e-5));
}

TEST_CASE("rank loss at an interval boundary uses the softplus of zero") {
    // Distance exactly at d_lo: the lower hinge contributes softplus(0).
    rcdh::OutputBatch batch;
    batch.bits = 4;
    batch.indices = {0, 1};
    batch.u = {1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0};  // distance (4-0)/2 = 2

    rcdh::RankPartition part;
    part.anchor = 0;
    part.bits = 4;
    part.subsets.resize(1);
    part.subsets[0].members = {1};
    part.subsets[0].d_lo = 2.0;
    part.subsets[0].d_hi = 5.0;

    const double gamma = 4.0;
    const double b_arg = (gamma / 4.0) * (5.0 - 2.0);
    const double want = std::log(2.0) + rcdh::softplus(-b_arg);
    CHECK(rcdh::rank_loss(batch, {part}, gamma) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("rank gradient matches the closed-form single-pair expression") {
    rcdh::OutputBatch batch;
    batch.bits = 4;
    batch.indices = {0, 1};
    batch.u = {0.5, -0.3, 0.8, -1.2, 1.0, 0.2, -0.4, 0.6};

    rcdh::RankPartition part;
    part.anchor = 0;
    part.bits = 4;
    part.subsets.resize(1);
    part.subsets[0].members = {1};
    part.subsets[0].d_lo = 1.0;
    part.subsets[0].d_hi = 3.0;

    const double gamma = 16.0;
    double dot = 0.0;
    for (std::size_t j = 0; j < 4; ++j) dot += batch.u[j] * batch.u[4 + j];
    const double dist = (4.0 - dot) / 2.0;
    const double a_arg = (gamma / 4.0) * (dist - 1.0);
    const double b_arg = (gamma / 4.0) * (3.0 - dist);
    const double coeff = (gamma / 8.0) * (rcdh::sigmoid(b_arg) - rcdh::sigmoid(a_arg));

    const auto grad = rcdh::rank_loss_grad(batch, {part}, gamma);
    REQUIRE(grad.size() == 8);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(grad[j] == doctest::Approx(coeff * batch.u[4 + j]).epsilon(1e-14));
        CHECK(grad[4 + j] == doctest::Approx(coeff * batch.u[j]).epsilon(1e-14));
    }
}

TEST_CASE("symmetric interval around the current distance gives zero gradient") {
    rcdh::OutputBatch batch;
    batch.bits = 4;
    batch.indices = {0, 1};
    batch.u = {1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0};  // distance 2

    rcdh::RankPartition part;
    part.anchor = 0;
    part.bits = 4;
    part.subsets.resize(1);
    part.subsets[0].members = {1};
    part.subsets[0].d_lo = 1.0;
    part.subsets[0].d_hi = 3.0;  // hinge arguments equal -> sigmoids cancel

    const auto grad = rcdh::rank_loss_grad(batch, {part}, 8.0);
    for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("rank term vanishes without partitions") {
    rcdh::Rng rng(2);
    auto batch = random_batch(3, 6, rng);
    CHECK(rcdh::rank_loss(batch, {}, 16.0) == 0.0);
    const auto grad = rcdh::rank_loss_grad(batch, {}, 16.0);
    for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("rank loss rejects partitions that reference rows outside the batch") {
    rcdh::Rng rng(3);
    auto batch = random_batch(2, 4, rng);
    rcdh::RankPartition part;
    part.anchor = 0;
    part.bits = 4;
    part.subsets.resize(1);
    part.subsets[0].members = {99};
    CHECK_THROWS_AS(rcdh::rank_loss(batch, {part}, 16.0), std::out_of_range);
    CHECK_THROWS_AS(rcdh::rank_loss_grad(batch, {part}, 16.0), std::out_of_range);
}

TEST_CASE("rank gradient matches finite differences") {
    rcdh::Rng rng(11);
    const std::size_t rows = 5, bits = 6, classes = 4;
    auto batch = random_batch(rows, bits, rng);
    const auto labels = random_label_rows(rows, classes, rng);
    const auto parts = all_pairs_partitions(labels, rows, classes, bits);
    const double gamma = 16.0;

    const auto grad = rcdh::rank_loss_grad(batch, parts, gamma);
    double worst = 0.0;
    for (std::size_t i = 0; i < batch.u.size(); ++i) {
        const double num =
            fd(batch.u, i, [&] { return rcdh::rank_loss(batch, parts, gamma); });
        worst = std::max(worst, rel_err(grad[i], num));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("classification loss on hand problems") {
    // All-zero logits: every row costs log C.
    rcdh::OutputBatch batch;
    batch.bits = 3;
    batch.indices = {0, 1};
    batch.u.assign(6, 0.7);
    rcdh::ClassifierHead zero_head;
    zero_head.classes = 4;
    zero_head.bits = 3;
    zero_head.w.assign(12, 0.0);
    zero_head.v.assign(4, 0.0);
    std::vector<std::uint8_t> labels = {1, 0, 0, 0, 0, 1, 1, 0};
    CHECK(rcdh::classification_loss(batch, labels, zero_head) ==
          doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-14));

    // Strong correct logit: z = (10, -10), y = (1, 0) costs log1p(e^-20).
    rcdh::OutputBatch one;
    one.bits = 1;
    one.indices = {0};
    one.u = {1.0};
    rcdh::ClassifierHead strong;
    strong.classes = 2;
    strong.bits = 1;
    strong.w = {10.0, -10.0};
    strong.v = {0.0, 0.0};
    std::vector<std::uint8_t> y10 = {1, 0};
    CHECK(rcdh::classification_loss(one, y10, strong) ==
          doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-12));

    // Multi-hot target with zero logits: logsumexp(0,0) - 0 = log 2.
    rcdh::ClassifierHead flat;
    flat.classes = 2;
    flat.bits = 1;
    flat.w.assign(2, 0.0);
    flat.v.assign(2, 0.0);
    std::vector<std::uint8_t> y11 = {1, 1};
    CHECK(rcdh::classification_loss(one, y11, flat) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("classification gradients on the zero-logit problem") {
    // softmax is uniform, so delta = (1/C - y) per class.
    rcdh::OutputBatch batch;
    batch.bits = 2;
    batch.indices = {0};
    batch.u = {0.3, -0.4};
    rcdh::ClassifierHead head;
    head.classes = 2;
    head.bits = 2;
    head.w.assign(4, 0.0);
    head.v.assign(2, 0.0);
    std::vector<std::uint8_t> labels = {1, 0};

    const auto grads = rcdh::classification_grads(batch, labels, head);
    CHECK(grads.dv[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(grads.dv[1] == doctest::Approx(0.5).epsilon(1e-15));
    // dW rows are delta_t * u.
    CHECK(grads.dw[0] == doctest::Approx(-0.5 * 0.3).epsilon(1e-15));
    CHECK(grads.dw[1] == doctest::Approx(-0.5 * -0.4).epsilon(1e-15));
    CHECK(grads.dw[2] == doctest::Approx(0.5 * 0.3).epsilon(1e-15));
    CHECK(grads.dw[3] == doctest::Approx(0.5 * -0.4).epsilon(1e-15));
    // du = W^T delta = 0 since W = 0.
    CHECK(grads.du[0] == 0.0);
    CHECK(grads.du[1] == 0.0);
}

TEST_CASE("classification gradients vanish when one logit dominates its target") {
    rcdh::OutputBatch batch;
    batch.bits = 1;
    batch.indices = {0};
    batch.u = {1.0};
    rcdh::ClassifierHead head;
    head.classes = 4;
    head.bits = 1;
    head.w = {40.0, 0.0, 0.0, 0.0};
    head.v.assign(4, 0.0);
    std::vector<std::uint8_t> labels = {1, 0, 0, 0};

    const auto grads = rcdh::classification_grads(batch, labels, head);
    for (double g : grads.du) CHECK(std::abs(g) < 1e-12);
    for (double g : grads.dw) CHECK(std::abs(g) < 1e-12);
    for (double g : grads.dv) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("classification gradients match finite differences") {
    rcdh::Rng rng(19);
    const std::size_t rows = 4, bits = 5, classes = 3;
    auto batch = random_batch(rows, bits, rng);
    auto head = random_head(classes, bits, rng);
    const auto labels = random_label_rows(rows, classes, rng);

    const auto grads = rcdh::classification_grads(batch, labels, head);
    double worst = 0.0;
    for (std::size_t i = 0; i < batch.u.size(); ++i)
        worst = std::max(
            worst, rel_err(grads.du[i], fd(batch.u, i, [&] {
                               return rcdh::classification_loss(batch, labels, head);
                           })));
    for (std::size_t i = 0; i < head.w.size(); ++i)
        worst = std::max(
            worst, rel_err(grads.dw[i], fd(head.w, i, [&] {
                               return rcdh::classification_loss(batch, labels, head);
                           })));
    for (std::size_t i = 0; i < head.v.size(); ++i)
        worst = std::max(
            worst, rel_err(grads.dv[i], fd(head.v, i, [&] {
                               return rcdh::classification_loss(batch, labels, head);
                           })));
    CHECK(worst < 1e-6);
}

TEST_CASE("clustering loss on hand configurations") {
    const std::size_t bits = 3;
    rcdh::CenterBank bank;
    bank.classes = 2;
    bank.bits = bits;
    bank.centers = {1.0, 0.0, -1.0, 0.0, 2.0, 0.5};

    rcdh::OutputBatch batch;
    batch.bits = bits;
    batch.indices = {0};

    // Output exactly at its only center: zero loss, zero gradient.
    batch.u = {1.0, 0.0, -1.0};
    std::vector<std::uint8_t> y0 = {1, 0};
    CHECK(rcdh::clustering_loss(batch, y0, bank) == 0.0);
    for (double g : rcdh::clustering_grad(batch, y0, bank)) CHECK(g == 0.0);

    // Unit offset from the single center: loss (1/2)*1/(1+eps).
    batch.u = {2.0, 0.0, -1.0};
    CHECK(rcdh::clustering_loss(batch, y0, bank) ==
          doctest::Approx(0.5 / (1.0 + 1e-8)).epsilon(1e-12));

    // Two labels, both centers at squared distance r2: loss r2/(2+eps) and
    // gradient (2u - c0 - c1)/(2+eps).
    batch.u = {0.0, 1.0, 0.25};
    std::vector<std::uint8_t> y11 = {1, 1};
    double r2_0 = 0.0, r2_1 = 0.0;
    for (std::size_t j = 0; j < bits; ++j) {
        r2_0 += (batch.u[j] - bank.centers[j]) * (batch.u[j] - bank.centers[j]);
        r2_1 += (batch.u[j] - bank.centers[bits + j]) * (batch.u[j] - bank.centers[bits + j]);
    }
    CHECK(rcdh::clustering_loss(batch, y11, bank) ==
          doctest::Approx(0.5 * (r2_0 + r2_1) / (2.0 + 1e-8)).epsilon(1e-12));
    const auto grad = rcdh::clustering_grad(batch, y11, bank);
    for (std::size_t j = 0; j < bits; ++j) {
        const double want =
            (2.0 * batch.u[j] - bank.centers[j] - bank.centers[bits + j]) / (2.0 + 1e-8);
        CHECK(grad[j] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("clustering gradient matches finite differences") {
    rcdh::Rng rng(23);
    const std::size_t rows = 4, bits = 5, classes = 3;
    auto batch = random_batch(rows, bits, rng);
    auto bank = random_bank(classes, bits, rng);
    const auto labels = random_label_rows(rows, classes, rng);

    const auto grad = rcdh::clustering_grad(batch, labels, bank);
    double worst = 0.0;
    for (std::size_t i = 0; i < batch.u.size(); ++i)
        worst = std::max(worst, rel_err(grad[i], fd(batch.u, i, [&] {
                                            return rcdh::clustering_loss(batch, labels, bank);
                                        })));
    CHECK(worst < 1e-6);
}

TEST_CASE("gradient descent on the clustering term is monotone") {
    rcdh::Rng rng(29);
    const std::size_t rows = 3, bits = 4, classes = 2;
    auto batch = random_batch(rows, bits, rng);
    auto bank = random_bank(classes, bits, rng);
    const auto labels = random_label_rows(rows, classes, rng);

    double prev = rcdh::clustering_loss(batch, labels, bank);
    for (int step = 0; step < 20; ++step) {
        const auto grad = rcdh::clustering_grad(batch, labels, bank);
        for (std::size_t i = 0; i < batch.u.size(); ++i) batch.u[i] -= 0.05 * grad[i];
        const double now = rcdh::clustering_loss(batch, labels, bank);
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("center update moves by the closed-form contraction") {
    const std::size_t bits = 4;
    rcdh::Rng rng(31);

    rcdh::CenterBank bank;
    bank.classes = 2;
    bank.bits = bits;
    bank.alpha = 0.5;
    bank.centers.resize(2 * bits);
    for (auto& x : bank.centers) x = rng.uniform(-1.5, 1.5);
    const auto before = bank.centers;

    // Three identical members of class 0; class 1 absent.
    std::vector<double> v(bits);
    for (auto& x : v) x = rng.uniform(-1.5, 1.5);
    rcdh::OutputBatch batch;
    batch.bits = bits;
    batch.indices = {0, 1, 2};
    batch.u.resize(3 * bits);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t j = 0; j < bits; ++j) batch.u[r * bits + j] = v[j];
    std::vector<std::uint8_t> labels = {1, 0, 1, 0, 1, 0};

    rcdh::center_update(batch, labels, bank);

    const double n = 3.0;
    const double factor = 1.0 - bank.alpha * n / (n + bank.eps);
    for (std::size_t j = 0; j < bits; ++j) {
        const double want = v[j] + (before[j] - v[j]) * factor;
        CHECK(bank.centers[j] == doctest::Approx(want).epsilon(1e-12));
        // Class with no members is untouched, bit for bit.
        CHECK(bank.centers[bits + j] == before[bits + j]);
    }
}

TEST_CASE("center already at the member mean stays put") {
    const std::size_t bits = 3;
    rcdh::CenterBank bank;
    bank.classes = 1;
    bank.bits = bits;
    bank.centers = {0.25, -0.75, 1.5};
    const auto before = bank.centers;

    rcdh::OutputBatch batch;
    batch.bits = bits;
    batch.indices = {0, 1};
    // Two members placed symmetrically around the center.
    batch.u = {0.25 + 0.4, -0.75, 1.5 - 0.2, 0.25 - 0.4, -0.75, 1.5 + 0.2};
    std::vector<std::uint8_t> labels = {1, 1};

    rcdh::center_update(batch, labels, bank);
    for (std::size_t j = 0; j < bits; ++j)
        CHECK(bank.centers[j] == doctest::Approx(before[j]).epsilon(1e-12));
}

TEST_CASE("full-step center update lands on the member mean") {
    const std::size_t bits = 2;
    rcdh::CenterBank bank;
    bank.classes = 1;
    bank.bits = bits;
    bank.alpha = 1.0;
    bank.centers = {5.0, -5.0};

    rcdh::OutputBatch batch;
    batch.bits = bits;
    batch.indices = {0, 1, 2, 3};
    batch.u = {1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0};
    std::vector<std::uint8_t> labels = {1, 1, 1, 1};

    rcdh::center_update(batch, labels, bank);
    CHECK(std::abs(bank.centers[0] - 1.0) < 1e-6);
    CHECK(std::abs(bank.centers[1] - 2.0) < 1e-6);
}

TEST_CASE("quantization loss and gradient on hand points") {
    rcdh::OutputBatch batch;
    batch.bits = 4;
    batch.indices = {0};

    // Exactly binary output: zero loss, zero gradient.
    batch.u = {1.0, -1.0, 1.0, -1.0};
    CHECK(rcdh::quantization_loss(batch) == 0.0);
    for (double g : rcdh::quantization_grad(batch)) CHECK(g == 0.0);

    // All-zero output: sign(0) = +1, so each coordinate costs 1.
    batch.u = {0.0, 0.0, 0.0, 0.0};
    CHECK(rcdh::quantization_loss(batch) == 4.0);
    for (double g : rcdh::quantization_grad(batch)) CHECK(g == -2.0);

    // Mixed: (1-0.5)^2 + (-1+2)^2 + (1-1)^2 + (-1+0.25)^2.
    batch.u = {0.5, -2.0, 1.0, -0.25};
    CHECK(rcdh::quantization_loss(batch) ==
          doctest::Approx(0.25 + 1.0 + 0.0 + 0.5625).epsilon(1e-15));
    const auto grad = rcdh::quantization_grad(batch);
    CHECK(grad[0] == doctest::Approx(2.0 * (0.5 - 1.0)).epsilon(1e-15));
    CHECK(grad[1] == doctest::Approx(2.0 * (-2.0 + 1.0)).epsilon(1e-15));
    CHECK(grad[2] == 0.0);
    CHECK(grad[3] == doctest::Approx(2.0 * (-0.25 + 1.0)).epsilon(1e-15));
}

TEST_CASE("quantization gradient matches finite differences away from zero") {
    rcdh::Rng rng(37);
    rcdh::OutputBatch batch;
    batch.bits = 6;
    batch.indices = {0, 1, 2};
    batch.u.resize(18);
    // Keep every coordinate away from the sign kink at 0.
    for (auto& x : batch.u) {
        x = rng.uniform(0.05, 1.8);
        if (rng.uniform01() < 0.5) x = -x;
    }

    const auto grad = rcdh::quantization_grad(batch);
    double worst = 0.0;
    for (std::size_t i = 0; i < batch.u.size(); ++i)
        worst = std::max(worst, rel_err(grad[i], fd(batch.u, i, [&] {
                                            return rcdh::quantization_loss(batch);
                                        })));
    CHECK(worst < 1e-6);
}

TEST_CASE("total loss recombines the enabled terms with their weights") {
    rcdh::Rng rng(41);
    const std::size_t rows = 5, bits = 6, classes = 3;
    auto batch = random_batch(rows, bits, rng);
    auto chead = random_head(classes, bits, rng);
    auto bank = random_bank(classes, bits, rng);
    const auto labels = random_label_rows(rows, classes, rng);
    const auto parts = all_pairs_partitions(labels, rows, classes, bits);

    rcdh::LossWeights weights;
    weights.gamma = 12.0;
    weights.lambda_cla = 3.0;
    weights.lambda_clu = 7.0;
    weights.lambda_q = 0.5;

    rcdh::TermToggles all_on;
    const auto full = rcdh::total_loss(batch, labels, parts, chead, bank, weights, all_on);

    CHECK(full.rank == rcdh::rank_loss(batch, parts, weights.gamma));
    CHECK(full.cla == rcdh::classification_loss(batch, labels, chead));
    CHECK(full.clu == rcdh::clustering_loss(batch, labels, bank));
    CHECK(full.quant == rcdh::quantization_loss(batch));
    CHECK(full.total == full.rank + weights.lambda_cla * full.cla +
                            weights.lambda_clu * full.clu + weights.lambda_q * full.quant);
}

TEST_CASE("disabled terms report zero and drop out of the total") {
    rcdh::Rng rng(43);
    const std::size_t rows = 4, bits = 5, classes = 3;
    auto batch = random_batch(rows, bits, rng);
    auto chead = random_head(classes, bits, rng);
    auto bank = random_bank(classes, bits, rng);
    const auto labels = random_label_rows(rows, classes, rng);
    const auto parts = all_pairs_partitions(labels, rows, classes, bits);
    const rcdh::LossWeights weights;

    rcdh::TermToggles none;
    none.rank = none.cla = none.clu = none.quant = false;
    const auto off = rcdh::total_loss(batch, labels, parts, chead, bank, weights, none);
    CHECK(off.rank == 0.0);
    CHECK(off.cla == 0.0);
    CHECK(off.clu == 0.0);
    CHECK(off.quant == 0.0);
    CHECK(off.total == 0.0);

    rcdh::TermToggles quant_only;
    quant_only.rank = quant_only.cla = quant_only.clu = false;
    const auto q = rcdh::total_loss(batch, labels, parts, chead, bank, weights, quant_only);
    CHECK(q.rank == 0.0);
    CHECK(q.quant == rcdh::quantization_loss(batch));
    CHECK(q.total == weights.lambda_q * q.quant);

    // A binary batch makes even the enabled quantization term zero.
    for (auto& x : batch.u) x = x >= 0.0 ? 1.0 : -1.0;
    const auto qb = rcdh::total_loss(batch, labels, parts, chead, bank, weights, quant_only);
    CHECK(qb.total == 0.0);
}

}  // TEST_SUITE
