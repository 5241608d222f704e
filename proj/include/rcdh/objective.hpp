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

#include "rcdh/rankstruct.hpp"

namespace rcdh {

// Relaxed network outputs for one minibatch: row r holds the K-dim output
// for dataset sample indices[r].
struct OutputBatch {
    std::size_t bits = 0;
    std::vector<std::size_t> indices;
    std::vector<double> u;  // rows * bits, row-major

    std::size_t rows() const { return indices.size(); }
    const double* row(std::size_t r) const { return u.data() + r * bits; }
    double* row(std::size_t r) { return u.data() + r * bits; }
};

// One center vector per class, pulled toward its members' outputs.
struct CenterBank {
    std::size_t classes = 0;
    std::size_t bits = 0;
    std::vector<double> centers;  // classes * bits, row-major
    double alpha = 0.5;
    double eps = 1e-8;

    const double* center(std::size_t t) const { return centers.data() + t * bits; }
    double* center(std::size_t t) { return centers.data() + t * bits; }
};

// Linear classifier on top of the code layer: logits z = W u + v.
struct ClassifierHead {
    std::size_t classes = 0;
    std::size_t bits = 0;
    std::vector<double> w;  // classes * bits, row-major
    std::vector<double> v;  // classes
};

struct LossWeights {
    double gamma = 16.0;
    double lambda_cla = 20.0;
    double lambda_clu = 20.0;
    double lambda_q = 50.0;
};

// Ablation switches. The rank term has no lambda, so it gets a toggle; the
// others get toggles too so a disabled term costs nothing to evaluate.
struct TermToggles {
    bool rank = true;
    bool cla = true;
    bool clu = true;
    bool quant = true;
};

// Unweighted per-term values plus the weighted total.
struct LossBreakdown {
    double rank = 0.0;
    double cla = 0.0;
    double clu = 0.0;
    double quant = 0.0;
    double total = 0.0;
};

struct ClassifierGrads {
    std::vector<double> du;  // rows * bits
    std::vector<double> dw;  // classes * bits
    std::vector<double> dv;  // classes
};

double softplus(double z);
double sigmoid(double z);
inline double sign_pm(double x) { return x >= 0.0 ? 1.0 : -1.0; }

double relaxed_hamming(const double* ui, const double* uk, std::size_t k);

// Rank-consistency term: for every (anchor, member) pair the relaxed
// hamming distance is pushed inside the member's interval through a pair of
// softplus hinges scaled by gamma/K.
double rank_loss(const OutputBatch& batch, const std::vector<RankPartition>& partitions,
                 double gamma);

// d(rank_loss)/du, rows * bits. Each pair contributes
// (gamma/(2K)) * u_partner * (sigmoid(B) - sigmoid(A)) to both endpoints,
// with A, B the scaled margins to the interval bounds.
std::vector<double> rank_loss_grad(const OutputBatch& batch,
                                   const std::vector<RankPartition>& partitions, double gamma);

// labels: rows * classes, row-major binary, aligned with batch rows.
double classification_loss(const OutputBatch& batch, const std::vector<std::uint8_t>& labels,
                           const ClassifierHead& head);

ClassifierGrads classification_grads(const OutputBatch& batch,
                                     const std::vector<std::uint8_t>& labels,
                                     const ClassifierHead& head);

double clustering_loss(const OutputBatch& batch, const std::vector<std::uint8_t>& labels,
                       const CenterBank& bank);

std::vector<double> clustering_grad(const OutputBatch& batch,
                                    const std::vector<std::uint8_t>& labels,
                                    const CenterBank& bank);

// Moves each center a step alpha toward the mean of its batch members.
// Classes with no member in the batch stay put.
void center_update(const OutputBatch& batch, const std::vector<std::uint8_t>& labels,
                   CenterBank& bank);

double quantization_loss(const OutputBatch& batch);

std::vector<double> quantization_grad(const OutputBatch& batch);

// Evaluates the enabled terms and combines them:
// total = J_rank + lambda_cla*J_cla + lambda_clu*J_clu + lambda_q*J_q.
// Disabled terms are skipped and reported as zero.
LossBreakdown total_loss(const OutputBatch& batch, const std::vector<std::uint8_t>& labels,
                         const std::vector<RankPartition>& partitions, const ClassifierHead& head,
                         const CenterBank& bank, const LossWeights& weights,
                         const TermToggles& toggles);

}  // namespace rcdh
