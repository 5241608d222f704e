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

#include "rcdh/dataset.hpp"
#include "rcdh/objective.hpp"
#include "rcdh/rankstruct.hpp"

namespace rcdh {

// The learnable hashing function: either a single linear layer (hidden = 0)
// or one tanh hidden layer followed by a linear output layer.
struct HashingHead {
    std::size_t in_dim = 0;
    std::size_t hidden = 0;
    std::size_t bits = 0;
    std::vector<double> h1;  // hidden * in_dim
    std::vector<double> b1;  // hidden
    std::vector<double> h2;  // bits * (hidden > 0 ? hidden : in_dim)
    std::vector<double> b2;  // bits
};

struct TrainConfig {
    std::size_t bits = 16;
    double lr = 1e-4;
    std::size_t batch = 48;
    std::size_t epochs = 1;
    LossWeights weights;
    double alpha = 0.5;
    double eps = 1e-8;
    std::size_t n_r = 10000;
    IntervalStrategy strategy = IntervalStrategy::kCrcdh;
    TermToggles toggles;
    std::uint64_t seed = 0;
    std::size_t hidden = 0;  // 0 = linear head
};

struct ModelParams {
    HashingHead head;
    ClassifierHead classifier;
    CenterBank bank;
};

// Per-batch means of the loss terms over one epoch.
struct EpochStats {
    LossBreakdown mean;
    std::size_t batches = 0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> epochs;
};

// Gradients of the total loss with respect to every head parameter.
struct HeadGrads {
    std::vector<double> h1;
    std::vector<double> b1;
    std::vector<double> h2;
    std::vector<double> b2;
};

// Weights uniform in (-a, a) with a = sqrt(6/(fan_in+fan_out)), biases zero,
// centers uniform in (-0.1, 0.1); fully determined by cfg.seed.
ModelParams init_params(std::size_t d, std::size_t c, const TrainConfig& cfg);

// u = H2 x + b2, or H2 tanh(H1 x + b1) + b2 with a hidden layer. When
// hidden_act is non-null it receives the tanh activations (size head.hidden)
// for reuse in backprop.
void forward(const HashingHead& head, const float* x, double* u, double* hidden_act = nullptr);

// Forward the given dataset rows into an OutputBatch (plus the hidden
// activations, rows * hidden, when the head has a hidden layer).
OutputBatch forward_batch(const HashingHead& head, const MultiLabelDataset& ds,
                          const std::vector<std::size_t>& indices,
                          std::vector<double>* hidden_act = nullptr);

// Accumulates dL/d(head params) from dL/du for the rows of the batch.
// hidden_act must be the activations captured by forward_batch when the
// head has a hidden layer.
HeadGrads backprop_head(const HashingHead& head, const MultiLabelDataset& ds,
                        const OutputBatch& batch, const std::vector<double>& du,
                        const std::vector<double>& hidden_act);

// One pass over the dataset in shuffled order: per batch, forward, evaluate
// the enabled loss terms, SGD-step the head and classifier, then move the
// centers. The shuffle is a pure function of (cfg.seed, epoch).
EpochStats train_epoch(const MultiLabelDataset& ds, ModelParams& params, const TrainConfig& cfg,
                       std::size_t epoch,
                       const std::vector<std::vector<std::size_t>>& global_candidates);

// Full training driver: init, precompute candidate lists, run all epochs.
TrainResult train(const MultiLabelDataset& ds, const TrainConfig& cfg);

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace rcdh
