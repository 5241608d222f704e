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

#include "rcdh/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "rcdh/io.hpp"
#include "rcdh/kernels.hpp"
#include "rcdh/rng.hpp"

namespace rcdh {

namespace {
constexpr char kMagic[4] = {'R', 'C', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void validate_config(const TrainConfig& cfg) {
    if (cfg.lr <= 0.0) throw std::invalid_argument("train config: lr must be > 0");
    if (cfg.batch < 2) throw std::invalid_argument("train config: batch must be >= 2");
    if (cfg.epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
    if (cfg.bits < 1) throw std::invalid_argument("train config: bits must be >= 1");
    if (cfg.n_r < 1) throw std::invalid_argument("train config: n_r must be >= 1");
    if (cfg.weights.gamma <= 0.0) throw std::invalid_argument("train config: gamma must be > 0");
    if (cfg.alpha <= 0.0 || cfg.alpha > 1.0)
        throw std::invalid_argument("train config: alpha must be in (0, 1]");
}
}  // namespace

ModelParams init_params(std::size_t d, std::size_t c, const TrainConfig& cfg) {
    if (d < 1 || c < 1) throw std::invalid_argument("init_params: d and c must be >= 1");
    Rng rng(cfg.seed);
    ModelParams p;

    p.head.in_dim = d;
    p.head.hidden = cfg.hidden;
    p.head.bits = cfg.bits;
    if (cfg.hidden > 0) {
        const double a1 = std::sqrt(6.0 / static_cast<double>(d + cfg.hidden));
        p.head.h1.resize(cfg.hidden * d);
        for (double& w : p.head.h1) w = rng.uniform(-a1, a1);
        p.head.b1.assign(cfg.hidden, 0.0);
        const double a2 = std::sqrt(6.0 / static_cast<double>(cfg.hidden + cfg.bits));
        p.head.h2.resize(cfg.bits * cfg.hidden);
        for (double& w : p.head.h2) w = rng.uniform(-a2, a2);
    } else {
        const double a2 = std::sqrt(6.0 / static_cast<double>(d + cfg.bits));
        p.head.h2.resize(cfg.bits * d);
        for (double& w : p.head.h2) w = rng.uniform(-a2, a2);
    }
    p.head.b2.assign(cfg.bits, 0.0);

    p.classifier.classes = c;
    p.classifier.bits = cfg.bits;
    const double aw = std::sqrt(6.0 / static_cast<double>(cfg.bits + c));
    p.classifier.w.resize(c * cfg.bits);
    for (double& w : p.classifier.w) w = rng.uniform(-aw, aw);
    p.classifier.v.assign(c, 0.0);

    p.bank.classes = c;
    p.bank.bits = cfg.bits;
    p.bank.alpha = cfg.alpha;
    p.bank.eps = cfg.eps;
    p.bank.centers.resize(c * cfg.bits);
    for (double& x : p.bank.centers) x = rng.uniform(-0.1, 0.1);
    return p;
}

void forward(const HashingHead& head, const float* x, double* u, double* hidden_act) {
    const std::size_t d = head.in_dim;
    if (head.hidden == 0) {
        std::vector<double> xd(d);
        for (std::size_t j = 0; j < d; ++j) xd[j] = static_cast<double>(x[j]);
        for (std::size_t o = 0; o < head.bits; ++o)
            u[o] = kernels::dot_f64(head.h2.data() + o * d, xd.data(), d) + head.b2[o];
        return;
    }
    std::vector<double> xd(d);
    for (std::size_t j = 0; j < d; ++j) xd[j] = static_cast<double>(x[j]);
    std::vector<double> h(head.hidden);
    for (std::size_t o = 0; o < head.hidden; ++o)
        h[o] = std::tanh(kernels::dot_f64(head.h1.data() + o * d, xd.data(), d) + head.b1[o]);
    for (std::size_t o = 0; o < head.bits; ++o)
        u[o] = kernels::dot_f64(head.h2.data() + o * head.hidden, h.data(), head.hidden) +
               head.b2[o];
    if (hidden_act != nullptr) std::copy(h.begin(), h.end(), hidden_act);
}

OutputBatch forward_batch(const HashingHead& head, const MultiLabelDataset& ds,
                          const std::vector<std::size_t>& indices,
                          std::vector<double>* hidden_act) {
    if (ds.d != head.in_dim) throw std::invalid_argument("forward: feature dim mismatch");
    OutputBatch batch;
    batch.bits = head.bits;
    batch.indices = indices;
    batch.u.resize(indices.size() * head.bits);
    if (hidden_act != nullptr) hidden_act->assign(indices.size() * head.hidden, 0.0);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        double* hrow = (hidden_act != nullptr && head.hidden > 0)
                           ? hidden_act->data() + r * head.hidden
                           : nullptr;
        forward(head, ds.feature_row(indices[r]), batch.row(r), hrow);
    }
    return batch;
}

HeadGrads backprop_head(const HashingHead& head, const MultiLabelDataset& ds,
                        const OutputBatch& batch, const std::vector<double>& du,
                        const std::vector<double>& hidden_act) {
    if (du.size() != batch.rows() * head.bits)
        throw std::invalid_argument("backprop: du has wrong shape");
    const std::size_t d = head.in_dim;
    HeadGrads g;
    g.h2.assign(head.h2.size(), 0.0);
    g.b2.assign(head.b2.size(), 0.0);
    if (head.hidden > 0) {
        g.h1.assign(head.h1.size(), 0.0);
        g.b1.assign(head.b1.size(), 0.0);
        if (hidden_act.size() != batch.rows() * head.hidden)
            throw std::invalid_argument("backprop: hidden activations missing");
    }

    std::vector<double> xd(d);
    std::vector<double> dh(head.hidden);
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const float* x = ds.feature_row(batch.indices[r]);
        for (std::size_t j = 0; j < d; ++j) xd[j] = static_cast<double>(x[j]);
        const double* dur = du.data() + r * head.bits;

        if (head.hidden == 0) {
            for (std::size_t o = 0; o < head.bits; ++o) {
                kernels::axpy_f64(dur[o], xd.data(), g.h2.data() + o * d, d);
                g.b2[o] += dur[o];
            }
            continue;
        }

        const double* h = hidden_act.data() + r * head.hidden;
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t o = 0; o < head.bits; ++o) {
            kernels::axpy_f64(dur[o], h, g.h2.data() + o * head.hidden, head.hidden);
            g.b2[o] += dur[o];
            kernels::axpy_f64(dur[o], head.h2.data() + o * head.hidden, dh.data(), head.hidden);
        }
        for (std::size_t o = 0; o < head.hidden; ++o) {
            const double da = dh[o] * (1.0 - h[o] * h[o]);  // tanh'
            kernels::axpy_f64(da, xd.data(), g.h1.data() + o * d, d);
            g.b1[o] += da;
        }
    }
    return g;
}

EpochStats train_epoch(const MultiLabelDataset& ds, ModelParams& params, const TrainConfig& cfg,
                       std::size_t epoch,
                       const std::vector<std::vector<std::size_t>>& global_candidates) {
    if (cfg.batch > ds.n) throw std::invalid_argument("train: batch larger than dataset");

    std::vector<std::size_t> order(ds.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(mix_seed(cfg.seed, epoch));
    for (std::size_t i = ds.n; i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.index(i)]);

    EpochStats stats;
    const std::size_t k = cfg.bits;
    std::vector<double> hidden_act;
    std::vector<std::size_t> batch_idx;
    std::vector<std::uint8_t> batch_labels;
    std::vector<std::size_t> members;

    for (std::size_t start = 0; start < ds.n; start += cfg.batch) {
        const std::size_t bsz = std::min(cfg.batch, ds.n - start);
        batch_idx.assign(order.begin() + start, order.begin() + start + bsz);

        OutputBatch batch = forward_batch(params.head, ds, batch_idx,
                                          params.head.hidden > 0 ? &hidden_act : nullptr);

        batch_labels.resize(bsz * ds.c);
        for (std::size_t r = 0; r < bsz; ++r)
            std::copy(ds.label_row(batch_idx[r]), ds.label_row(batch_idx[r]) + ds.c,
                      batch_labels.begin() + r * ds.c);

        // Partitions over batch-visible candidates, anchors in ascending
        // index order so the reduction order is fixed.
        std::vector<RankPartition> partitions;
        if (cfg.toggles.rank) {
            std::vector<std::size_t> anchors = batch_idx;
            std::sort(anchors.begin(), anchors.end());
            for (std::size_t anchor : anchors) {
                const auto& cand = global_candidates[anchor];
                members.clear();
                for (std::size_t j : anchors) {
                    if (j == anchor) continue;
                    if (std::binary_search(cand.begin(), cand.end(), j)) members.push_back(j);
                }
                if (members.empty()) continue;
                partitions.push_back(build_partition(ds, anchor, members, k, cfg.strategy));
            }
        }

        const LossBreakdown bd = total_loss(batch, batch_labels, partitions, params.classifier,
                                            params.bank, cfg.weights, cfg.toggles);
        stats.mean.rank += bd.rank;
        stats.mean.cla += bd.cla;
        stats.mean.clu += bd.clu;
        stats.mean.quant += bd.quant;
        stats.mean.total += bd.total;
        stats.batches += 1;

        // Combined gradient with respect to the batch outputs.
        std::vector<double> du(bsz * k, 0.0);
        if (cfg.toggles.rank && !partitions.empty()) {
            const auto g = rank_loss_grad(batch, partitions, cfg.weights.gamma);
            kernels::axpy_f64(1.0, g.data(), du.data(), du.size());
        }
        ClassifierGrads cg;
        if (cfg.toggles.cla) {
            cg = classification_grads(batch, batch_labels, params.classifier);
            kernels::axpy_f64(cfg.weights.lambda_cla, cg.du.data(), du.data(), du.size());
        }
        if (cfg.toggles.clu) {
            const auto g = clustering_grad(batch, batch_labels, params.bank);
            kernels::axpy_f64(cfg.weights.lambda_clu, g.data(), du.data(), du.size());
        }
        if (cfg.toggles.quant) {
            const auto g = quantization_grad(batch);
            kernels::axpy_f64(cfg.weights.lambda_q, g.data(), du.data(), du.size());
        }

        const HeadGrads hg = backprop_head(params.head, ds, batch, du, hidden_act);
        kernels::axpy_f64(-cfg.lr, hg.h2.data(), params.head.h2.data(), params.head.h2.size());
        kernels::axpy_f64(-cfg.lr, hg.b2.data(), params.head.b2.data(), params.head.b2.size());
        if (params.head.hidden > 0) {
            kernels::axpy_f64(-cfg.lr, hg.h1.data(), params.head.h1.data(), params.head.h1.size());
            kernels::axpy_f64(-cfg.lr, hg.b1.data(), params.head.b1.data(), params.head.b1.size());
        }
        if (cfg.toggles.cla) {
            kernels::axpy_f64(-cfg.lr * cfg.weights.lambda_cla, cg.dw.data(),
                              params.classifier.w.data(), params.classifier.w.size());
            kernels::axpy_f64(-cfg.lr * cfg.weights.lambda_cla, cg.dv.data(),
                              params.classifier.v.data(), params.classifier.v.size());
        }

        // Centers move after the parameter step, using this batch's outputs.
        if (cfg.toggles.clu) center_update(batch, batch_labels, params.bank);
    }

    if (stats.batches > 0) {
        const double inv = 1.0 / static_cast<double>(stats.batches);
        stats.mean.rank *= inv;
        stats.mean.cla *= inv;
        stats.mean.clu *= inv;
        stats.mean.quant *= inv;
        stats.mean.total *= inv;
    }
    return stats;
}

TrainResult train(const MultiLabelDataset& ds, const TrainConfig& cfg) {
    validate_config(cfg);
    validate_dataset(ds);
    if (cfg.batch > ds.n) throw std::invalid_argument("train: batch larger than dataset");

    TrainResult result;
    result.params = init_params(ds.d, ds.c, cfg);

    // Candidate lists depend only on labels, so they are computed once.
    // Sorted ascending for the per-batch membership test.
    std::vector<std::vector<std::size_t>> global_candidates;
    if (cfg.toggles.rank) {
        global_candidates.resize(ds.n);
        for (std::size_t i = 0; i < ds.n; ++i) {
            global_candidates[i] = select_candidates(ds, i, cfg.n_r);
            std::sort(global_candidates[i].begin(), global_candidates[i].end());
        }
    }

    result.epochs.reserve(cfg.epochs);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch)
        result.epochs.push_back(train_epoch(ds, result.params, cfg, epoch, global_candidates));
    return result;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    io::write_magic(out, kMagic);
    io::write_u32(out, kVersion);
    io::write_u32(out, static_cast<std::uint32_t>(params.head.in_dim));
    io::write_u32(out, static_cast<std::uint32_t>(params.classifier.classes));
    io::write_u32(out, static_cast<std::uint32_t>(params.head.bits));
    io::write_u32(out, static_cast<std::uint32_t>(params.head.hidden));
    if (params.head.hidden > 0) {
        for (double x : params.head.h1) io::write_f64(out, x);
        for (double x : params.head.b1) io::write_f64(out, x);
    }
    for (double x : params.head.h2) io::write_f64(out, x);
    for (double x : params.head.b2) io::write_f64(out, x);
    for (double x : params.classifier.w) io::write_f64(out, x);
    for (double x : params.classifier.v) io::write_f64(out, x);
    for (double x : params.bank.centers) io::write_f64(out, x);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    io::expect_magic(in, kMagic, "checkpoint");
    const std::uint32_t version = io::read_u32(in, "checkpoint version");
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

    const std::size_t d = io::read_u32(in, "checkpoint input dim");
    const std::size_t c = io::read_u32(in, "checkpoint class count");
    const std::size_t k = io::read_u32(in, "checkpoint bits");
    const std::size_t hidden = io::read_u32(in, "checkpoint hidden size");
    if (d == 0 || c == 0 || k == 0)
        throw std::runtime_error("checkpoint: zero dimension in header");

    ModelParams p;
    p.head.in_dim = d;
    p.head.hidden = hidden;
    p.head.bits = k;
    if (hidden > 0) {
        p.head.h1.resize(hidden * d);
        for (double& x : p.head.h1) x = io::read_f64(in, "head hidden weights");
        p.head.b1.resize(hidden);
        for (double& x : p.head.b1) x = io::read_f64(in, "head hidden bias");
    }
    const std::size_t h2_cols = hidden > 0 ? hidden : d;
    p.head.h2.resize(k * h2_cols);
    for (double& x : p.head.h2) x = io::read_f64(in, "head output weights");
    p.head.b2.resize(k);
    for (double& x : p.head.b2) x = io::read_f64(in, "head output bias");

    p.classifier.classes = c;
    p.classifier.bits = k;
    p.classifier.w.resize(c * k);
    for (double& x : p.classifier.w) x = io::read_f64(in, "classifier weights");
    p.classifier.v.resize(c);
    for (double& x : p.classifier.v) x = io::read_f64(in, "classifier bias");

    p.bank.classes = c;
    p.bank.bits = k;
    p.bank.centers.resize(c * k);
    for (double& x : p.bank.centers) x = io::read_f64(in, "centers");
    return p;
}

}  // namespace rcdh
