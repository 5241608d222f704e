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

#include "rcdh/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "rcdh/kernels.hpp"

namespace rcdh {

double softplus(double z) {
    // log(1 + e^z) without overflow: for large z the result is z plus a
    // vanishing correction, for the rest log1p keeps precision near 0.
    if (z > 30.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double relaxed_hamming(const double* ui, const double* uk, std::size_t k) {
    return (static_cast<double>(k) - kernels::dot_f64(ui, uk, k)) / 2.0;
}

namespace {

// Maps dataset indices to batch rows; throws when a partition references a
// sample that is not in the batch.
std::unordered_map<std::size_t, std::size_t> batch_row_of(const OutputBatch& batch) {
    std::unordered_map<std::size_t, std::size_t> m;
    m.reserve(batch.rows());
    for (std::size_t r = 0; r < batch.rows(); ++r) m.emplace(batch.indices[r], r);
    return m;
}

std::size_t lookup_row(const std::unordered_map<std::size_t, std::size_t>& rows,
                       std::size_t idx) {
    const auto it = rows.find(idx);
    if (it == rows.end())
        throw std::out_of_range("rank partition references sample " + std::to_string(idx) +
                                " which is not in the batch");
    return it->second;
}

void check_label_shape(const OutputBatch& batch, const std::vector<std::uint8_t>& labels,
                       std::size_t classes) {
    if (labels.size() != batch.rows() * classes)
        throw std::invalid_argument("batch label matrix has wrong shape");
}

}  // namespace

double rank_loss(const OutputBatch& batch, const std::vector<RankPartition>& partitions,
                 double gamma) {
    const auto rows = batch_row_of(batch);
    const double k = static_cast<double>(batch.bits);
    const double scale = gamma / k;
    double loss = 0.0;
    for (const auto& part : partitions) {
        const std::size_t ai = lookup_row(rows, part.anchor);
        const double* ua = batch.row(ai);
        for (const auto& sub : part.subsets) {
            for (std::size_t m : sub.members) {
                const std::size_t mi = lookup_row(rows, m);
                const double dh = relaxed_hamming(ua, batch.row(mi), batch.bits);
                const double a = scale * (dh - sub.d_lo);
                const double b = scale * (sub.d_hi - dh);
                loss += softplus(-a) + softplus(-b);
            }
        }
    }
    return loss;
}

std::vector<double> rank_loss_grad(const OutputBatch& batch,
                                   const std::vector<RankPartition>& partitions, double gamma) {
    const auto rows = batch_row_of(batch);
    const double k = static_cast<double>(batch.bits);
    const double scale = gamma / k;
    std::vector<double> grad(batch.rows() * batch.bits, 0.0);
    for (const auto& part : partitions) {
        const std::size_t ai = lookup_row(rows, part.anchor);
        const double* ua = batch.row(ai);
        for (const auto& sub : part.subsets) {
            for (std::size_t m : sub.members) {
                const std::size_t mi = lookup_row(rows, m);
                const double* um = batch.row(mi);
                const double dh = relaxed_hamming(ua, um, batch.bits);
                const double a = scale * (dh - sub.d_lo);
                const double b = scale * (sub.d_hi - dh);
                // d/du of softplus(-a)+softplus(-b) through dh; both samples
                // receive the partner's output scaled by sigmoid(b)-sigmoid(a).
                const double coeff = (gamma / (2.0 * k)) * (sigmoid(b) - sigmoid(a));
                kernels::axpy_f64(coeff, um, grad.data() + ai * batch.bits, batch.bits);
                kernels::axpy_f64(coeff, ua, grad.data() + mi * batch.bits, batch.bits);
            }
        }
    }
    return grad;
}

double classification_loss(const OutputBatch& batch, const std::vector<std::uint8_t>& labels,
                           const ClassifierHead& head) {
    if (head.bits != batch.bits) throw std::invalid_argument("classifier bits mismatch");
    check_label_shape(batch, labels, head.classes);
    const std::size_t c = head.classes;
    std::vector<double> z(c);
    double loss = 0.0;
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const double* u = batch.row(r);
        double zmax = -1e300;
        for (std::size_t t = 0; t < c; ++t) {
            z[t] = kernels::dot_f64(head.w.data() + t * head.bits, u, head.bits) + head.v[t];
            zmax = std::max(zmax, z[t]);
        }
        double sum = 0.0;
        for (std::size_t t = 0; t < c; ++t) sum += std::exp(z[t] - zmax);
        const double lse = zmax + std::log(sum);
        double dot = 0.0;
        for (std::size_t t = 0; t < c; ++t)
            if (labels[r * c + t]) dot += z[t];
        loss += lse - dot;
    }
    return loss;
}

ClassifierGrads classification_grads(const OutputBatch& batch,
                                     const std::vector<std::uint8_t>& labels,
                                     const ClassifierHead& head) {
    if (head.bits != batch.bits) throw std::invalid_argument("classifier bits mismatch");
    check_label_shape(batch, labels, head.classes);
    const std::size_t c = head.classes;
    const std::size_t k = head.bits;
    ClassifierGrads g;
    g.du.assign(batch.rows() * k, 0.0);
    g.dw.assign(c * k, 0.0);
    g.dv.assign(c, 0.0);
    std::vector<double> z(c);
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const double* u = batch.row(r);
        double zmax = -1e300;
        for (std::size_t t = 0; t < c; ++t) {
            z[t] = kernels::dot_f64(head.w.data() + t * k, u, k) + head.v[t];
            zmax = std::max(zmax, z[t]);
        }
        double sum = 0.0;
        for (std::size_t t = 0; t < c; ++t) {
            z[t] = std::exp(z[t] - zmax);
            sum += z[t];
        }
        for (std::size_t t = 0; t < c; ++t) {
            const double delta = z[t] / sum - static_cast<double>(labels[r * c + t]);
            kernels::axpy_f64(delta, head.w.data() + t * k, g.du.data() + r * k, k);
            kernels::axpy_f64(delta, u, g.dw.data() + t * k, k);
            g.dv[t] += delta;
        }
    }
    return g;
}

double clustering_loss(const OutputBatch& batch, const std::vector<std::uint8_t>& labels,
                       const CenterBank& bank) {
    if (bank.bits != batch.bits) throw std::invalid_argument("center bank bits mismatch");
    check_label_shape(batch, labels, bank.classes);
    const std::size_t c = bank.classes;
    double loss = 0.0;
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const double* u = batch.row(r);
        double acc = 0.0;
        double count = 0.0;
        for (std::size_t t = 0; t < c; ++t) {
            if (!labels[r * c + t]) continue;
            acc += kernels::l2sqr_f64(u, bank.center(t), bank.bits);
            count += 1.0;
        }
        loss += 0.5 * acc / (count + bank.eps);
    }
    return loss;
}

std::vector<double> clustering_grad(const OutputBatch& batch,
                                    const std::vector<std::uint8_t>& labels,
                                    const CenterBank& bank) {
    if (bank.bits != batch.bits) throw std::invalid_argument("center bank bits mismatch");
    check_label_shape(batch, labels, bank.classes);
    const std::size_t c = bank.classes;
    const std::size_t k = bank.bits;
    std::vector<double> grad(batch.rows() * k, 0.0);
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const double* u = batch.row(r);
        double* g = grad.data() + r * k;
        double count = 0.0;
        for (std::size_t t = 0; t < c; ++t) {
            if (!labels[r * c + t]) continue;
            const double* ct = bank.center(t);
            for (std::size_t j = 0; j < k; ++j) g[j] += u[j] - ct[j];
            count += 1.0;
        }
        const double inv = 1.0 / (count + bank.eps);
        for (std::size_t j = 0; j < k; ++j) g[j] *= inv;
    }
    return grad;
}

void center_update(const OutputBatch& batch, const std::vector<std::uint8_t>& labels,
                   CenterBank& bank) {
    if (bank.bits != batch.bits) throw std::invalid_argument("center bank bits mismatch");
    check_label_shape(batch, labels, bank.classes);
    const std::size_t c = bank.classes;
    const std::size_t k = bank.bits;
    std::vector<double> delta(k);
    for (std::size_t t = 0; t < c; ++t) {
        double count = 0.0;
        std::fill(delta.begin(), delta.end(), 0.0);
        for (std::size_t r = 0; r < batch.rows(); ++r) {
            if (!labels[r * c + t]) continue;
            const double* u = batch.row(r);
            const double* ct = bank.center(t);
            for (std::size_t j = 0; j < k; ++j) delta[j] += ct[j] - u[j];
            count += 1.0;
        }
        const double step = bank.alpha / (count + bank.eps);
        double* ct = bank.center(t);
        for (std::size_t j = 0; j < k; ++j) ct[j] -= step * delta[j];
    }
}

double quantization_loss(const OutputBatch& batch) {
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.u.size(); ++i) {
        const double d = sign_pm(batch.u[i]) - batch.u[i];
        loss += d * d;
    }
    return loss;
}

std::vector<double> quantization_grad(const OutputBatch& batch) {
    std::vector<double> grad(batch.u.size());
    // The binarized target is treated as a constant of the current point.
    for (std::size_t i = 0; i < batch.u.size(); ++i)
        grad[i] = 2.0 * (batch.u[i] - sign_pm(batch.u[i]));
    return grad;
}

LossBreakdown total_loss(const OutputBatch& batch, const std::vector<std::uint8_t>& labels,
                         const std::vector<RankPartition>& partitions, const ClassifierHead& head,
                         const CenterBank& bank, const LossWeights& weights,
                         const TermToggles& toggles) {
    LossBreakdown out;
    if (toggles.rank) out.rank = rank_loss(batch, partitions, weights.gamma);
    if (toggles.cla) out.cla = classification_loss(batch, labels, head);
    if (toggles.clu) out.clu = clustering_loss(batch, labels, bank);
    if (toggles.quant) out.quant = quantization_loss(batch);
    out.total = out.rank + weights.lambda_cla * out.cla + weights.lambda_clu * out.clu +
                weights.lambda_q * out.quant;
    return out;
}

}  // namespace rcdh
