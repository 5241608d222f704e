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

#include "rcdh/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "rcdh/kernels.hpp"
#include "rcdh/objective.hpp"
#include "rcdh/rng.hpp"
#include "rcdh/trainer.hpp"

namespace rcdh {

double GradCheckReport::worst() const {
    double w = 0.0;
    for (const auto& r : rows) w = std::max(w, r.max_rel_err);
    return w;
}

bool GradCheckReport::all_below(double tol) const { return worst() < tol; }

namespace {

constexpr double kFdStep = 1e-6;

// Relative error with a unit floor, so near-zero gradient pairs compare
// absolutely instead of dividing by noise.
double rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) /
           std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

// Central finite differences over every entry of param against the matching
// analytic vector; returns the worst relative error.
double check_vector(std::vector<double>& param, const std::vector<double>& analytic,
                    const std::function<double()>& eval) {
    if (param.size() != analytic.size())
        throw std::logic_error("gradcheck: analytic gradient has wrong size");
    double worst = 0.0;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double keep = param[i];
        param[i] = keep + kFdStep;
        const double fp = eval();
        param[i] = keep - kFdStep;
        const double fm = eval();
        param[i] = keep;
        const double numeric = (fp - fm) / (2.0 * kFdStep);
        worst = std::max(worst, rel_err(analytic[i], numeric));
    }
    return worst;
}

// Random multi-hot labels with at least one bit per row.
std::vector<std::uint8_t> random_labels(Rng& rng, std::size_t rows, std::size_t classes) {
    std::vector<std::uint8_t> labels(rows * classes, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        bool any = false;
        for (std::size_t t = 0; t < classes; ++t) {
            const bool on = rng.uniform01() < 0.4;
            labels[r * classes + t] = on ? 1 : 0;
            any = any || on;
        }
        if (!any) labels[r * classes + rng.index(classes)] = 1;
    }
    return labels;
}

}  // namespace

GradCheckReport run_gradcheck(const GradCheckDims& dims, std::uint64_t seed) {
    if (dims.bits < 1 || dims.batch < 2 || dims.classes < 2 || dims.dim < 1)
        throw std::invalid_argument("gradcheck: need bits >= 1, batch >= 2, classes >= 2, dim >= 1");

    GradCheckReport report;
    report.seed = seed;

    Rng rng(seed);
    const std::size_t b = dims.batch;
    const std::size_t k = dims.bits;
    const std::size_t c = dims.classes;

    // A small dataset supplies both the labels behind the rank partitions
    // and the features the head checks run on.
    MultiLabelDataset ds;
    ds.n = b;
    ds.d = dims.dim;
    ds.c = c;
    ds.features.resize(b * dims.dim);
    for (float& f : ds.features) f = static_cast<float>(rng.gaussian());
    ds.labels = random_labels(rng, b, c);

    // Outputs drawn away from zero so the quantization term stays smooth
    // under the finite-difference step.
    OutputBatch batch;
    batch.bits = k;
    batch.indices.resize(b);
    for (std::size_t r = 0; r < b; ++r) batch.indices[r] = r;
    batch.u.resize(b * k);
    for (double& x : batch.u) {
        const double mag = rng.uniform(0.05, 2.0);
        x = rng.uniform01() < 0.5 ? -mag : mag;
    }

    ClassifierHead head;
    head.classes = c;
    head.bits = k;
    head.w.resize(c * k);
    for (double& x : head.w) x = rng.uniform(-0.7, 0.7);
    head.v.resize(c);
    for (double& x : head.v) x = rng.uniform(-0.2, 0.2);

    CenterBank bank;
    bank.classes = c;
    bank.bits = k;
    bank.centers.resize(c * k);
    for (double& x : bank.centers) x = rng.uniform(-1.0, 1.0);

    const LossWeights weights;

    std::vector<RankPartition> partitions;
    for (std::size_t anchor = 0; anchor < b; ++anchor) {
        std::vector<std::size_t> members;
        for (std::size_t j = 0; j < b; ++j)
            if (j != anchor) members.push_back(j);
        partitions.push_back(
            build_partition(ds, anchor, members, k, IntervalStrategy::kCrcdh));
    }

    {
        const auto analytic = rank_loss_grad(batch, partitions, weights.gamma);
        const double err = check_vector(
            batch.u, analytic, [&] { return rank_loss(batch, partitions, weights.gamma); });
        report.rows.push_back({"rank/du", err});
    }
    {
        const auto g = classification_grads(batch, ds.labels, head);
        auto eval = [&] { return classification_loss(batch, ds.labels, head); };
        report.rows.push_back({"cla/du", check_vector(batch.u, g.du, eval)});
        report.rows.push_back({"cla/dW", check_vector(head.w, g.dw, eval)});
        report.rows.push_back({"cla/dv", check_vector(head.v, g.dv, eval)});
    }
    {
        const auto analytic = clustering_grad(batch, ds.labels, bank);
        const double err = check_vector(batch.u, analytic,
                                        [&] { return clustering_loss(batch, ds.labels, bank); });
        report.rows.push_back({"clu/du", err});
    }
    {
        const auto analytic = quantization_grad(batch);
        const double err =
            check_vector(batch.u, analytic, [&] { return quantization_loss(batch); });
        report.rows.push_back({"quant/du", err});
    }

    // Head parameters, checked through the full weighted objective. The
    // quantization term is only piecewise smooth, so redraw the head until
    // every output is clear of zero by more than the step can move it.
    TrainConfig cfg;
    cfg.bits = k;
    cfg.hidden = dims.hidden;
    ModelParams params;
    const TermToggles all_on;
    OutputBatch hb;
    std::vector<double> hidden_act;
    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt >= 100)
            throw std::runtime_error("gradcheck: could not find outputs clear of zero");
        cfg.seed = mix_seed(seed, 1000 + attempt);
        params = init_params(ds.d, c, cfg);
        hb = forward_batch(params.head, ds, batch.indices,
                           params.head.hidden > 0 ? &hidden_act : nullptr);
        double min_abs = 1e300;
        for (double x : hb.u) min_abs = std::min(min_abs, std::abs(x));
        if (min_abs > 1e-3) break;
    }

    std::vector<double> du(b * k, 0.0);
    {
        const auto g = rank_loss_grad(hb, partitions, weights.gamma);
        kernels::axpy_f64(1.0, g.data(), du.data(), du.size());
        const auto cg = classification_grads(hb, ds.labels, params.classifier);
        kernels::axpy_f64(weights.lambda_cla, cg.du.data(), du.data(), du.size());
        const auto ug = clustering_grad(hb, ds.labels, params.bank);
        kernels::axpy_f64(weights.lambda_clu, ug.data(), du.data(), du.size());
        const auto qg = quantization_grad(hb);
        kernels::axpy_f64(weights.lambda_q, qg.data(), du.data(), du.size());
    }
    const HeadGrads hg = backprop_head(params.head, ds, hb, du, hidden_act);

    auto eval_head = [&] {
        const OutputBatch fb = forward_batch(params.head, ds, batch.indices, nullptr);
        return total_loss(fb, ds.labels, partitions, params.classifier, params.bank, weights,
                          all_on)
            .total;
    };
    report.rows.push_back({"head/H2", check_vector(params.head.h2, hg.h2, eval_head)});
    report.rows.push_back({"head/b2", check_vector(params.head.b2, hg.b2, eval_head)});
    if (dims.hidden > 0) {
        report.rows.push_back({"head/H1", check_vector(params.head.h1, hg.h1, eval_head)});
        report.rows.push_back({"head/b1", check_vector(params.head.b1, hg.b1, eval_head)});
    }
    return report;
}

}  // namespace rcdh
