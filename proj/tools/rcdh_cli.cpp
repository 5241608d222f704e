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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rcdh/dataset.hpp"
#include "rcdh/gradcheck.hpp"
#include "rcdh/metrics.hpp"
#include "rcdh/retrieval.hpp"
#include "rcdh/trainer.hpp"

namespace {

constexpr double kGradTol = 1e-5;

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Everything a training run needs: hyperparameters plus file paths.
struct RunConfig {
    std::string dataset;
    std::string checkpoint;
    std::string codes;
    std::string report;
    std::string loss_log;
    std::size_t p = 100;
    rcdh::TrainConfig train;
    bool epochs_given = false;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad number for '" + key + "': " + value);
    }
    if (used != value.size())
        throw std::runtime_error("config: bad number for '" + key + "': " + value);
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(value, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad integer for '" + key + "': " + value);
    }
    if (used != value.size() || value.find('-') != std::string::npos)
        throw std::runtime_error("config: bad integer for '" + key + "': " + value);
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::runtime_error("config: bad boolean for '" + key + "': " + value);
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw std::runtime_error("config: duplicate key '" + key + "'");
    }

    RunConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "dataset") {
            cfg.dataset = value;
        } else if (key == "checkpoint") {
            cfg.checkpoint = value;
        } else if (key == "codes") {
            cfg.codes = value;
        } else if (key == "report") {
            cfg.report = value;
        } else if (key == "loss_log") {
            cfg.loss_log = value;
        } else if (key == "p") {
            cfg.p = static_cast<std::size_t>(parse_uint(key, value));
        } else if (key == "bits") {
            cfg.train.bits = static_cast<std::size_t>(parse_uint(key, value));
        } else if (key == "epochs") {
            cfg.train.epochs = static_cast<std::size_t>(parse_uint(key, value));
            cfg.epochs_given = true;
        } else if (key == "batch") {
            cfg.train.batch = static_cast<std::size_t>(parse_uint(key, value));
        } else if (key == "lr") {
            cfg.train.lr = parse_real(key, value);
        } else if (key == "gamma") {
            cfg.train.weights.gamma = parse_real(key, value);
        } else if (key == "lambda_cla") {
            cfg.train.weights.lambda_cla = parse_real(key, value);
        } else if (key == "lambda_clu") {
            cfg.train.weights.lambda_clu = parse_real(key, value);
        } else if (key == "lambda_q") {
            cfg.train.weights.lambda_q = parse_real(key, value);
        } else if (key == "alpha") {
            cfg.train.alpha = parse_real(key, value);
        } else if (key == "n_r") {
            cfg.train.n_r = static_cast<std::size_t>(parse_uint(key, value));
        } else if (key == "strategy") {
            if (value == "crcdh")
                cfg.train.strategy = rcdh::IntervalStrategy::kCrcdh;
            else if (value == "legacy")
                cfg.train.strategy = rcdh::IntervalStrategy::kLegacyRcdh;
            else
                throw std::runtime_error("config: strategy must be 'crcdh' or 'legacy', got '" +
                                         value + "'");
        } else if (key == "rank") {
            cfg.train.toggles.rank = parse_bool(key, value);
        } else if (key == "cla") {
            cfg.train.toggles.cla = parse_bool(key, value);
        } else if (key == "clu") {
            cfg.train.toggles.clu = parse_bool(key, value);
        } else if (key == "quant") {
            cfg.train.toggles.quant = parse_bool(key, value);
        } else if (key == "seed") {
            cfg.train.seed = parse_uint(key, value);
        } else if (key == "hidden") {
            cfg.train.hidden = static_cast<std::size_t>(parse_uint(key, value));
        } else {
            throw std::runtime_error("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

// The fully-resolved configuration, defaults filled in, for provenance.
std::string resolved_config_text(const RunConfig& cfg) {
    std::ostringstream os;
    os << "dataset=" << cfg.dataset << "\n";
    os << "checkpoint=" << cfg.checkpoint << "\n";
    os << "codes=" << cfg.codes << "\n";
    os << "report=" << cfg.report << "\n";
    os << "loss_log=" << cfg.loss_log << "\n";
    os << "p=" << cfg.p << "\n";
    os << "bits=" << cfg.train.bits << "\n";
    os << "epochs=" << cfg.train.epochs << "\n";
    os << "batch=" << cfg.train.batch << "\n";
    os << "lr=" << fmt_g(cfg.train.lr) << "\n";
    os << "gamma=" << fmt_g(cfg.train.weights.gamma) << "\n";
    os << "lambda_cla=" << fmt_g(cfg.train.weights.lambda_cla) << "\n";
    os << "lambda_clu=" << fmt_g(cfg.train.weights.lambda_clu) << "\n";
    os << "lambda_q=" << fmt_g(cfg.train.weights.lambda_q) << "\n";
    os << "alpha=" << fmt_g(cfg.train.alpha) << "\n";
    os << "n_r=" << cfg.train.n_r << "\n";
    os << "strategy="
       << (cfg.train.strategy == rcdh::IntervalStrategy::kCrcdh ? "crcdh" : "legacy") << "\n";
    os << "rank=" << (cfg.train.toggles.rank ? "true" : "false") << "\n";
    os << "cla=" << (cfg.train.toggles.cla ? "true" : "false") << "\n";
    os << "clu=" << (cfg.train.toggles.clu ? "true" : "false") << "\n";
    os << "quant=" << (cfg.train.toggles.quant ? "true" : "false") << "\n";
    os << "seed=" << cfg.train.seed << "\n";
    os << "hidden=" << cfg.train.hidden << "\n";
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::vector<std::uint8_t>> parse_combos(const std::string& s, std::size_t classes) {
    std::vector<std::vector<std::uint8_t>> combos;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        if (tok.size() != classes)
            throw std::runtime_error("combo '" + tok + "' does not have one digit per class");
        std::vector<std::uint8_t> combo(classes);
        for (std::size_t i = 0; i < classes; ++i) {
            if (tok[i] != '0' && tok[i] != '1')
                throw std::runtime_error("combo '" + tok + "' must contain only 0 and 1");
            combo[i] = tok[i] == '1' ? 1 : 0;
        }
        combos.push_back(std::move(combo));
    }
    if (combos.empty()) throw std::runtime_error("no label combos given");
    return combos;
}

int cmd_gen_synth(std::size_t classes, std::size_t per_class, std::size_t dim,
                  const std::string& combos_str, double noise_sigma, std::uint64_t seed,
                  const std::string& out_path) {
    rcdh::SyntheticSpec spec;
    spec.c = classes;
    spec.per_class = per_class;
    spec.d = dim;
    spec.label_combos = parse_combos(combos_str, classes);
    spec.noise_sigma = noise_sigma;
    spec.seed = seed;
    const rcdh::MultiLabelDataset ds = rcdh::generate_synthetic(spec);
    rcdh::save_dataset(ds, out_path);
    std::cout << "N=" << ds.n << " D=" << ds.d << " C=" << ds.c << "\n";
    return 0;
}

int cmd_train(const std::string& config_path) {
    RunConfig cfg = parse_config(config_path);
    if (cfg.dataset.empty()) throw std::runtime_error("config: missing required key 'dataset'");
    if (cfg.checkpoint.empty())
        throw std::runtime_error("config: missing required key 'checkpoint'");
    if (!cfg.epochs_given) throw std::runtime_error("config: missing required key 'epochs'");
    if (cfg.loss_log.empty()) cfg.loss_log = cfg.checkpoint + ".losses.csv";
    if (cfg.report.empty()) cfg.report = cfg.checkpoint + ".report";

    const rcdh::MultiLabelDataset ds = rcdh::load_dataset(cfg.dataset);
    std::cerr << "training on " << ds.n << " samples (" << ds.d << " dims, " << ds.c
              << " classes) for " << cfg.train.epochs << " epochs\n";

    const rcdh::TrainResult result = rcdh::train(ds, cfg.train);
    rcdh::save_checkpoint(result.params, cfg.checkpoint);

    std::ostringstream csv;
    csv << "epoch,j_r,j_cla,j_clu,j_q,total\n";
    for (std::size_t e = 0; e < result.epochs.size(); ++e) {
        const auto& m = result.epochs[e].mean;
        csv << (e + 1) << ',' << fmt_g(m.rank) << ',' << fmt_g(m.cla) << ',' << fmt_g(m.clu)
            << ',' << fmt_g(m.quant) << ',' << fmt_g(m.total) << "\n";
    }
    write_text_file(cfg.loss_log, csv.str());
    write_text_file(cfg.report, resolved_config_text(cfg));

    std::cout << "checkpoint=" << cfg.checkpoint << "\n";
    std::cout << "final_total=" << fmt_g(result.epochs.back().mean.total) << "\n";
    return 0;
}

int cmd_encode(const std::string& checkpoint_path, const std::string& dataset_path,
               const std::string& codes_path, const std::string& embeddings_path) {
    const rcdh::ModelParams params = rcdh::load_checkpoint(checkpoint_path);
    const rcdh::MultiLabelDataset ds = rcdh::load_dataset(dataset_path);
    if (ds.d != params.head.in_dim)
        throw std::runtime_error("dataset feature dim " + std::to_string(ds.d) +
                                 " does not match checkpoint input dim " +
                                 std::to_string(params.head.in_dim));

    std::vector<std::size_t> all(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) all[i] = i;
    const rcdh::OutputBatch out = rcdh::forward_batch(params.head, ds, all);
    const rcdh::HashCodeSet codes = rcdh::binarize_rows(out.u.data(), ds.n, params.head.bits);
    rcdh::save_codes(codes, codes_path);

    if (!embeddings_path.empty()) {
        std::ofstream dump(embeddings_path, std::ios::binary | std::ios::trunc);
        if (!dump) throw std::runtime_error("cannot open embeddings file: " + embeddings_path);
        for (double x : out.u) {
            const float f = static_cast<float>(x);
            dump.write(reinterpret_cast<const char*>(&f), sizeof(f));
        }
        if (!dump) throw std::runtime_error("write failed: " + embeddings_path);
    }

    std::cout << "encoded " << codes.n << " codes of " << codes.bits << " bits\n";
    return 0;
}

int cmd_query(const std::string& gallery_path, std::size_t top, long long index,
              const std::string& dataset_path, long long row,
              const std::string& checkpoint_path) {
    const rcdh::HashCodeSet gallery = rcdh::load_codes(gallery_path);
    const bool by_index = index >= 0;
    const bool by_feature = !dataset_path.empty() || row >= 0 || !checkpoint_path.empty();
    if (by_index == by_feature)
        throw std::runtime_error(
            "give either --index, or --dataset with --row and --checkpoint");

    std::vector<std::uint64_t> q;
    if (by_index) {
        if (static_cast<std::size_t>(index) >= gallery.n)
            throw std::runtime_error("query index out of range");
        const std::uint64_t* code = gallery.code(static_cast<std::size_t>(index));
        q.assign(code, code + gallery.words_per_code());
    } else {
        if (dataset_path.empty() || row < 0 || checkpoint_path.empty())
            throw std::runtime_error(
                "feature queries need --dataset, --row and --checkpoint together");
        const rcdh::ModelParams params = rcdh::load_checkpoint(checkpoint_path);
        const rcdh::MultiLabelDataset ds = rcdh::load_dataset(dataset_path);
        if (static_cast<std::size_t>(row) >= ds.n)
            throw std::runtime_error("query row out of range");
        if (ds.d != params.head.in_dim)
            throw std::runtime_error("dataset feature dim does not match checkpoint");
        if (params.head.bits != gallery.bits)
            throw std::runtime_error("checkpoint code width " + std::to_string(params.head.bits) +
                                     " does not match gallery width " +
                                     std::to_string(gallery.bits));
        std::vector<double> u(params.head.bits);
        rcdh::forward(params.head, ds.feature_row(static_cast<std::size_t>(row)), u.data());
        q.resize((params.head.bits + 63) / 64);
        rcdh::binarize(u.data(), params.head.bits, q.data());
    }

    const auto hits = rcdh::query(gallery, q.data(), gallery.bits, top);
    for (std::size_t r = 0; r < hits.size(); ++r)
        std::cout << (r + 1) << ' ' << hits[r].index << ' ' << hits[r].distance << "\n";
    return 0;
}

int cmd_eval(const std::string& queries_path, const std::string& gallery_path,
             const std::string& query_codes_path, const std::string& gallery_codes_path,
             std::size_t p, const std::string& report_path, bool exclude_self) {
    const rcdh::MultiLabelDataset queries = rcdh::load_dataset(queries_path);
    const rcdh::MultiLabelDataset gallery = rcdh::load_dataset(gallery_path);
    const rcdh::HashCodeSet qcodes = rcdh::load_codes(query_codes_path);
    const rcdh::HashCodeSet gcodes = rcdh::load_codes(gallery_codes_path);

    const rcdh::EvalResult res = rcdh::evaluate(queries, gallery, qcodes, gcodes, p, exclude_self);
    std::cout << "ndcg@" << p << "=" << fmt_fixed(res.mean_ndcg) << "\n";
    std::cout << "acg@" << p << "=" << fmt_fixed(res.mean_acg) << "\n";

    std::ostringstream rep;
    rep << "p=" << p << "\n";
    rep << "queries=" << res.queries << "\n";
    rep << "gallery=" << gallery.n << "\n";
    rep << "exclude_self=" << (exclude_self ? "true" : "false") << "\n";
    rep << "mean_ndcg=" << fmt_g(res.mean_ndcg) << "\n";
    rep << "mean_acg=" << fmt_g(res.mean_acg) << "\n";
    write_text_file(report_path, rep.str());
    return 0;
}

int cmd_gradcheck(std::size_t bits, std::size_t batch, std::size_t classes, std::size_t dim,
                  std::size_t hidden, std::uint64_t seed) {
    rcdh::GradCheckDims dims;
    dims.bits = bits;
    dims.batch = batch;
    dims.classes = classes;
    dims.dim = dim;
    dims.hidden = hidden;
    const rcdh::GradCheckReport report = rcdh::run_gradcheck(dims, seed);

    std::cout << "seed=" << report.seed << "\n";
    bool all_ok = true;
    for (const auto& row : report.rows) {
        const bool ok = row.max_rel_err < kGradTol;
        all_ok = all_ok && ok;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-8s %.3e %s", row.term.c_str(), row.max_rel_err,
                      ok ? "pass" : "FAIL");
        std::cout << buf << "\n";
    }
    std::cout << "worst=" << fmt_g(report.worst()) << " tol=" << fmt_g(kGradTol) << "\n";
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rank-consistent deep hashing: train, encode and search binary codes"};
    app.require_subcommand(1);
    int rc = 0;

    auto* gen = app.add_subcommand("gen-synth", "generate a synthetic multi-label dataset");
    std::size_t g_classes = 0, g_per_class = 0, g_dim = 0;
    std::string g_combos, g_out;
    double g_sigma = 0.0;
    std::uint64_t g_seed = 0;
    gen->add_option("--classes", g_classes, "number of label classes")->required();
    gen->add_option("--per-class", g_per_class, "samples per label combo")->required();
    gen->add_option("--dim", g_dim, "feature dimension")->required();
    gen->add_option("--combos", g_combos, "comma-separated multi-hot patterns, e.g. 100,010,110")
        ->required();
    gen->add_option("--noise-sigma", g_sigma, "gaussian noise level (default 0)");
    gen->add_option("--seed", g_seed, "random seed (default 0)");
    gen->add_option("--out", g_out, "output dataset path")->required();
    gen->callback(
        [&] { rc = cmd_gen_synth(g_classes, g_per_class, g_dim, g_combos, g_sigma, g_seed, g_out); });

    auto* train = app.add_subcommand("train", "train a hashing model from a config file");
    std::string t_config;
    train->add_option("--config", t_config, "key=value config file")->required();
    train->callback([&] { rc = cmd_train(t_config); });

    auto* encode = app.add_subcommand("encode", "binarize a dataset with a trained checkpoint");
    std::string e_checkpoint, e_dataset, e_codes, e_embeddings;
    encode->add_option("--checkpoint", e_checkpoint, "trained checkpoint")->required();
    encode->add_option("--dataset", e_dataset, "dataset to encode")->required();
    encode->add_option("--codes", e_codes, "output codes path")->required();
    encode->add_option("--embeddings", e_embeddings, "optional raw f32 dump of the outputs");
    encode->callback([&] { rc = cmd_encode(e_checkpoint, e_dataset, e_codes, e_embeddings); });

    auto* qry = app.add_subcommand("query", "rank a gallery by hamming distance");
    std::string q_gallery, q_dataset, q_checkpoint;
    std::size_t q_top = 10;
    long long q_index = -1, q_row = -1;
    qry->add_option("--gallery", q_gallery, "gallery codes file")->required();
    qry->add_option("--top", q_top, "number of results (default 10)");
    qry->add_option("--index", q_index, "query by gallery code index");
    qry->add_option("--dataset", q_dataset, "dataset for a feature query");
    qry->add_option("--row", q_row, "dataset row for a feature query");
    qry->add_option("--checkpoint", q_checkpoint, "checkpoint for a feature query");
    qry->callback([&] { rc = cmd_query(q_gallery, q_top, q_index, q_dataset, q_row, q_checkpoint); });

    auto* eval = app.add_subcommand("eval", "mean NDCG and ACG of codes against labels");
    std::string v_queries, v_gallery, v_qcodes, v_gcodes, v_report;
    std::size_t v_p = 100;
    bool v_exclude_self = false;
    eval->add_option("--queries", v_queries, "query dataset")->required();
    eval->add_option("--gallery", v_gallery, "gallery dataset")->required();
    eval->add_option("--query-codes", v_qcodes, "query codes file")->required();
    eval->add_option("--gallery-codes", v_gcodes, "gallery codes file")->required();
    eval->add_option("--p", v_p, "evaluation depth (default 100)");
    eval->add_option("--report", v_report, "key=value report output path")->required();
    eval->add_flag("--exclude-self", v_exclude_self,
                   "drop gallery row i from query i's ranking");
    eval->callback(
        [&] { rc = cmd_eval(v_queries, v_gallery, v_qcodes, v_gcodes, v_p, v_report, v_exclude_self); });

    auto* gc = app.add_subcommand("gradcheck", "compare analytic gradients to finite differences");
    std::size_t c_bits = 8, c_batch = 6, c_classes = 4, c_dim = 10, c_hidden = 0;
    std::uint64_t c_seed = 0;
    gc->add_option("--bits", c_bits, "code length (default 8)");
    gc->add_option("--batch", c_batch, "batch size (default 6)");
    gc->add_option("--classes", c_classes, "class count (default 4)");
    gc->add_option("--dim", c_dim, "feature dimension (default 10)");
    gc->add_option("--hidden", c_hidden, "hidden layer width, 0 = linear (default 0)");
    gc->add_option("--seed", c_seed, "random seed (default 0)");
    gc->callback([&] { rc = cmd_gradcheck(c_bits, c_batch, c_classes, c_dim, c_hidden, c_seed); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
