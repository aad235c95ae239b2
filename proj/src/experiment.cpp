#include "mlbatch/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace mlbatch {

namespace {

constexpr std::uint64_t kFoldSeed = 1234567;  // shared so runs pair by fold

std::string bucket_name(int minority_count) {
    if (minority_count <= 0) return "0";
    if (minority_count == 1) return "1";
    if (minority_count == 2) return "2";
    return ">2";
}

struct RunSpec {
    std::string strategy;
    std::uint64_t seed;
    int fold;
    std::string run_id;
};

struct RunOutput {
    TrainResult result;
    std::string batch_stream;  // JSON lines, empty unless debug_batches
};

void write_metric_row(std::ofstream& out, const std::string& run_id, const std::string& strategy,
                      std::uint64_t seed, int fold, int epoch, const std::string& split,
                      const MetricReport& r) {
    out << run_id << "," << strategy << "," << seed << "," << fold << "," << epoch << ","
        << split << "," << r.macro_f << "," << r.micro_f << "," << r.macro_auc << ","
        << r.ranking_loss << "," << r.hamming_loss << "," << r.one_error << "\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

}  // namespace

DensityRecord density_snapshot(const std::vector<double>& raw_loss, const Matrix& labels,
                               const std::vector<bool>& minority_mask, int epoch) {
    if (raw_loss.size() != labels.rows())
        throw std::invalid_argument("density_snapshot: loss/label row mismatch");
    DensityRecord rec;
    rec.epoch = epoch;
    rec.bucket.resize(raw_loss.size());
    rec.log_loss.resize(raw_loss.size());
    for (std::size_t i = 0; i < raw_loss.size(); ++i) {
        int count = 0;
        for (std::size_t j = 0; j < labels.cols(); ++j)
            if (minority_mask[j] && labels(i, j) != 0.0) ++count;
        rec.bucket[i] = bucket_name(count);
        rec.log_loss[i] = std::log(raw_loss[i] + 1e-12);
    }
    return rec;
}

std::string run_experiment(const Dataset& dataset, const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);

    const FoldSplit folds = kfold(dataset, config.folds, kFoldSeed);

    std::vector<RunSpec> specs;
    for (const auto& strategy : config.strategies)
        for (std::uint64_t seed : config.seeds)
            for (int fold = 0; fold < config.folds; ++fold) {
                RunSpec s{strategy, seed, fold,
                          strategy + "-s" + std::to_string(seed) + "-f" + std::to_string(fold)};
                specs.push_back(std::move(s));
            }

    std::vector<RunOutput> outputs(specs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= specs.size()) return;
            const RunSpec& spec = specs[idx];
            TrainConfig tc = config.train;
            tc.strategy = strategy_from_name(spec.strategy);
            tc.seed = spec.seed;
            Split split = split_from_folds(folds, spec.fold);

            std::ostringstream stream;
            BatchHook hook = nullptr;
            if (config.debug_batches) {
                hook = [&stream](int epoch, int batch,
                                 const std::vector<std::size_t>& indices,
                                 const std::vector<double>& probabilities) {
                    nlohmann::json row;
                    row["epoch"] = epoch;
                    row["batch"] = batch;
                    row["indices"] = indices;
                    std::vector<double> p;
                    p.reserve(indices.size());
                    for (std::size_t i : indices) p.push_back(probabilities[i]);
                    row["p"] = p;
                    stream << row.dump() << "\n";
                };
            }
            outputs[idx].result = train(dataset, split, tc, hook);
            outputs[idx].batch_stream = stream.str();
        }
    };

    unsigned threads = 1;
    if (const char* env = std::getenv("MLBATCH_THREADS")) {
        int v = std::atoi(env);
        if (v > 1) threads = static_cast<unsigned>(v);
    }
    threads = std::min<unsigned>(threads, specs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::ofstream curves(config.out_dir + "/curves.csv");
    std::ofstream metrics(config.out_dir + "/metrics.csv");
    std::ofstream density(config.out_dir + "/density.csv");
    std::ofstream summary(config.out_dir + "/summary.csv");
    curves.precision(17);
    metrics.precision(17);
    density.precision(17);
    summary.precision(17);
    curves << "run_id,strategy,seed,fold,epoch,batch,wallclock_ms,train_loss\n";
    metrics << "run_id,strategy,seed,fold,epoch,split,macro_f,micro_f,macro_auc,"
               "ranking_loss,hamming_loss,one_error\n";
    density << "run_id,epoch,bucket,sample_index,log_loss\n";
    summary << "run_id,strategy,seed,fold,best_epoch,macro_f,micro_f,macro_auc,"
               "ranking_loss,hamming_loss,one_error\n";

    for (std::size_t idx = 0; idx < specs.size(); ++idx) {
        const RunSpec& spec = specs[idx];
        const TrainResult& res = outputs[idx].result;

        for (const BatchRow& row : res.batch_rows)
            curves << spec.run_id << "," << spec.strategy << "," << spec.seed << ","
                   << spec.fold << "," << row.epoch << "," << row.batch << ","
                   << row.wallclock_ms << "," << row.train_loss << "\n";

        Split split = split_from_folds(folds, spec.fold);
        Matrix train_labels(split.train.size(), dataset.q());
        for (std::size_t i = 0; i < split.train.size(); ++i)
            for (std::size_t j = 0; j < dataset.q(); ++j)
                train_labels(i, j) = dataset.labels(split.train[i], j);

        for (const EpochRow& row : res.epoch_rows)
            write_metric_row(metrics, spec.run_id, spec.strategy, spec.seed, spec.fold,
                             row.epoch, "valid", row.valid);
        write_metric_row(metrics, spec.run_id, spec.strategy, spec.seed, spec.fold,
                         res.best_epoch, "test", res.test);

        for (std::size_t e = 0; e < res.epoch_sample_losses.size(); ++e) {
            DensityRecord rec = density_snapshot(res.epoch_sample_losses[e], train_labels,
                                                 res.minority_mask, static_cast<int>(e));
            for (std::size_t i = 0; i < rec.log_loss.size(); ++i)
                density << spec.run_id << "," << rec.epoch << ",\"" << rec.bucket[i] << "\","
                        << i << "," << rec.log_loss[i] << "\n";
        }

        const MetricReport& t = res.test;
        summary << spec.run_id << "," << spec.strategy << "," << spec.seed << ","
                << spec.fold << "," << res.best_epoch << "," << t.macro_f << "," << t.micro_f
                << "," << t.macro_auc << "," << t.ranking_loss << "," << t.hamming_loss << ","
                << t.one_error << "\n";

        if (config.debug_batches) {
            std::ofstream js(config.out_dir + "/batches-" + spec.run_id + ".jsonl");
            js << outputs[idx].batch_stream;
        }
        if (config.dump_scores) {
            Matrix scores = forward(res.best_model, [&] {
                Matrix x = dataset.features;
                if (config.train.standardize) standardize_features(x, split.train);
                Matrix xt(split.test.size(), dataset.d());
                for (std::size_t i = 0; i < split.test.size(); ++i)
                    for (std::size_t j = 0; j < dataset.d(); ++j)
                        xt(i, j) = x(split.test[i], j);
                return xt;
            }());
            std::ofstream sc(config.out_dir + "/scores-" + spec.run_id + ".csv");
            sc.precision(17);
            for (std::size_t i = 0; i < scores.rows(); ++i) {
                for (std::size_t j = 0; j < scores.cols(); ++j)
                    sc << (j ? "," : "") << scores(i, j);
                for (std::size_t j = 0; j < dataset.q(); ++j)
                    sc << "," << dataset.labels(split.test[i], j);
                sc << "\n";
            }
        }
    }
    return config.out_dir;
}

std::vector<CompareRow> compare(const std::string& summary_a, const std::string& summary_b,
                                double significance) {
    struct Row {
        std::map<std::string, double> metrics;
    };
    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open summary file: " + path);
        std::string line;
        if (!std::getline(in, line)) throw std::invalid_argument("empty summary file: " + path);
        auto header = split_csv_line(line);
        std::map<std::string, Row> rows;  // key = seed-fold
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto toks = split_csv_line(line);
            if (toks.size() != header.size())
                throw std::invalid_argument("ragged summary row in " + path);
            Row r;
            std::string seed, fold;
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (header[c] == "seed") seed = toks[c];
                else if (header[c] == "fold") fold = toks[c];
                else if (header[c] != "run_id" && header[c] != "strategy" &&
                         header[c] != "best_epoch")
                    r.metrics[header[c]] = std::stod(toks[c]);
            }
            rows[seed + "-" + fold] = std::move(r);
        }
        return rows;
    };

    auto rows_a = load(summary_a);
    auto rows_b = load(summary_b);
    if (rows_a.empty() || rows_a.size() != rows_b.size())
        throw std::invalid_argument("compare: summaries are not paired");
    for (const auto& [key, row] : rows_a)
        if (!rows_b.count(key))
            throw std::invalid_argument("compare: no pair for run key " + key);

    const std::vector<std::pair<std::string, bool>> metric_dirs = {
        {"macro_f", true},     {"micro_f", true},      {"macro_auc", true},
        {"ranking_loss", false}, {"hamming_loss", false}, {"one_error", false}};

    std::vector<CompareRow> table;
    for (const auto& [metric, higher_better] : metric_dirs) {
        std::vector<double> a, b;
        for (const auto& [key, row] : rows_a) {
            a.push_back(row.metrics.at(metric));
            b.push_back(rows_b.at(key).metrics.at(metric));
        }
        WilcoxonResult w = wilcoxon_signed_rank(a, b);
        CompareRow cr;
        cr.metric = metric;
        cr.p_value = w.p_value;
        if (w.p_value >= significance) {
            cr.verdict = "tie";
        } else {
            double mean_a = 0.0, mean_b = 0.0;
            for (double v : a) mean_a += v;
            for (double v : b) mean_b += v;
            const bool a_better = higher_better ? mean_a > mean_b : mean_a < mean_b;
            cr.verdict = a_better ? "win" : "loss";
        }
        table.push_back(std::move(cr));
    }
    return table;
}

}  // namespace mlbatch
