#include <cctype>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlbatch/dataset.hpp"
#include "mlbatch/experiment.hpp"
#include "mlbatch/imbalance.hpp"

namespace {

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

mlbatch::Dataset load_dataset(const std::string& path, const std::string& format,
                              const std::string& labels) {
    if (format == "csv") {
        if (!is_integer(labels))
            throw CLI::ValidationError("--labels", "CSV format needs a trailing label count");
        return mlbatch::load_csv(path, std::stoi(labels));
    }
    if (format == "arff") {
        if (is_integer(labels)) return mlbatch::load_arff(path, std::stoi(labels));
        return mlbatch::load_arff(path, mlbatch::read_label_list(labels));
    }
    throw CLI::ValidationError("--format", "must be arff or csv");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-label adaptive batch selection experiment runner"};
    app.require_subcommand(1);
    app.set_config("--config");

    // run
    auto* run = app.add_subcommand("run", "Train strategies over folds and seeds");
    mlbatch::ExperimentConfig cfg;
    std::string labels;
    std::vector<std::string> seed_strings = {"1"};
    std::string strategies = "random,adaptive";
    run->add_option("--dataset", cfg.dataset_path, "Dataset file path")->required();
    run->add_option("--format", cfg.format, "arff | csv")->default_val("arff");
    run->add_option("--labels", labels, "Label list file or trailing label count")->required();
    run->add_option("--strategies", strategies,
                    "Comma-separated: random | hard | adaptive | adaptive-chain");
    run->add_option("--se", cfg.train.selection_pressure, "Selection pressure s_e");
    run->add_option("--batch-size", cfg.train.batch_size, "Mini-batch size");
    run->add_option("--epochs", cfg.train.epochs, "Training epochs");
    run->add_option("--warmup", cfg.train.warmup_epochs, "Warm-up epochs");
    run->add_option("--k", cfg.train.k, "kNN neighbor count for local imbalance");
    run->add_option("--lr", cfg.train.learning_rate, "Learning rate");
    run->add_option("--folds", cfg.folds, "Cross-validation fold count");
    run->add_option("--seeds", seed_strings, "Seeds, one run per seed")->delimiter(',');
    run->add_flag("--standardize", cfg.train.standardize,
                  "Standardize features on the training split");
    run->add_option("--select-metric", cfg.train.select_metric,
                    "Validation metric choosing the reported epoch");
    run->add_option("--out", cfg.out_dir, "Output directory");
    run->add_flag("--dump-scores", cfg.dump_scores, "Dump per-run test score matrices");
    run->add_flag("--debug-batches", cfg.debug_batches,
                  "Write per-batch JSON-lines debug streams");

    // compare
    auto* cmp = app.add_subcommand("compare", "Wilcoxon comparison of two summary files");
    std::string summary_a, summary_b;
    double significance = 0.05;
    cmp->add_option("summary_a", summary_a, "summary.csv of the candidate strategy")->required();
    cmp->add_option("summary_b", summary_b, "summary.csv of the baseline strategy")->required();
    cmp->add_option("--significance", significance, "Significance level");

    // stats
    auto* st = app.add_subcommand("stats", "Print dataset shape and statistics");
    std::string st_path, st_format = "arff", st_labels;
    st->add_option("--dataset", st_path, "Dataset file path")->required();
    st->add_option("--format", st_format, "arff | csv");
    st->add_option("--labels", st_labels, "Label list file or trailing label count")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            mlbatch::Dataset ds = load_dataset(cfg.dataset_path, cfg.format, labels);
            cfg.strategies.clear();
            std::string cur;
            for (char c : strategies + ",") {
                if (c == ',') {
                    if (!cur.empty()) cfg.strategies.push_back(cur);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            for (const auto& s : cfg.strategies) mlbatch::strategy_from_name(s);  // validate
            cfg.seeds.clear();
            for (const auto& s : seed_strings) cfg.seeds.push_back(std::stoull(s));
            std::string out = mlbatch::run_experiment(ds, cfg);
            std::cout << "wrote " << out << "/{curves,metrics,density,summary}.csv\n";
        } else if (*cmp) {
            auto table = mlbatch::compare(summary_a, summary_b, significance);
            std::printf("%-14s %-6s %s\n", "metric", "verdict", "p-value");
            for (const auto& row : table)
                std::printf("%-14s %-6s (%.6g)\n", row.metric.c_str(), row.verdict.c_str(),
                            row.p_value);
        } else if (*st) {
            mlbatch::Dataset ds = load_dataset(st_path, st_format, st_labels);
            mlbatch::DatasetStats s = mlbatch::stats(ds);
            auto ir = mlbatch::irlbl(ds.labels);
            std::printf("n=%zu d=%zu q=%zu card=%.4f dens=%.4f mean_ir=%.4f\n", ds.n(), ds.d(),
                        ds.q(), s.card, s.dens, mlbatch::mean_ir(ir));
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
