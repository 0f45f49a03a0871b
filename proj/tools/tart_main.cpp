// Command-line interface: train, eval, explain, bench and presets.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tart/bench.hpp"
#include "tart/data.hpp"
#include "tart/interpret.hpp"
#include "tart/model.hpp"
#include "tart/model_io.hpp"
#include "tart/train.hpp"

namespace {

using namespace tart;

struct DataOpts {
    std::string path;
    int label_col = -1;
    bool header = false;
};

void add_data_options(CLI::App* cmd, DataOpts& opts) {
    cmd->add_option("--data", opts.path, "CSV file (features, one label column)")
        ->required();
    cmd->add_option("--label-col", opts.label_col,
                    "label column index (default: last column)");
    cmd->add_flag("--header", opts.header, "skip one header row");
}

Dataset load_data(const DataOpts& opts) {
    return load_csv(opts.path, opts.label_col, opts.header);
}

// Re-standardize eval/explain inputs with the statistics stored in the model.
void apply_model_stats(const TartModel& m, Dataset& d) {
    if (m.feature_means.empty()) return;
    if (static_cast<int>(m.feature_means.size()) != d.feature_count()) {
        throw std::runtime_error(
            "data has " + std::to_string(d.feature_count()) +
            " features but the model was trained on " +
            std::to_string(m.feature_means.size()));
    }
    StandardizeStats stats{m.feature_means, m.feature_stds};
    standardize_apply(stats, d);
}

void check_feature_dim(const TartModel& m, const Dataset& d) {
    if (d.feature_count() != m.input_dim) {
        throw std::runtime_error("data has " + std::to_string(d.feature_count()) +
                                 " features but the model expects " +
                                 std::to_string(m.input_dim));
    }
}

int cmd_train(const DataOpts& data_opts, const std::string& preset_name, int window,
              int stride, int depth, int decision_layers, int leaf_layers,
              const bool have_explicit[5], int hidden_units,
              const std::string& leaf_mode, bool sigmoid_decisions, double dropout,
              TrainConfig cfg, bool standardize, const std::string& out_path,
              std::string history_path) {
    if (!preset_name.empty()) {
        const Preset& p = preset(preset_name[0]);
        if (!have_explicit[0]) window = p.window;
        if (!have_explicit[1]) stride = p.stride;
        if (!have_explicit[2]) depth = p.depth;
        if (!have_explicit[3]) decision_layers = p.decision_layers;
        if (!have_explicit[4]) leaf_layers = p.leaf_layers;
    }

    Dataset train_data = load_data(data_opts);
    StandardizeStats stats;
    if (standardize) {
        stats = standardize_fit(train_data);
        standardize_apply(stats, train_data);
    }

    Rng rng(cfg.seed);
    TartModel model = build_model(
        {window, stride, depth}, decision_layers, leaf_layers,
        train_data.feature_count(), train_data.class_count, hidden_units,
        leaf_mode == "single" ? LeafMode::single : LeafMode::multi, rng,
        sigmoid_decisions ? DecisionNorm::sigmoid_pair : DecisionNorm::softmax,
        dropout);
    model.feature_means = stats.means;
    model.feature_stds = stats.stds;

    const FitResult result = fit(model, train_data, cfg);
    const double accuracy = evaluate_accuracy(model, train_data);
    std::printf("train accuracy: %.6f\n", accuracy);
    std::printf("final loss: %.6g\n", result.loss_history.back());

    save_model(model, out_path);
    if (history_path.empty()) history_path = out_path + ".history";
    std::ofstream hist(history_path);
    if (!hist) {
        throw std::runtime_error("cannot open for writing: " + history_path);
    }
    write_loss_history(hist, result.loss_history);
    std::printf("model written to %s\n", out_path.c_str());
    std::printf("loss history written to %s\n", history_path.c_str());
    return 0;
}

int cmd_eval(const std::string& model_path, const DataOpts& data_opts,
             bool both_modes) {
    const TartModel model = load_model(model_path);
    Dataset data = load_data(data_opts);
    apply_model_stats(model, data);
    check_feature_dim(model, data);
    if (both_modes) {
        TartModel copy = model;
        copy.leaf_mode = LeafMode::multi;
        std::printf("accuracy (multi): %.6f\n", evaluate_accuracy(copy, data));
        copy.leaf_mode = LeafMode::single;
        std::printf("accuracy (single): %.6f\n", evaluate_accuracy(copy, data));
    } else {
        const char* mode = model.leaf_mode == LeafMode::multi ? "multi" : "single";
        std::printf("accuracy (%s): %.6f\n", mode, evaluate_accuracy(model, data));
    }
    return 0;
}

int cmd_explain(const std::string& model_path, const DataOpts& data_opts,
                const std::string& out_dir, const std::string& fallback) {
    const TartModel model = load_model(model_path);
    Dataset data = load_data(data_opts);
    apply_model_stats(model, data);
    check_feature_dim(model, data);

    const bool allow_fallback = !fallback.empty();
    std::filesystem::create_directories(out_dir);
    const std::string rel_path = out_dir + "/relevances.csv";
    const std::string mean_path = out_dir + "/class_means.csv";
    const std::string leaf_path = out_dir + "/leaves.csv";

    std::vector<RelevanceReport> reports;
    reports.reserve(static_cast<size_t>(data.size()));
    for (int r = 0; r < data.size(); ++r) {
        reports.push_back(explain_prediction(model, data.features.row(r), allow_fallback));
    }
    const bool used_fallback = !reports.empty() && reports.front().fallback;

    std::ofstream rel(rel_path);
    write_relevance_rows(rel, reports, used_fallback);
    std::ofstream mean(mean_path);
    write_class_means(mean, class_mean_relevance(model, data, allow_fallback));
    std::ofstream leaf(leaf_path);
    write_leaf_table(leaf, model, data);
    if (!rel || !mean || !leaf) {
        throw std::runtime_error("failed writing relevance outputs to " + out_dir);
    }
    std::printf("wrote %s, %s, %s\n", rel_path.c_str(), mean_path.c_str(),
                leaf_path.c_str());
    return 0;
}

int cmd_bench(const BenchConfig& cfg, const std::string& out_path) {
    const std::vector<BenchRow> rows = run_bench(cfg);
    write_bench_csv(std::cout, rows);
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) {
            throw std::runtime_error("cannot open for writing: " + out_path);
        }
        write_bench_csv(f, rows);
    }
    return 0;
}

int cmd_presets() {
    std::printf("preset W S D H L property\n");
    for (const Preset& p : presets()) {
        std::printf("%c %d %d %d %d %d  (%s)\n", p.name, p.window, p.stride, p.depth,
                    p.decision_layers, p.leaf_layers, std::string(p.property).c_str());
    }
    std::printf("\nfamily taxonomy (depth D, decision layers H, leaf layers L):\n");
    std::printf("  %-22s D = 0          L <= 1\n",
                std::string(family_name(Family::logistic_regression)).c_str());
    std::printf("  %-22s D = 0          L > 1\n",
                std::string(family_name(Family::multilayer_perceptron)).c_str());
    std::printf("  %-22s D > 0  H = 0   any L\n",
                std::string(family_name(Family::simple_ensemble)).c_str());
    std::printf("  %-22s D > 0  H = 1   L = 0\n",
                std::string(family_name(Family::tree_type_1)).c_str());
    std::printf("  %-22s D > 0  H > 1   any L\n",
                std::string(family_name(Family::tree_type_2)).c_str());
    std::printf("  %-22s D > 0  H = 1   L >= 1\n",
                std::string(family_name(Family::tree_type_3)).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tree classifiers as transposed-convolution transition chains"};
    app.require_subcommand(1);
    app.set_config("--config");

    // train
    auto* train_cmd = app.add_subcommand("train", "fit a model on a CSV dataset");
    DataOpts train_data;
    add_data_options(train_cmd, train_data);
    std::string preset_name;
    train_cmd->add_option("--preset", preset_name, "structure preset: A, B or C")
        ->check(CLI::IsMember({"A", "B", "C"}));
    int window = 2, stride = 2, depth = 2, decision_layers = 1, leaf_layers = 1;
    auto* ow = train_cmd->add_option("-W,--window", window, "decision branching factor");
    auto* os = train_cmd->add_option("-S,--stride", stride, "node offset between windows");
    auto* od = train_cmd->add_option("-D,--depth", depth, "tree depth");
    auto* oh = train_cmd->add_option("-H,--decision-layers", decision_layers,
                                     "layers per decision net (0 = uniform routing)");
    auto* ol = train_cmd->add_option("-L,--leaf-layers", leaf_layers,
                                     "layers per leaf net (0 = free logits)");
    int hidden_units = 100;
    train_cmd->add_option("--hidden-units", hidden_units, "hidden width for deep nets");
    std::string leaf_mode = "multi";
    train_cmd->add_option("--leaf-mode", leaf_mode, "multi or single leaf selection")
        ->check(CLI::IsMember({"multi", "single"}));
    bool sigmoid_decisions = false;
    train_cmd->add_flag("--sigmoid-decisions", sigmoid_decisions,
                        "use a [s, 1-s] sigmoid pair instead of softmax (window 2)");
    double dropout = 0.15;
    train_cmd->add_option("--dropout", dropout, "hidden dropout probability");
    TrainConfig cfg;
    train_cmd->add_option("--epochs", cfg.epochs, "training epochs");
    train_cmd->add_option("--batch", cfg.batch_size, "mini-batch size");
    train_cmd->add_option("--lr", cfg.lr, "Adam learning rate");
    train_cmd->add_option("--seed", cfg.seed, "seed for init, shuffling and dropout");
    bool no_shuffle = false;
    train_cmd->add_flag("--no-shuffle", no_shuffle, "keep epoch order fixed");
    bool no_standardize = false;
    train_cmd->add_flag("--no-standardize", no_standardize,
                        "train on raw features (no z-score)");
    std::string out_path;
    train_cmd->add_option("--out", out_path, "model file to write")->required();
    std::string history_path;
    train_cmd->add_option("--history", history_path,
                          "loss history file (default: <out>.history)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "accuracy of a saved model on a CSV");
    std::string eval_model;
    eval_cmd->add_option("--model", eval_model, "model file")->required();
    DataOpts eval_data;
    add_data_options(eval_cmd, eval_data);
    bool both_modes = false;
    eval_cmd->add_flag("--both-modes", both_modes,
                       "report multi- and single-leaf accuracy");

    // explain
    auto* explain_cmd =
        app.add_subcommand("explain", "per-feature relevance reports for a CSV");
    std::string explain_model;
    explain_cmd->add_option("--model", explain_model, "model file")->required();
    DataOpts explain_data;
    add_data_options(explain_cmd, explain_data);
    std::string out_dir;
    explain_cmd->add_option("--out-dir", out_dir, "output directory")->required();
    std::string fallback;
    explain_cmd
        ->add_option("--fallback", fallback,
                     "approximation for unsupported structures: grad-x-input")
        ->check(CLI::IsMember({"grad-x-input"}));

    // bench
    auto* bench_cmd = app.add_subcommand(
        "bench", "time transposed-convolution inference against the dense chain");
    BenchConfig bench_cfg;
    bench_cmd->add_option("--depths", bench_cfg.depths, "tree depths to measure")
        ->delimiter(',');
    bench_cmd->add_option("--window", bench_cfg.window, "branching factor");
    bench_cmd->add_option("--stride", bench_cfg.stride, "window stride");
    bench_cmd->add_option("--batch", bench_cfg.batch, "examples per pass");
    bench_cmd->add_option("--repeats", bench_cfg.repeats, "timed repetitions");
    bench_cmd->add_option("--seed", bench_cfg.seed, "seed for the synthetic batch");
    std::string bench_out;
    bench_cmd->add_option("--out", bench_out, "also write the CSV here");

    // presets
    app.add_subcommand("presets", "print the structure presets and family taxonomy");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            const bool have_explicit[5] = {ow->count() > 0, os->count() > 0,
                                           od->count() > 0, oh->count() > 0,
                                           ol->count() > 0};
            cfg.shuffle = !no_shuffle;
            return cmd_train(train_data, preset_name, window, stride, depth,
                             decision_layers, leaf_layers, have_explicit, hidden_units,
                             leaf_mode, sigmoid_decisions, dropout, cfg,
                             !no_standardize, out_path, history_path);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_model, eval_data, both_modes);
        }
        if (explain_cmd->parsed()) {
            return cmd_explain(explain_model, explain_data, out_dir, fallback);
        }
        if (bench_cmd->parsed()) {
            return cmd_bench(bench_cfg, bench_out);
        }
        return cmd_presets();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
