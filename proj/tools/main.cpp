#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nliswap/baselines.hpp"
#include "nliswap/confoundgen.hpp"
#include "nliswap/corpus.hpp"
#include "nliswap/metrics.hpp"
#include "nliswap/swaplogic.hpp"
#include "nliswap/transform.hpp"

namespace fs = std::filesystem;
using namespace nliswap;

namespace {

void echo_config(const std::string& cmd,
                 const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cerr << "config: cmd=" << cmd;
    for (const auto& [k, v] : kv) std::cerr << ' ' << k << '=' << v;
    std::cerr << '\n';
}

CorpusFormat parse_format(const std::string& s) {
    if (s == "jsonl") return CorpusFormat::SnliJsonl;
    if (s == "tsv") return CorpusFormat::Tsv;
    throw CLI::ValidationError("--format", "must be jsonl or tsv");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot open file for writing: " + path);
    out << content;
    if (!content.empty() && content.back() != '\n') out << '\n';
    if (!out) throw CorpusError("write failed: " + path);
}

struct GenArgs {
    GeneratorConfig config;
    std::string out;
};

struct SwapArgs {
    std::string in, out, mode = "all", mask_out, format = "jsonl";
    double fraction = 0.0;
    std::uint64_t seed = 0;
};

struct TrainArgs {
    std::string in, out, mode = "hypothesis-only", heldout, log_dir,
                format = "jsonl";
    TrainConfig config;
};

struct PredictArgs {
    std::string model, in, out, format = "jsonl";
};

struct EvalArgs {
    std::string corpus, pred, swapped_corpus, swapped_pred, out,
                format = "jsonl";
    PatternThresholds thresholds;
};

struct RobustArgs {
    std::string scores, out;
    bool relaxed = false;
};

struct AnalyzeArgs {
    std::string corpus, out, format = "jsonl";
    std::vector<std::string> log_dirs;
    std::size_t k = 400;
};

int run_gen(const GenArgs& args) {
    echo_config("gen", {{"n", std::to_string(args.config.n_pairs)},
                        {"gamma", std::to_string(args.config.gamma)},
                        {"vocab-size",
                         std::to_string(args.config.content_vocab_size)},
                        {"seed", std::to_string(args.config.seed)},
                        {"out", args.out}});
    const auto gen = generate(args.config);
    write_generated(gen, args.config, args.out);
    std::cout << "wrote " << gen.corpus.size() << " pairs to " << args.out
              << " (+ sidecar " << args.out << ".meta.json)\n";
    return 0;
}

int run_swap(const SwapArgs& args) {
    echo_config("swap", {{"in", args.in},
                         {"out", args.out},
                         {"mode", args.mode},
                         {"fraction", std::to_string(args.fraction)},
                         {"seed", std::to_string(args.seed)},
                         {"format", args.format}});
    const auto format = parse_format(args.format);
    const auto loaded = read_corpus(args.in, format);
    if (loaded.skipped)
        std::cerr << "skipped " << loaded.skipped
                  << " records without a usable gold label\n";
    if (args.mode == "all") {
        write_corpus(swap_all(loaded.corpus), args.out, format);
        std::cout << "total=" << loaded.corpus.size()
                  << " swapped=" << loaded.corpus.size() << '\n';
        return 0;
    }
    SwapPolicy policy;
    policy.fraction = args.fraction;
    policy.seed = args.seed;
    const auto [swapped, mask] = swap_fraction(loaded.corpus, policy);
    write_corpus(swapped, args.out, format);
    if (!args.mask_out.empty()) write_swap_mask(mask, args.mask_out);
    std::size_t eligible = 0;
    for (const auto& pair : loaded.corpus.pairs)
        eligible += policy.eligible.count(pair.gold);
    // the fraction applies to eligible (C/N) pairs, not to all pairs;
    // both counts are printed so the distinction is visible
    std::cout << "total=" << loaded.corpus.size() << " eligible=" << eligible
              << " swapped=" << mask.swapped_ids.size() << '\n';
    return 0;
}

int run_train(const TrainArgs& args) {
    echo_config("train",
                {{"in", args.in},
                 {"out", args.out},
                 {"mode", args.mode},
                 {"epochs", std::to_string(args.config.epochs)},
                 {"lr", std::to_string(args.config.learning_rate)},
                 {"batch", std::to_string(args.config.batch_size)},
                 {"l2", std::to_string(args.config.l2)},
                 {"dim", std::to_string(args.config.embedding_dim)},
                 {"seed", std::to_string(args.config.seed)}});
    const auto format = parse_format(args.format);
    const auto loaded = read_corpus(args.in, format);
    const auto mode = args.mode == "cbow-pair" ? FeatureMode::CbowPair
                                               : FeatureMode::HypothesisOnly;
    Corpus heldout;
    PredictionLog log;
    const bool track = !args.heldout.empty();
    if (track) heldout = read_corpus(args.heldout, format).corpus;
    const auto model = train(loaded.corpus, mode, args.config,
                             track ? &heldout : nullptr,
                             track ? &log : nullptr);
    save_model(model, args.config, args.out);
    if (track && !args.log_dir.empty()) {
        fs::create_directories(args.log_dir);
        for (std::size_t e = 0; e < log.epochs.size(); ++e) {
            std::ostringstream name;
            name << "epoch-";
            name.width(3);
            name.fill('0');
            name << e + 1;
            write_predictions(log.epochs[e],
                              (fs::path(args.log_dir) / (name.str() + ".tsv"))
                                  .string());
        }
    }
    const auto train_report = evaluate(loaded.corpus,
                                       predict(model, loaded.corpus));
    std::cout << "trained on " << loaded.corpus.size()
              << " pairs; training accuracy "
              << train_report.overall() << '\n';
    return 0;
}

int run_predict(const PredictArgs& args) {
    echo_config("predict", {{"model", args.model},
                            {"in", args.in},
                            {"out", args.out},
                            {"format", args.format}});
    const auto model = load_model(args.model);
    const auto loaded = read_corpus(args.in, parse_format(args.format));
    write_predictions(predict(model, loaded.corpus), args.out);
    std::cout << "wrote " << loaded.corpus.size() << " predictions to "
              << args.out << '\n';
    return 0;
}

int run_eval(const EvalArgs& args) {
    echo_config("eval",
                {{"corpus", args.corpus},
                 {"pred", args.pred},
                 {"swapped-corpus", args.swapped_corpus},
                 {"swapped-pred", args.swapped_pred},
                 {"tau-e", std::to_string(args.thresholds.tau_entailment_drop)},
                 {"tau-cn", std::to_string(args.thresholds.tau_comparable)}});
    const auto format = parse_format(args.format);
    const auto original = evaluate(
        read_corpus(args.corpus, format).corpus,
        read_predictions(args.pred, PredictionFormat::Tsv));
    const auto swapped = evaluate(
        read_corpus(args.swapped_corpus, format).corpus,
        read_predictions(args.swapped_pred, PredictionFormat::Tsv));
    const auto report = swap_diff(original, swapped, args.thresholds);
    std::cout << swap_diff_text(report);
    if (!args.out.empty()) write_text_file(args.out, swap_diff_json(report));
    return 0;
}

int run_robustness(const RobustArgs& args) {
    echo_config("robustness", {{"scores", args.scores},
                               {"relaxed", args.relaxed ? "true" : "false"}});
    const auto table = read_score_table(args.scores);
    auto report = deviation(table, args.relaxed);
    // descending by devi within each model, models in file order
    std::vector<std::string> model_order;
    std::map<std::string, std::vector<DeviationEntry>> by_model;
    for (auto& entry : report.entries) {
        if (!by_model.count(entry.model)) model_order.push_back(entry.model);
        by_model[entry.model].push_back(std::move(entry));
    }
    DeviationReport sorted;
    for (const auto& model : model_order) {
        auto& entries = by_model[model];
        std::stable_sort(entries.begin(), entries.end(),
                         [](const auto& a, const auto& b) {
                             return a.devi > b.devi;
                         });
        for (auto& entry : entries) sorted.entries.push_back(std::move(entry));
    }
    std::cout << deviation_text(sorted);
    if (!args.out.empty()) write_text_file(args.out, deviation_json(sorted));
    return 0;
}

PredictionLog read_log_dir(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".tsv")
            files.push_back(entry.path());
    if (files.empty())
        throw CorpusError("no .tsv epoch files in " + dir);
    std::sort(files.begin(), files.end());
    PredictionLog log;
    for (const auto& file : files)
        log.epochs.push_back(read_predictions(file.string(),
                                              PredictionFormat::Tsv));
    return log;
}

int run_analyze(const AnalyzeArgs& args) {
    echo_config("analyze", {{"corpus", args.corpus},
                            {"k", std::to_string(args.k)},
                            {"logs", std::to_string(args.log_dirs.size())}});
    const auto corpus = read_corpus(args.corpus,
                                    parse_format(args.format)).corpus;
    std::vector<std::string> names;
    std::vector<FrequentErrorSet> sets;
    std::ostringstream text;
    nlohmann::json out_json;
    out_json["version"] = 1;
    auto logs_json = nlohmann::json::array();
    for (const auto& dir : args.log_dirs) {
        const auto log = read_log_dir(dir);
        const auto freq = frequent_errors(corpus, log, args.k);
        // the confusion profile is computed on the final epoch
        const auto profile = confusion_profile(corpus, log.epochs.back());
        const auto name = fs::path(dir).filename().string();
        names.push_back(name.empty() ? dir : name);
        text << "log " << names.back() << ": " << log.epochs.size()
             << " epochs, " << freq.ranked.size()
             << " frequently misclassified pairs\n";
        nlohmann::json log_json;
        log_json["name"] = names.back();
        auto freq_json = nlohmann::json::array();
        for (const auto& [id, count] : freq.ranked)
            freq_json.push_back({{"id", id}, {"misclassified_epochs", count}});
        log_json["frequent_errors"] = freq_json;
        if (profile.fractions) {
            text << "  misclassification fractions (final epoch):";
            auto profile_json = nlohmann::json::object();
            for (std::size_t i = 0; i < 6; ++i) {
                text << ' ' << kConfusionNames[i] << '='
                     << (*profile.fractions)[i];
                profile_json[kConfusionNames[i]] = {
                    {"count", profile.counts[i]},
                    {"fraction", (*profile.fractions)[i]}};
            }
            text << '\n';
            log_json["confusion_profile"] = profile_json;
        } else {
            text << "  no misclassifications in the final epoch\n";
        }
        logs_json.push_back(std::move(log_json));
        sets.push_back(freq);
    }
    out_json["logs"] = std::move(logs_json);
    if (sets.size() > 1) {
        text << "overlap matrix:\n";
        auto matrix = nlohmann::json::array();
        for (std::size_t a = 0; a < sets.size(); ++a) {
            for (std::size_t b = 0; b < sets.size(); ++b) {
                const auto n = a == b ? sets[a].ranked.size()
                                      : overlap(sets[a], sets[b]);
                text << "  " << names[a] << " x " << names[b] << ": " << n
                     << '\n';
                matrix.push_back({{"a", names[a]}, {"b", names[b]},
                                  {"overlap", n}});
            }
        }
        out_json["overlap"] = std::move(matrix);
    }
    std::cout << text.str();
    if (!args.out.empty()) write_text_file(args.out, out_json.dump(2));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"swap-based evaluation and robustness testing for NLI"};
    app.require_subcommand(1);

    GenArgs gen_args;
    auto* gen_cmd = app.add_subcommand(
        "gen", "generate a synthetic corpus with a planted confounder");
    gen_cmd->add_option("--n", gen_args.config.n_pairs, "number of pairs")
        ->required()
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--gamma", gen_args.config.gamma,
                        "confound strength in [0, 1]")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    gen_cmd->add_option("--vocab-size", gen_args.config.content_vocab_size,
                        "content noun count")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen_args.config.seed, "generator seed");
    gen_cmd->add_option("--out", gen_args.out, "output corpus (jsonl)")
        ->required();

    SwapArgs swap_args;
    auto* swap_cmd = app.add_subcommand("swap", "swap premise and hypothesis");
    swap_cmd->add_option("--in", swap_args.in, "input corpus")->required();
    swap_cmd->add_option("--out", swap_args.out, "output corpus")->required();
    swap_cmd->add_option("--mode", swap_args.mode, "all | fraction")
        ->check(CLI::IsMember({"all", "fraction"}));
    swap_cmd->add_option("--fraction", swap_args.fraction,
                         "fraction of eligible (C/N) pairs to swap")
        ->check(CLI::Range(0.0, 1.0));
    swap_cmd->add_option("--seed", swap_args.seed, "selection seed");
    swap_cmd->add_option("--mask-out", swap_args.mask_out,
                         "swap mask output (jsonl)");
    swap_cmd->add_option("--format", swap_args.format, "jsonl | tsv")
        ->check(CLI::IsMember({"jsonl", "tsv"}));

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a baseline model");
    train_cmd->add_option("--in", train_args.in, "training corpus")->required();
    train_cmd->add_option("--out", train_args.out, "model output (json)")
        ->required();
    train_cmd->add_option("--mode", train_args.mode,
                          "hypothesis-only | cbow-pair")
        ->check(CLI::IsMember({"hypothesis-only", "cbow-pair"}));
    train_cmd->add_option("--epochs", train_args.config.epochs, "epochs")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", train_args.config.learning_rate,
                          "learning rate");
    train_cmd->add_option("--batch", train_args.config.batch_size,
                          "batch size")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--l2", train_args.config.l2, "l2 penalty");
    train_cmd->add_option("--dim", train_args.config.embedding_dim,
                          "embedding dimension")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", train_args.config.seed, "training seed");
    train_cmd->add_option("--heldout", train_args.heldout,
                          "held-out corpus for per-epoch predictions");
    train_cmd->add_option("--log-dir", train_args.log_dir,
                          "directory for per-epoch prediction files");
    train_cmd->add_option("--format", train_args.format, "jsonl | tsv")
        ->check(CLI::IsMember({"jsonl", "tsv"}));

    PredictArgs predict_args;
    auto* predict_cmd = app.add_subcommand("predict", "predict with a model");
    predict_cmd->add_option("--model", predict_args.model, "model file")
        ->required();
    predict_cmd->add_option("--in", predict_args.in, "corpus")->required();
    predict_cmd->add_option("--out", predict_args.out, "predictions tsv")
        ->required();
    predict_cmd->add_option("--format", predict_args.format, "jsonl | tsv")
        ->check(CLI::IsMember({"jsonl", "tsv"}));

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand(
        "eval", "original-vs-swapped accuracy diff with pattern verdict");
    eval_cmd->add_option("--corpus", eval_args.corpus, "original corpus")
        ->required();
    eval_cmd->add_option("--pred", eval_args.pred,
                         "predictions on the original corpus (tsv)")
        ->required();
    eval_cmd->add_option("--swapped-corpus", eval_args.swapped_corpus,
                         "swapped corpus")
        ->required();
    eval_cmd->add_option("--swapped-pred", eval_args.swapped_pred,
                         "predictions on the swapped corpus (tsv)")
        ->required();
    eval_cmd->add_option("--tau-e", eval_args.thresholds.tau_entailment_drop,
                         "entailment drop threshold");
    eval_cmd->add_option("--tau-cn", eval_args.thresholds.tau_comparable,
                         "comparability threshold");
    eval_cmd->add_option("--out", eval_args.out, "JSON report path");
    eval_cmd->add_option("--format", eval_args.format, "jsonl | tsv")
        ->check(CLI::IsMember({"jsonl", "tsv"}));

    RobustArgs robust_args;
    auto* robust_cmd = app.add_subcommand(
        "robustness", "ratio/deviation statistics from a stress score table");
    robust_cmd->add_option("--scores", robust_args.scores, "score table csv")
        ->required();
    robust_cmd->add_flag("--relaxed", robust_args.relaxed,
                         "allow a single category per (model, test)");
    robust_cmd->add_option("--out", robust_args.out, "JSON report path");

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand(
        "analyze", "frequent-error and confusion analysis of prediction logs");
    analyze_cmd->add_option("--corpus", analyze_args.corpus, "corpus")
        ->required();
    analyze_cmd
        ->add_option("--pred-log", analyze_args.log_dirs,
                     "directory of per-epoch prediction tsv files (repeatable)")
        ->required();
    analyze_cmd->add_option("--k", analyze_args.k, "frequent-error set size")
        ->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--out", analyze_args.out, "JSON report path");
    analyze_cmd->add_option("--format", analyze_args.format, "jsonl | tsv")
        ->check(CLI::IsMember({"jsonl", "tsv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_cmd->parsed()) return run_gen(gen_args);
        if (swap_cmd->parsed()) return run_swap(swap_args);
        if (train_cmd->parsed()) return run_train(train_args);
        if (predict_cmd->parsed()) return run_predict(predict_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (robust_cmd->parsed()) return run_robustness(robust_args);
        if (analyze_cmd->parsed()) return run_analyze(analyze_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
