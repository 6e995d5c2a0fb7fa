#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nliswap/baselines.hpp"
#include "nliswap/confoundgen.hpp"
#include "nliswap/corpus.hpp"
#include "nliswap/metrics.hpp"
#include "nliswap/swaplogic.hpp"
#include "nliswap/transform.hpp"

namespace py = pybind11;
using namespace nliswap;

namespace {

CorpusFormat corpus_format(const std::string& s) {
    if (s == "jsonl") return CorpusFormat::SnliJsonl;
    if (s == "tsv") return CorpusFormat::Tsv;
    throw std::invalid_argument("format must be 'jsonl' or 'tsv'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "swap-based evaluation and robustness testing for NLI";

    py::enum_<Label>(m, "Label")
        .value("ENTAILMENT", Label::Entailment)
        .value("CONTRADICTION", Label::Contradiction)
        .value("NEUTRAL", Label::Neutral);

    py::enum_<Preservation>(m, "Preservation")
        .value("PRESERVED", Preservation::Preserved)
        .value("NOT_DETERMINED", Preservation::NotDetermined);

    py::enum_<Verdict>(m, "Verdict")
        .value("CONSISTENT", Verdict::Consistent)
        .value("SUSPECT", Verdict::Suspect);

    py::enum_<FeatureMode>(m, "FeatureMode")
        .value("HYPOTHESIS_ONLY", FeatureMode::HypothesisOnly)
        .value("CBOW_PAIR", FeatureMode::CbowPair);

    py::class_<NliPair>(m, "NliPair")
        .def(py::init([](std::string id, std::string premise,
                         std::string hypothesis, Label gold,
                         std::optional<std::string> genre) {
                 return NliPair{std::move(id), std::move(premise),
                                std::move(hypothesis), gold, std::move(genre)};
             }),
             py::arg("id"), py::arg("premise"), py::arg("hypothesis"),
             py::arg("gold"), py::arg("genre") = std::nullopt)
        .def_readwrite("id", &NliPair::id)
        .def_readwrite("premise", &NliPair::premise)
        .def_readwrite("hypothesis", &NliPair::hypothesis)
        .def_readwrite("gold", &NliPair::gold)
        .def_readwrite("genre", &NliPair::genre)
        .def("__eq__", [](const NliPair& a, const NliPair& b) { return a == b; });

    py::class_<Corpus>(m, "Corpus")
        .def(py::init([](std::vector<NliPair> pairs) {
                 return Corpus{std::move(pairs), std::nullopt};
             }),
             py::arg("pairs") = std::vector<NliPair>{})
        .def_readwrite("pairs", &Corpus::pairs)
        .def("__len__", &Corpus::size);

    py::class_<PredictionSet>(m, "PredictionSet")
        .def(py::init([](std::unordered_map<std::string, Label> entries,
                         std::string model_name) {
                 return PredictionSet{std::move(entries),
                                      std::move(model_name)};
             }),
             py::arg("entries"), py::arg("model_name") = "")
        .def_readwrite("entries", &PredictionSet::entries)
        .def_readwrite("model_name", &PredictionSet::model_name);

    py::class_<PredictionLog>(m, "PredictionLog")
        .def(py::init([](std::vector<PredictionSet> epochs) {
                 return PredictionLog{std::move(epochs)};
             }),
             py::arg("epochs") = std::vector<PredictionSet>{})
        .def_readwrite("epochs", &PredictionLog::epochs);

    m.def("tokenize", &tokenize, py::arg("text"));
    m.def(
        "read_corpus",
        [](const std::string& path, const std::string& format) {
            const auto loaded = read_corpus(path, corpus_format(format));
            return py::make_tuple(loaded.corpus, loaded.skipped);
        },
        py::arg("path"), py::arg("format") = "jsonl",
        "returns (corpus, skipped_count)");
    m.def(
        "write_corpus",
        [](const Corpus& corpus, const std::string& path,
           const std::string& format) {
            write_corpus(corpus, path, corpus_format(format));
        },
        py::arg("corpus"), py::arg("path"), py::arg("format") = "jsonl");
    m.def(
        "read_predictions",
        [](const std::string& path, const std::string& format) {
            if (format != "tsv" && format != "jsonl")
                throw std::invalid_argument("format must be 'tsv' or 'jsonl'");
            return read_predictions(path, format == "tsv"
                                              ? PredictionFormat::Tsv
                                              : PredictionFormat::Jsonl);
        },
        py::arg("path"), py::arg("format") = "tsv");

    m.def("preservation_after_swap", &preservation_after_swap,
          py::arg("label"));

    py::class_<PatternThresholds>(m, "PatternThresholds")
        .def(py::init([](double tau_e, double tau_cn) {
                 return PatternThresholds{tau_e, tau_cn};
             }),
             py::arg("tau_entailment_drop") = 0.30,
             py::arg("tau_comparable") = 0.10)
        .def_readwrite("tau_entailment_drop",
                       &PatternThresholds::tau_entailment_drop)
        .def_readwrite("tau_comparable", &PatternThresholds::tau_comparable);

    py::class_<PatternVerdict>(m, "PatternVerdict")
        .def_readonly("entailment_drop_ok", &PatternVerdict::entailment_drop_ok)
        .def_readonly("contradiction_comparable",
                      &PatternVerdict::contradiction_comparable)
        .def_readonly("neutral_comparable", &PatternVerdict::neutral_comparable)
        .def_readonly("overall", &PatternVerdict::overall);

    m.def(
        "pattern_verdict",
        [](const std::map<Label, double>& diff, const PatternThresholds& t) {
            std::array<double, 3> arr;
            for (const auto l : kAllLabels) {
                const auto it = diff.find(l);
                if (it == diff.end())
                    throw std::invalid_argument(
                        "diff must be given for all three labels");
                arr[label_index(l)] = it->second;
            }
            return pattern_verdict(arr, t);
        },
        py::arg("diff_by_label"), py::arg("thresholds") = PatternThresholds{});

    py::class_<SwapPolicy>(m, "SwapPolicy")
        .def(py::init([](double fraction, std::set<Label> eligible,
                         std::uint64_t seed) {
                 return SwapPolicy{fraction, std::move(eligible), seed};
             }),
             py::arg("fraction"),
             py::arg("eligible") =
                 std::set<Label>{Label::Contradiction, Label::Neutral},
             py::arg("seed") = 0)
        .def_readwrite("fraction", &SwapPolicy::fraction)
        .def_readwrite("eligible", &SwapPolicy::eligible)
        .def_readwrite("seed", &SwapPolicy::seed);

    py::class_<SwapMask>(m, "SwapMask")
        .def_readonly("swapped_ids", &SwapMask::swapped_ids)
        .def_readonly("policy", &SwapMask::policy);

    m.def("swap_pair", &swap_pair, py::arg("pair"));
    m.def("swap_all", &swap_all, py::arg("corpus"));
    m.def("swap_fraction", &swap_fraction, py::arg("corpus"),
          py::arg("policy"));

    py::class_<GeneratorConfig>(m, "GeneratorConfig")
        .def(py::init())
        .def_readwrite("n_pairs", &GeneratorConfig::n_pairs)
        .def_readwrite("gamma", &GeneratorConfig::gamma)
        .def_readwrite("content_vocab_size",
                       &GeneratorConfig::content_vocab_size)
        .def_readwrite("negation_words", &GeneratorConfig::negation_words)
        .def_readwrite("hypernym_map", &GeneratorConfig::hypernym_map)
        .def_readwrite("neutral_modifiers", &GeneratorConfig::neutral_modifiers)
        .def_readwrite("seed", &GeneratorConfig::seed)
        .def_readwrite("label_distribution",
                       &GeneratorConfig::label_distribution);

    py::class_<GeneratedCorpus>(m, "GeneratedCorpus")
        .def_readonly("corpus", &GeneratedCorpus::corpus)
        .def_readonly("artifact_flags", &GeneratedCorpus::artifact_flags);

    m.def("generate", &generate, py::arg("config"));
    m.def("bayes_accuracy_bound", &bayes_accuracy_bound, py::arg("config"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("l2", &TrainConfig::l2)
        .def_readwrite("embedding_dim", &TrainConfig::embedding_dim)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<LinearModel>(m, "LinearModel")
        .def_readonly("mode", &LinearModel::mode)
        .def_readonly("weights", &LinearModel::weights)
        .def_readonly("bias", &LinearModel::bias)
        .def_property_readonly("feature_dim", &LinearModel::feature_dim);

    m.def(
        "train",
        [](const Corpus& corpus, FeatureMode mode, const TrainConfig& config,
           const std::optional<Corpus>& heldout) {
            PredictionLog log;
            auto model = train(corpus, mode, config,
                               heldout ? &*heldout : nullptr,
                               heldout ? &log : nullptr);
            return py::make_tuple(std::move(model), std::move(log));
        },
        py::arg("corpus"), py::arg("mode"), py::arg("config"),
        py::arg("heldout") = std::nullopt, "returns (model, heldout_log)");
    m.def("predict", &predict, py::arg("model"), py::arg("corpus"));
    m.def("featurize", &featurize, py::arg("pair"), py::arg("model"));
    m.def("gradient_check", &gradient_check, py::arg("model"),
          py::arg("batch"), py::arg("l2") = 0.0);
    m.def("save_model", &save_model, py::arg("model"), py::arg("config"),
          py::arg("path"));
    m.def(
        "load_model",
        [](const std::string& path) { return load_model(path); },
        py::arg("path"));

    py::class_<EvalReport>(m, "EvalReport")
        .def("accuracy", &EvalReport::accuracy, py::arg("label"))
        .def("overall", &EvalReport::overall)
        .def_readonly("correct", &EvalReport::correct)
        .def_readonly("total", &EvalReport::total);

    py::class_<SwapDiffReport>(m, "SwapDiffReport")
        .def_readonly("original", &SwapDiffReport::original)
        .def_readonly("swapped", &SwapDiffReport::swapped)
        .def_readonly("diff", &SwapDiffReport::diff)
        .def_readonly("verdict", &SwapDiffReport::verdict);

    py::class_<DeviationEntry>(m, "DeviationEntry")
        .def_readonly("model", &DeviationEntry::model)
        .def_readonly("test_name", &DeviationEntry::test_name)
        .def_readonly("devi", &DeviationEntry::devi);

    py::class_<DeviationReport>(m, "DeviationReport")
        .def_readonly("entries", &DeviationReport::entries);

    py::class_<MisclassProfile>(m, "MisclassProfile")
        .def_readonly("counts", &MisclassProfile::counts)
        .def_readonly("total_misclassified",
                      &MisclassProfile::total_misclassified)
        .def_readonly("fractions", &MisclassProfile::fractions);

    py::class_<FrequentErrorSet>(m, "FrequentErrorSet")
        .def_readonly("ranked", &FrequentErrorSet::ranked)
        .def("ids", &FrequentErrorSet::ids);

    m.def("evaluate", &evaluate, py::arg("corpus"), py::arg("predictions"));
    m.def("swap_diff", &swap_diff, py::arg("original"), py::arg("swapped"),
          py::arg("thresholds") = PatternThresholds{});
    m.def("read_score_table", &read_score_table, py::arg("path"));
    m.def(
        "deviation",
        [](const StressScoreTable& table, bool allow_single_category) {
            return deviation(table, allow_single_category);
        },
        py::arg("table"), py::arg("allow_single_category") = false);
    m.def("confusion_profile", &confusion_profile, py::arg("corpus"),
          py::arg("predictions"));
    m.def("frequent_errors", &frequent_errors, py::arg("corpus"),
          py::arg("log"), py::arg("k") = 400);
    m.def("overlap", &overlap, py::arg("a"), py::arg("b"));

    py::class_<StressScoreTable>(m, "StressScoreTable");
}
