#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nliswap/corpus.hpp"
#include "nliswap/swaplogic.hpp"

namespace nliswap {

struct EvalReport {
    std::array<std::size_t, 3> correct = {0, 0, 0};
    std::array<std::size_t, 3> total = {0, 0, 0};

    double accuracy(Label l) const {
        const auto i = label_index(l);
        return total[i] == 0 ? 0.0
                             : static_cast<double>(correct[i]) /
                                   static_cast<double>(total[i]);
    }
    double overall() const {
        std::size_t c = 0, t = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            c += correct[i];
            t += total[i];
        }
        return t == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(t);
    }
};

struct SwapDiffReport {
    std::array<double, 3> original = {0, 0, 0};
    std::array<double, 3> swapped = {0, 0, 0};
    std::array<double, 3> diff = {0, 0, 0};  // original - swapped
    PatternVerdict verdict;
};

struct RatioEntry {
    StressScoreRow::Category category;
    int fraction_percent;  // 25, 50, 75 or 100
    double ratio;          // S_pc / S_0c
};

struct DeviationEntry {
    std::string model;
    std::string test_name;
    std::vector<RatioEntry> ratios;
    double devi = 0.0;  // sum over ratios of (R - 1)^2
};

struct DeviationReport {
    std::vector<DeviationEntry> entries;
};

// misclassification buckets, gold -> predicted
enum class ConfusionType : int { EtoN = 0, EtoC, NtoE, NtoC, CtoE, CtoN };
inline constexpr std::array<const char*, 6> kConfusionNames = {
    "E->N", "E->C", "N->E", "N->C", "C->E", "C->N"};

struct MisclassProfile {
    std::array<std::size_t, 6> counts = {0, 0, 0, 0, 0, 0};
    std::size_t total_misclassified = 0;
    // absent when there are no misclassifications
    std::optional<std::array<double, 6>> fractions;
};

struct FrequentErrorSet {
    // (id, misclassification count) ranked by count desc, then id asc
    std::vector<std::pair<std::string, std::size_t>> ranked;

    std::set<std::string> ids() const {
        std::set<std::string> out;
        for (const auto& [id, n] : ranked) out.insert(id);
        return out;
    }
};

/// Exact integer counts per label. Every corpus id must have a prediction
/// and vice versa; mismatches raise an error naming up to 10 offenders.
EvalReport evaluate(const Corpus& corpus, const PredictionSet& predictions);

SwapDiffReport swap_diff(const EvalReport& original, const EvalReport& swapped,
                         const PatternThresholds& thresholds = {});

/// Per (model, test): eight ratios R = S_pc / S_0c and their squared
/// deviation from 1. In strict mode both categories must be present;
/// allow_single_category relaxes that to whatever rows exist.
DeviationReport deviation(const StressScoreTable& table,
                          bool allow_single_category = false);

MisclassProfile confusion_profile(const Corpus& corpus,
                                  const PredictionSet& predictions);

/// Counts, per id, the epochs in which the pair was misclassified; returns
/// the top k ever-misclassified ids (count desc, id asc).
FrequentErrorSet frequent_errors(const Corpus& corpus,
                                 const PredictionLog& log, std::size_t k);

std::size_t overlap(const FrequentErrorSet& a, const FrequentErrorSet& b);

// fixture csv for the swap-evaluation table:
// header model,label,split,original,swapped
struct SwapFixtureRow {
    std::string model;
    Label label;
    std::string split;  // "dev" or "test"
    double original = 0, swapped = 0;
};
std::vector<SwapFixtureRow> read_swap_fixture(const std::string& path);

// JSON serializations carry an explicit "version" field.
std::string eval_report_json(const EvalReport& r);
std::string swap_diff_json(const SwapDiffReport& r);
std::string deviation_json(const DeviationReport& r);
std::string swap_diff_text(const SwapDiffReport& r);
std::string deviation_text(const DeviationReport& r);

}  // namespace nliswap
