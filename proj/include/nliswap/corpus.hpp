#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace nliswap {

enum class Label : int { Entailment = 0, Contradiction = 1, Neutral = 2 };

inline constexpr std::array<Label, 3> kAllLabels = {
    Label::Entailment, Label::Contradiction, Label::Neutral};

inline constexpr std::size_t label_index(Label l) {
    return static_cast<std::size_t>(l);
}

/// Parses the lowercase label words; returns nothing for the SNLI
/// no-consensus marker "-". Any other string throws.
std::optional<Label> parse_label(const std::string& s);
const std::string& label_name(Label l);

struct NliPair {
    std::string id;
    std::string premise;
    std::string hypothesis;
    Label gold = Label::Entailment;
    std::optional<std::string> genre;

    bool operator==(const NliPair&) const = default;
};

struct Corpus {
    std::vector<NliPair> pairs;
    std::optional<std::string> source_path;

    std::size_t size() const { return pairs.size(); }
};

struct PredictionSet {
    std::unordered_map<std::string, Label> entries;
    std::string model_name;
};

/// One PredictionSet per training epoch, in epoch order.
struct PredictionLog {
    std::vector<PredictionSet> epochs;
};

struct StressScoreRow {
    std::string model;
    std::string test_name;
    enum class Category { Matched, Mismatched } category = Category::Matched;
    // accuracies in percent, at swap fractions 0/25/50/75/100
    double s0 = 0, s25 = 0, s50 = 0, s75 = 0, s100 = 0;
};

struct StressScoreTable {
    std::vector<StressScoreRow> rows;
};

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CorpusFormat { SnliJsonl, Tsv };

struct LoadedCorpus {
    Corpus corpus;
    std::size_t skipped = 0;  // records without a usable gold label
};

// snli-jsonl: one object per line with gold_label, sentence1, sentence2,
// optional pairID (missing -> "line-<N>"); extra fields ignored.
// tsv: id \t gold \t premise \t hypothesis [\t genre]
LoadedCorpus read_corpus(const std::string& path, CorpusFormat format);
void write_corpus(const Corpus& corpus, const std::string& path,
                  CorpusFormat format);

enum class PredictionFormat { Tsv, Jsonl };

// tsv: id \t label; jsonl: {"pairID": ..., "label": ...}
PredictionSet read_predictions(const std::string& path,
                               PredictionFormat format);
void write_predictions(const PredictionSet& preds, const std::string& path);

// csv with header exactly: model,test,category,s0,s25,s50,s75,s100
StressScoreTable read_score_table(const std::string& path);

/// Lowercase, split on Unicode whitespace, strip leading/trailing ASCII
/// punctuation; empty tokens dropped.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace nliswap
