#pragma once

#include <array>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "nliswap/corpus.hpp"

namespace nliswap {

struct GeneratorConfig {
    std::size_t n_pairs = 0;
    // probability that a hypothesis carries its label's artifact
    double gamma = 0.0;
    // number of content nouns; hypernym keys first, then filler nouns
    std::size_t content_vocab_size = 12;
    std::vector<std::string> negation_words = {"no", "nobody", "nothing",
                                               "never"};
    // specific -> generic, the entailment artifact
    std::map<std::string, std::string> hypernym_map = {
        {"dog", "animal"},     {"cat", "animal"},   {"guitar", "instrument"},
        {"piano", "instrument"}, {"beach", "outdoors"}, {"garden", "outdoors"},
        {"apple", "food"},     {"bread", "food"}};
    std::vector<std::string> neutral_modifiers = {"yesterday", "nearby",
                                                  "downtown", "twice"};
    std::uint64_t seed = 0;
    // E, C, N priors, indexed by label_index
    std::array<double, 3> label_distribution = {1.0 / 3, 1.0 / 3, 1.0 / 3};

    void validate() const;
};

struct GeneratedCorpus {
    Corpus corpus;
    std::unordered_map<std::string, bool> artifact_flags;
};

/// Premises are "DET NOUN VERB [ADVERB]" over the content vocabulary.
/// With probability gamma the hypothesis is planted with the gold label's
/// artifact (Contradiction: a negation word, Entailment: the premise noun
/// replaced by its hypernym, Neutral: an appended modifier); otherwise it
/// is a fresh label-independent sentence containing no artifact token.
/// Deterministic given config.seed.
GeneratedCorpus generate(const GeneratorConfig& config);

/// Closed-form accuracy of the Bayes-optimal hypothesis-only classifier on
/// the generated distribution, per label:
///   bound[l] = gamma + (1 - gamma) * prior[l]
/// (an artifact token identifies the label exactly; otherwise the fallback
/// prediction is drawn from the label prior). Requires the three artifact
/// token sets to be mutually disjoint.
std::array<double, 3> bayes_accuracy_bound(const GeneratorConfig& config);

/// Writes the corpus as snli-jsonl plus "<path>.meta.json" holding the
/// config and the artifact flags.
void write_generated(const GeneratedCorpus& gen, const GeneratorConfig& config,
                     const std::string& path);

}  // namespace nliswap
