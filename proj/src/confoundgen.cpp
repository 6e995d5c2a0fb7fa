#include "nliswap/confoundgen.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "nliswap/rng.hpp"

namespace nliswap {

using nlohmann::json;

namespace {

// fixed structural vocabulary; none of these tokens belong to the default
// artifact sets
const std::vector<std::string> kDeterminers = {"a", "the"};
const std::vector<std::string> kVerbs = {"runs",  "sleeps", "waits",
                                         "plays", "moves",  "turns"};
const std::vector<std::string> kAdverbs = {"quickly", "quietly", "slowly",
                                           "calmly"};

const std::string& pick(SplitMix64& rng, const std::vector<std::string>& v) {
    return v[rng.below(v.size())];
}

Label sample_label(SplitMix64& rng, const std::array<double, 3>& dist) {
    const double u = rng.unit();
    double acc = 0.0;
    for (const auto l : kAllLabels) {
        acc += dist[label_index(l)];
        if (u < acc) return l;
    }
    return Label::Neutral;
}

std::vector<std::string> content_nouns(const GeneratorConfig& config) {
    std::vector<std::string> nouns;
    for (const auto& [specific, generic] : config.hypernym_map) {
        if (nouns.size() >= config.content_vocab_size) break;
        nouns.push_back(specific);
    }
    for (std::size_t i = 1; nouns.size() < config.content_vocab_size; ++i)
        nouns.push_back("thing" + std::to_string(i));
    return nouns;
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

std::array<std::set<std::string>, 3> artifact_token_sets(
    const GeneratorConfig& config) {
    std::array<std::set<std::string>, 3> sets;
    for (const auto& [specific, generic] : config.hypernym_map)
        sets[label_index(Label::Entailment)].insert(generic);
    sets[label_index(Label::Contradiction)]
        .insert(config.negation_words.begin(), config.negation_words.end());
    auto& neutral = sets[label_index(Label::Neutral)];
    for (const auto& modifier : config.neutral_modifiers)
        for (const auto& tok : tokenize(modifier)) neutral.insert(tok);
    return sets;
}

}  // namespace

void GeneratorConfig::validate() const {
    if (n_pairs == 0) throw std::invalid_argument("n_pairs must be positive");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("gamma must be in [0, 1]");
    if (content_vocab_size == 0)
        throw std::invalid_argument("content_vocab_size must be positive");
    if (negation_words.empty() || hypernym_map.empty() ||
        neutral_modifiers.empty())
        throw std::invalid_argument(
            "negation_words, hypernym_map and neutral_modifiers must be "
            "nonempty");
    double sum = 0.0;
    for (const double p : label_distribution) {
        if (p < 0.0)
            throw std::invalid_argument("label_distribution must be >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("label_distribution must sum to 1");
}

GeneratedCorpus generate(const GeneratorConfig& config) {
    config.validate();
    const auto nouns = content_nouns(config);
    SplitMix64 rng(config.seed);
    GeneratedCorpus gen;
    gen.corpus.pairs.reserve(config.n_pairs);

    for (std::size_t i = 0; i < config.n_pairs; ++i) {
        const Label label = sample_label(rng, config.label_distribution);
        const bool plant = rng.unit() < config.gamma;

        const std::string& det = pick(rng, kDeterminers);
        std::string noun = pick(rng, nouns);
        const std::string& verb = pick(rng, kVerbs);
        const std::size_t adv = rng.below(kAdverbs.size() + 1);
        std::vector<std::string> premise = {det, noun, verb};
        if (adv < kAdverbs.size()) premise.push_back(kAdverbs[adv]);

        if (plant && label == Label::Entailment &&
            !config.hypernym_map.count(noun)) {
            // the entailment artifact needs a premise noun with a hypernym
            bool found = false;
            for (int retry = 0; retry < 64; ++retry) {
                noun = pick(rng, nouns);
                if (config.hypernym_map.count(noun)) {
                    found = true;
                    break;
                }
            }
            if (!found)
                throw std::runtime_error(
                    "could not sample a premise noun covered by hypernym_map");
            premise[1] = noun;
        }

        std::vector<std::string> hypothesis;
        if (plant) {
            switch (label) {
                case Label::Entailment:
                    hypothesis = {det, config.hypernym_map.at(noun), verb};
                    break;
                case Label::Contradiction:
                    hypothesis = {det, noun, pick(rng, config.negation_words),
                                  verb};
                    break;
                case Label::Neutral: {
                    hypothesis = {pick(rng, kDeterminers), pick(rng, nouns),
                                  pick(rng, kVerbs)};
                    for (const auto& tok :
                         tokenize(pick(rng, config.neutral_modifiers)))
                        hypothesis.push_back(tok);
                    break;
                }
            }
        } else {
            // label-independent, artifact-free sentence
            hypothesis = {pick(rng, kDeterminers), pick(rng, nouns),
                          pick(rng, kVerbs)};
            const std::size_t adv2 = rng.below(kAdverbs.size() + 1);
            if (adv2 < kAdverbs.size()) hypothesis.push_back(kAdverbs[adv2]);
        }

        NliPair pair;
        pair.id = "gen-" + std::to_string(i + 1);
        pair.premise = join(premise);
        pair.hypothesis = join(hypothesis);
        pair.gold = label;
        gen.artifact_flags[pair.id] = plant;
        gen.corpus.pairs.push_back(std::move(pair));
    }
    return gen;
}

std::array<double, 3> bayes_accuracy_bound(const GeneratorConfig& config) {
    config.validate();
    const auto sets = artifact_token_sets(config);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = a + 1; b < 3; ++b)
            for (const auto& tok : sets[a])
                if (sets[b].count(tok))
                    throw std::invalid_argument(
                        "artifact token sets overlap on \"" + tok +
                        "\"; the Bayes bound is not valid");
    std::array<double, 3> bound;
    for (const auto l : kAllLabels) {
        const auto i = label_index(l);
        bound[i] = config.gamma +
                   (1.0 - config.gamma) * config.label_distribution[i];
    }
    return bound;
}

namespace {

json config_json(const GeneratorConfig& config) {
    json j;
    j["n_pairs"] = config.n_pairs;
    j["gamma"] = config.gamma;
    j["content_vocab_size"] = config.content_vocab_size;
    j["negation_words"] = config.negation_words;
    j["hypernym_map"] = config.hypernym_map;
    j["neutral_modifiers"] = config.neutral_modifiers;
    j["seed"] = config.seed;
    j["label_distribution"] = config.label_distribution;
    return j;
}

}  // namespace

void write_generated(const GeneratedCorpus& gen, const GeneratorConfig& config,
                     const std::string& path) {
    write_corpus(gen.corpus, path, CorpusFormat::SnliJsonl);
    json meta;
    meta["version"] = 1;
    meta["config"] = config_json(config);
    // json objects dump with sorted keys, so the sidecar is byte-stable
    json flags = json::object();
    for (const auto& pair : gen.corpus.pairs)
        flags[pair.id] = gen.artifact_flags.at(pair.id);
    meta["artifact_flags"] = std::move(flags);
    std::ofstream out(path + ".meta.json");
    if (!out)
        throw CorpusError("cannot open file for writing: " + path +
                          ".meta.json");
    out << meta.dump(2) << '\n';
    if (!out) throw CorpusError("write failed: " + path + ".meta.json");
}

}  // namespace nliswap
