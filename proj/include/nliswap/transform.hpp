#pragma once

#include <set>
#include <string>

#include "nliswap/corpus.hpp"

namespace nliswap {

struct SwapPolicy {
    double fraction = 0.0;
    std::set<Label> eligible = {Label::Contradiction, Label::Neutral};
    std::uint64_t seed = 0;

    void validate() const {
        if (!(fraction >= 0.0 && fraction <= 1.0))
            throw std::invalid_argument("swap fraction must be in [0, 1]");
        if (eligible.empty())
            throw std::invalid_argument("eligible label set must be nonempty");
    }
};

struct SwapMask {
    std::set<std::string> swapped_ids;
    SwapPolicy policy;
};

/// Exchanges premise and hypothesis; id, gold and genre are untouched.
NliPair swap_pair(const NliPair& pair);

/// Evaluation swap: every pair swapped regardless of label, order preserved.
Corpus swap_all(const Corpus& corpus);

/// Training swap: exactly floor(fraction * count_eligible) eligible pairs
/// are swapped, chosen as the first k entries of a seeded Fisher-Yates
/// permutation of the eligible indices (splitmix64, seeded by policy.seed
/// alone). The selection is computed sequentially so the mask never depends
/// on scheduling.
std::pair<Corpus, SwapMask> swap_fraction(const Corpus& corpus,
                                          const SwapPolicy& policy);

// jsonl: a header object carrying the policy, then one JSON string per
// swapped id, sorted.
void write_swap_mask(const SwapMask& mask, const std::string& path);
SwapMask read_swap_mask(const std::string& path);

}  // namespace nliswap
