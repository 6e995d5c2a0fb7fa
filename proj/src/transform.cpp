#include "nliswap/transform.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "nliswap/rng.hpp"

namespace nliswap {

using nlohmann::json;

NliPair swap_pair(const NliPair& pair) {
    NliPair out = pair;
    std::swap(out.premise, out.hypothesis);
    return out;
}

Corpus swap_all(const Corpus& corpus) {
    Corpus out;
    out.source_path = corpus.source_path;
    out.pairs.reserve(corpus.pairs.size());
    for (const auto& pair : corpus.pairs) out.pairs.push_back(swap_pair(pair));
    return out;
}

std::pair<Corpus, SwapMask> swap_fraction(const Corpus& corpus,
                                          const SwapPolicy& policy) {
    policy.validate();
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i)
        if (policy.eligible.count(corpus.pairs[i].gold)) eligible.push_back(i);

    const auto k = static_cast<std::size_t>(
        std::floor(policy.fraction * static_cast<double>(eligible.size())));
    SplitMix64 rng(policy.seed);
    rng.shuffle(eligible);

    SwapMask mask;
    mask.policy = policy;
    Corpus out = corpus;
    for (std::size_t j = 0; j < k; ++j) {
        auto& pair = out.pairs[eligible[j]];
        pair = swap_pair(pair);
        mask.swapped_ids.insert(pair.id);
    }
    return {std::move(out), std::move(mask)};
}

void write_swap_mask(const SwapMask& mask, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot open file for writing: " + path);
    json header;
    header["fraction"] = mask.policy.fraction;
    header["seed"] = mask.policy.seed;
    json eligible = json::array();
    for (const auto l : mask.policy.eligible) eligible.push_back(label_name(l));
    header["eligible"] = eligible;
    header["swapped_count"] = mask.swapped_ids.size();
    out << header.dump() << '\n';
    for (const auto& id : mask.swapped_ids) out << json(id).dump() << '\n';
    if (!out) throw CorpusError("write failed: " + path);
}

SwapMask read_swap_mask(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw CorpusError("swap mask missing header line: " + path);
    SwapMask mask;
    try {
        const json header = json::parse(line);
        mask.policy.fraction = header.at("fraction").get<double>();
        mask.policy.seed = header.at("seed").get<std::uint64_t>();
        mask.policy.eligible.clear();
        for (const auto& name : header.at("eligible")) {
            const auto l = parse_label(name.get<std::string>());
            if (!l) throw CorpusError("skip token is not a valid label");
            mask.policy.eligible.insert(*l);
        }
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            mask.swapped_ids.insert(json::parse(line).get<std::string>());
        }
    } catch (const json::exception& e) {
        throw CorpusError("malformed swap mask " + path + ": " + e.what());
    }
    return mask;
}

}  // namespace nliswap
