#include "nliswap/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "nliswap/rng.hpp"

namespace nliswap {

using nlohmann::json;

void TrainConfig::validate() const {
    if (epochs == 0 || batch_size == 0 || embedding_dim == 0)
        throw std::invalid_argument(
            "epochs, batch_size and embedding_dim must be positive");
    if (!(learning_rate >= 0.0))
        throw std::invalid_argument("learning_rate must be nonnegative");
    if (!(l2 >= 0.0)) throw std::invalid_argument("l2 must be nonnegative");
}

Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_freq) {
    std::map<std::string, std::size_t> counts;
    for (const auto& pair : corpus.pairs) {
        for (const auto& tok : tokenize(pair.premise)) ++counts[tok];
        for (const auto& tok : tokenize(pair.hypothesis)) ++counts[tok];
    }
    Vocabulary vocab;
    // std::map iteration is lexicographic, so indices are deterministic
    for (const auto& [tok, n] : counts)
        if (n >= min_freq) vocab.index.emplace(tok, vocab.size++);
    return vocab;
}

EmbeddingMatrix init_embedding(std::size_t rows, std::size_t dim,
                               std::uint64_t seed) {
    EmbeddingMatrix emb;
    emb.rows = rows;
    emb.dim = dim;
    emb.data.resize(rows * dim);
    SplitMix64 rng(seed);
    for (auto& x : emb.data) x = (rng.unit() * 2.0 - 1.0) * 0.1;
    return emb;
}

namespace {

std::vector<std::size_t> token_rows(const std::string& text,
                                    const Vocabulary& vocab) {
    std::vector<std::size_t> rows;
    for (const auto& tok : tokenize(text)) rows.push_back(vocab.lookup(tok));
    if (rows.empty()) rows.push_back(0);  // unknown-token fallback
    return rows;
}

std::vector<double> mean_embedding(const std::vector<std::size_t>& rows,
                                   const EmbeddingMatrix& emb) {
    std::vector<double> mean(emb.dim, 0.0);
    for (const auto r : rows) {
        const double* row = emb.row(r);
        for (std::size_t j = 0; j < emb.dim; ++j) mean[j] += row[j];
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (auto& x : mean) x *= inv;
    return mean;
}

std::vector<double> features_from_rows(const std::vector<std::size_t>& prem,
                                       const std::vector<std::size_t>& hyp,
                                       const LinearModel& model) {
    const auto& emb = model.embedding;
    if (model.mode == FeatureMode::HypothesisOnly)
        return mean_embedding(hyp, emb);
    const auto u = mean_embedding(prem, emb);
    const auto v = mean_embedding(hyp, emb);
    std::vector<double> x(4 * emb.dim);
    for (std::size_t j = 0; j < emb.dim; ++j) {
        x[j] = u[j];
        x[emb.dim + j] = v[j];
        x[2 * emb.dim + j] = u[j] * v[j];
        x[3 * emb.dim + j] = std::abs(u[j] - v[j]);
    }
    return x;
}

std::array<double, 3> softmax_probs(const LinearModel& model,
                                    const std::vector<double>& x) {
    std::array<double, 3> logits = model.bias;
    for (std::size_t j = 0; j < x.size(); ++j)
        for (std::size_t c = 0; c < 3; ++c)
            logits[c] += model.weights[j * 3 + c] * x[j];
    const double m = std::max({logits[0], logits[1], logits[2]});
    std::array<double, 3> p;
    double z = 0.0;
    for (std::size_t c = 0; c < 3; ++c) z += p[c] = std::exp(logits[c] - m);
    for (auto& v : p) v /= z;
    return p;
}

struct Gradients {
    std::vector<double> weights;
    std::array<double, 3> bias = {0, 0, 0};
    std::vector<double> embedding;
};

// batch-mean cross-entropy + l2 * sum(W^2); fills grads when non-null
double loss_and_grads(const LinearModel& model,
                      const std::vector<NliPair>& batch, double l2,
                      Gradients* grads) {
    if (batch.empty()) throw std::invalid_argument("batch must be nonempty");
    const auto& emb = model.embedding;
    const std::size_t d = emb.dim;
    if (grads) {
        grads->weights.assign(model.weights.size(), 0.0);
        grads->bias = {0, 0, 0};
        grads->embedding.assign(emb.data.size(), 0.0);
    }
    double total_ce = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (const auto& pair : batch) {
        const auto prem = token_rows(pair.premise, model.vocab);
        const auto hyp = token_rows(pair.hypothesis, model.vocab);
        const auto x = features_from_rows(prem, hyp, model);
        const auto p = softmax_probs(model, x);
        const auto gold = label_index(pair.gold);
        total_ce += -std::log(std::max(p[gold], 1e-300));
        if (!grads) continue;

        std::array<double, 3> dlogit;
        for (std::size_t c = 0; c < 3; ++c)
            dlogit[c] = (p[c] - (c == gold ? 1.0 : 0.0)) * inv_batch;
        std::vector<double> dx(x.size(), 0.0);
        for (std::size_t j = 0; j < x.size(); ++j) {
            for (std::size_t c = 0; c < 3; ++c) {
                grads->weights[j * 3 + c] += x[j] * dlogit[c];
                dx[j] += model.weights[j * 3 + c] * dlogit[c];
            }
        }
        for (std::size_t c = 0; c < 3; ++c) grads->bias[c] += dlogit[c];

        if (model.mode == FeatureMode::HypothesisOnly) {
            const double inv = 1.0 / static_cast<double>(hyp.size());
            for (const auto r : hyp)
                for (std::size_t j = 0; j < d; ++j)
                    grads->embedding[r * d + j] += dx[j] * inv;
        } else {
            const auto u = mean_embedding(prem, emb);
            const auto v = mean_embedding(hyp, emb);
            std::vector<double> du(d), dv(d);
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = u[j] - v[j];
                const double s = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
                du[j] = dx[j] + dx[2 * d + j] * v[j] + dx[3 * d + j] * s;
                dv[j] = dx[d + j] + dx[2 * d + j] * u[j] - dx[3 * d + j] * s;
            }
            const double inv_p = 1.0 / static_cast<double>(prem.size());
            const double inv_h = 1.0 / static_cast<double>(hyp.size());
            for (const auto r : prem)
                for (std::size_t j = 0; j < d; ++j)
                    grads->embedding[r * d + j] += du[j] * inv_p;
            for (const auto r : hyp)
                for (std::size_t j = 0; j < d; ++j)
                    grads->embedding[r * d + j] += dv[j] * inv_h;
        }
    }
    double reg = 0.0;
    for (const auto w : model.weights) reg += w * w;
    if (grads)
        for (std::size_t j = 0; j < model.weights.size(); ++j)
            grads->weights[j] += 2.0 * l2 * model.weights[j];
    return total_ce * inv_batch + l2 * reg;
}

}  // namespace

std::vector<double> featurize(const NliPair& pair, const LinearModel& model) {
    return features_from_rows(token_rows(pair.premise, model.vocab),
                              token_rows(pair.hypothesis, model.vocab), model);
}

double loss(const LinearModel& model, const std::vector<NliPair>& batch,
            double l2) {
    return loss_and_grads(model, batch, l2, nullptr);
}

LinearModel train(const Corpus& corpus, FeatureMode mode,
                  const TrainConfig& config, const Corpus* heldout,
                  PredictionLog* log) {
    config.validate();
    if (corpus.pairs.empty())
        throw std::invalid_argument("training corpus is empty");
    std::array<bool, 3> present = {false, false, false};
    for (const auto& pair : corpus.pairs) present[label_index(pair.gold)] = true;
    for (const auto l : kAllLabels)
        if (!present[label_index(l)])
            throw std::invalid_argument("label \"" + label_name(l) +
                                        "\" is absent from the training data");

    LinearModel model;
    model.mode = mode;
    model.vocab = build_vocabulary(corpus);
    model.embedding =
        init_embedding(model.vocab.size, config.embedding_dim, config.seed);
    model.weights.assign(model.feature_dim() * 3, 0.0);

    // separate stream from the embedding init
    SplitMix64 shuffle_rng(config.seed ^ 0x5851F42D4C957F2DULL);
    std::vector<std::size_t> order(corpus.pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Gradients grads;
    std::vector<NliPair> batch;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += config.batch_size) {
            const std::size_t end =
                std::min(start + config.batch_size, order.size());
            batch.clear();
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(corpus.pairs[order[i]]);
            loss_and_grads(model, batch, config.l2, &grads);
            const double lr = config.learning_rate;
            for (std::size_t j = 0; j < model.weights.size(); ++j)
                model.weights[j] -= lr * grads.weights[j];
            for (std::size_t c = 0; c < 3; ++c)
                model.bias[c] -= lr * grads.bias[c];
            for (std::size_t j = 0; j < model.embedding.data.size(); ++j)
                model.embedding.data[j] -= lr * grads.embedding[j];
        }
        if (heldout && log) {
            auto preds = predict(model, *heldout);
            preds.model_name = "epoch-" + std::to_string(epoch + 1);
            log->epochs.push_back(std::move(preds));
        }
    }
    return model;
}

PredictionSet predict(const LinearModel& model, const Corpus& corpus) {
    PredictionSet preds;
    preds.model_name = model.mode == FeatureMode::HypothesisOnly
                           ? "hypothesis-only"
                           : "cbow-pair";
    for (const auto& pair : corpus.pairs) {
        const auto p = softmax_probs(model, featurize(pair, model));
        // strict > keeps the first maximum, giving tie-break order E < C < N
        std::size_t best = 0;
        for (std::size_t c = 1; c < 3; ++c)
            if (p[c] > p[best]) best = c;
        preds.entries.emplace(pair.id, static_cast<Label>(best));
    }
    return preds;
}

double gradient_check(const LinearModel& model,
                      const std::vector<NliPair>& batch, double l2) {
    LinearModel m = model;
    Gradients grads;
    loss_and_grads(m, batch, l2, &grads);

    const double h = 1e-3;
    // the |u - v| feature block is nondifferentiable where u[j] == v[j];
    // a central difference that steps across that kink is meaningless, so
    // embedding coordinates within reach of a kink are not compared
    // (perturbing one embedding entry moves u[j] - v[j] by at most h)
    std::vector<bool> near_kink(m.embedding.dim, false);
    if (m.mode == FeatureMode::CbowPair) {
        for (const auto& pair : batch) {
            const auto u = mean_embedding(token_rows(pair.premise, m.vocab),
                                          m.embedding);
            const auto v = mean_embedding(token_rows(pair.hypothesis, m.vocab),
                                          m.embedding);
            for (std::size_t j = 0; j < m.embedding.dim; ++j) {
                const double gap = std::abs(u[j] - v[j]);
                if (gap > 0.0 && gap < 1.5 * h) near_kink[j] = true;
            }
        }
    }
    double max_rel = 0.0;
    auto check_param = [&](double& theta, double analytic) {
        const double saved = theta;
        theta = saved + h;
        const double lp = loss_and_grads(m, batch, l2, nullptr);
        theta = saved - h;
        const double lm = loss_and_grads(m, batch, l2, nullptr);
        theta = saved;
        const double numeric = (lp - lm) / (2.0 * h);
        const double rel = std::abs(analytic - numeric) /
                           std::max(1e-3, std::abs(analytic) + std::abs(numeric));
        max_rel = std::max(max_rel, rel);
    };
    for (std::size_t j = 0; j < m.weights.size(); ++j)
        check_param(m.weights[j], grads.weights[j]);
    for (std::size_t c = 0; c < 3; ++c) check_param(m.bias[c], grads.bias[c]);
    for (std::size_t j = 0; j < m.embedding.data.size(); ++j) {
        if (near_kink[j % m.embedding.dim]) continue;
        check_param(m.embedding.data[j], grads.embedding[j]);
    }
    return max_rel;
}

namespace {

const char* mode_name(FeatureMode mode) {
    return mode == FeatureMode::HypothesisOnly ? "hypothesis-only"
                                               : "cbow-pair";
}

FeatureMode parse_mode(const std::string& s) {
    if (s == "hypothesis-only") return FeatureMode::HypothesisOnly;
    if (s == "cbow-pair") return FeatureMode::CbowPair;
    throw std::invalid_argument("unknown feature mode: \"" + s + "\"");
}

}  // namespace

void save_model(const LinearModel& model, const TrainConfig& config,
                const std::string& path) {
    json j;
    j["version"] = 1;
    j["feature_mode"] = mode_name(model.mode);
    j["embedding_dim"] = model.embedding.dim;
    // position i holds the token with vocabulary index i + 1
    std::vector<std::string> tokens(model.vocab.size - 1);
    for (const auto& [tok, idx] : model.vocab.index) tokens[idx - 1] = tok;
    j["vocab_tokens"] = tokens;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["embedding"] = model.embedding.data;
    j["train_config"] = {{"epochs", config.epochs},
                         {"learning_rate", config.learning_rate},
                         {"batch_size", config.batch_size},
                         {"l2", config.l2},
                         {"embedding_dim", config.embedding_dim},
                         {"seed", config.seed}};
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot open file for writing: " + path);
    out << j.dump() << '\n';
    if (!out) throw CorpusError("write failed: " + path);
}

LinearModel load_model(const std::string& path, TrainConfig* config) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CorpusError("model file is not valid JSON: " +
                          std::string(e.what()));
    }
    try {
        if (j.at("version").get<int>() != 1)
            throw CorpusError("unsupported model version");
        LinearModel model;
        model.mode = parse_mode(j.at("feature_mode").get<std::string>());
        const auto dim = j.at("embedding_dim").get<std::size_t>();
        const auto tokens = j.at("vocab_tokens").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < tokens.size(); ++i)
            model.vocab.index.emplace(tokens[i], i + 1);
        model.vocab.size = tokens.size() + 1;
        model.embedding.rows = model.vocab.size;
        model.embedding.dim = dim;
        model.embedding.data = j.at("embedding").get<std::vector<double>>();
        model.weights = j.at("weights").get<std::vector<double>>();
        model.bias = j.at("bias").get<std::array<double, 3>>();
        if (model.embedding.data.size() != model.embedding.rows * dim)
            throw CorpusError("embedding array has the wrong length");
        if (model.weights.size() != model.feature_dim() * 3)
            throw CorpusError("weights array has the wrong length");
        if (config) {
            const auto& tc = j.at("train_config");
            config->epochs = tc.at("epochs").get<std::size_t>();
            config->learning_rate = tc.at("learning_rate").get<double>();
            config->batch_size = tc.at("batch_size").get<std::size_t>();
            config->l2 = tc.at("l2").get<double>();
            config->embedding_dim = tc.at("embedding_dim").get<std::size_t>();
            config->seed = tc.at("seed").get<std::uint64_t>();
        }
        return model;
    } catch (const json::exception& e) {
        throw CorpusError("model file schema violation: " +
                          std::string(e.what()));
    } catch (const std::invalid_argument& e) {
        throw CorpusError("model file schema violation: " +
                          std::string(e.what()));
    }
}

}  // namespace nliswap
