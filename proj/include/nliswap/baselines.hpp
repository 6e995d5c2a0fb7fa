#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "nliswap/corpus.hpp"

namespace nliswap {

struct Vocabulary {
    // index 0 is reserved for unknown tokens
    std::unordered_map<std::string, std::size_t> index;
    std::size_t size = 1;

    std::size_t lookup(const std::string& token) const {
        auto it = index.find(token);
        return it == index.end() ? 0 : it->second;
    }
};

/// Tokens with frequency >= min_freq, indexed 1.. in lexicographic order.
Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_freq = 1);

struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> data;  // row-major

    double* row(std::size_t r) { return data.data() + r * dim; }
    const double* row(std::size_t r) const { return data.data() + r * dim; }
};

/// Seeded uniform init in [-0.1, 0.1]; row 0 is the unknown-token row.
EmbeddingMatrix init_embedding(std::size_t rows, std::size_t dim,
                               std::uint64_t seed);

enum class FeatureMode { HypothesisOnly, CbowPair };

struct LinearModel {
    FeatureMode mode = FeatureMode::HypothesisOnly;
    Vocabulary vocab;
    EmbeddingMatrix embedding;
    // feature_dim x 3, row-major; feature_dim = dim (HypothesisOnly)
    // or 4*dim (CbowPair)
    std::vector<double> weights;
    std::array<double, 3> bias = {0, 0, 0};

    std::size_t feature_dim() const {
        return mode == FeatureMode::HypothesisOnly ? embedding.dim
                                                   : 4 * embedding.dim;
    }
};

struct TrainConfig {
    std::size_t epochs = 10;
    double learning_rate = 0.05;
    std::size_t batch_size = 32;
    double l2 = 1e-4;
    std::size_t embedding_dim = 50;
    std::uint64_t seed = 0;

    void validate() const;
};

/// HypothesisOnly: mean hypothesis token embedding. CbowPair:
/// [u; v; u*v; |u-v|] with u/v the mean premise/hypothesis embeddings.
/// Text that tokenizes to nothing uses the unknown-token row.
std::vector<double> featurize(const NliPair& pair, const LinearModel& model);

/// Softmax cross-entropy, plain mini-batch gradient descent, embeddings
/// trained jointly. Weights and bias start at zero, the embedding from the
/// seeded init; the per-epoch shuffle is seeded, so equal inputs give
/// bit-identical models. If heldout is non-null, predictions on it are
/// recorded after every epoch into log.
LinearModel train(const Corpus& corpus, FeatureMode mode,
                  const TrainConfig& config, const Corpus* heldout = nullptr,
                  PredictionLog* log = nullptr);

/// Argmax of the softmax logits; ties go to the first label in the fixed
/// order E < C < N.
PredictionSet predict(const LinearModel& model, const Corpus& corpus);

/// Batch-mean cross-entropy + l2 * sum(weights^2).
double loss(const LinearModel& model, const std::vector<NliPair>& batch,
            double l2);

/// Analytic gradient vs central finite differences (step 1e-3) over every
/// weight, bias and embedding entry; returns the max relative error.
/// Embedding coordinates within one step of a |u - v| kink are excluded:
/// the loss is nondifferentiable there and a crossing difference quotient
/// approximates nothing.
double gradient_check(const LinearModel& model,
                      const std::vector<NliPair>& batch, double l2);

// Single JSON document: version, mode, dims, train config, vocabulary and
// row-major parameter arrays.
void save_model(const LinearModel& model, const TrainConfig& config,
                const std::string& path);
LinearModel load_model(const std::string& path, TrainConfig* config = nullptr);

}  // namespace nliswap
