#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "nliswap/corpus.hpp"

namespace nliswap {

// Whether the gold label is guaranteed to survive exchanging premise and
// hypothesis. Contradiction and Neutral are symmetric relations; Entailment
// is not, so nothing can be said about the swapped pair.
//
// Neutral is treated as Preserved as a working assumption: a hypothesis
// that strictly refines the premise ("I bought books" / "I bought 5 books")
// becomes an entailment after the swap. Callers that care can branch on the
// enum and handle Neutral separately.
enum class Preservation { Preserved, NotDetermined };

inline Preservation preservation_after_swap(Label label) {
    return label == Label::Entailment ? Preservation::NotDetermined
                                      : Preservation::Preserved;
}

struct PatternThresholds {
    double tau_entailment_drop = 0.30;
    double tau_comparable = 0.10;

    void validate() const {
        if (!(tau_entailment_drop > 0 && tau_entailment_drop < 1) ||
            !(tau_comparable > 0 && tau_comparable < 1))
            throw std::invalid_argument("pattern thresholds must be in (0, 1)");
        if (!(tau_comparable < tau_entailment_drop))
            throw std::invalid_argument(
                "tau_comparable must be below tau_entailment_drop");
    }
};

enum class Verdict { Consistent, Suspect };

struct PatternVerdict {
    bool entailment_drop_ok = false;
    bool contradiction_comparable = false;
    bool neutral_comparable = false;
    Verdict overall = Verdict::Suspect;
};

/// diff[l] = accuracy_original - accuracy_swapped (positive = drop),
/// indexed by label_index.
inline PatternVerdict pattern_verdict(const std::array<double, 3>& diff,
                                      const PatternThresholds& t = {}) {
    t.validate();
    PatternVerdict v;
    v.entailment_drop_ok =
        diff[label_index(Label::Entailment)] >= t.tau_entailment_drop;
    v.contradiction_comparable =
        std::abs(diff[label_index(Label::Contradiction)]) <= t.tau_comparable;
    v.neutral_comparable =
        std::abs(diff[label_index(Label::Neutral)]) <= t.tau_comparable;
    v.overall = (v.entailment_drop_ok && v.contradiction_comparable &&
                 v.neutral_comparable)
                    ? Verdict::Consistent
                    : Verdict::Suspect;
    return v;
}

}  // namespace nliswap
