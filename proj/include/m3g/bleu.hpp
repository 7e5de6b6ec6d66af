#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace m3g::eval {

// One reference response, tokenized, with its quality weight in [0, 1].
struct WeightedReference {
    std::vector<std::string> tokens;
    double weight = 1.0;
};

using WeightedReferenceSet = std::vector<WeightedReference>;

struct EvalReport {
    double dbleu = 0.0; // 0..100
    double bp = 0.0;
    double ratio = 0.0;
    long hyp_len = 0;
    long ref_len = 0;
    std::array<double, 4> precisions{0.0, 0.0, 0.0, 0.0};

    // "dBLEU BP Ratio Hyp_len Ref_len", 3 decimal places.
    std::string table_line() const;
    std::string to_json() const;
};

struct BleuOptions {
    int max_n = 4;
    // When enabled, a zero n-gram-match numerator is replaced by eps so that
    // short toy corpora do not collapse the geometric mean to zero.
    bool smoothing = false;
    double smoothing_eps = 1e-9;
};

// exp(1 - ref/hyp) when hyp <= ref, else 1. Errors on non-positive lengths.
double brevity_penalty(long hyp_len, long ref_len);

// Corpus-level weighted multi-reference BLEU. For n-gram type g of
// hypothesis i:
//   numerator   += max over references containing g of
//                  weight * min(count_hyp(g), count_ref(g))
//   denominator += (max reference weight of the case) * count_hyp(g)
// The per-case effective reference length is the one closest to the
// hypothesis length, ties resolved toward the shorter reference. Weights are
// clamped to [0, 1]. Any zero precision yields dbleu = 0 unless smoothing is
// on. An empty hypothesis contributes no matches but still contributes its
// effective reference length.
EvalReport delta_bleu(const std::vector<std::vector<std::string>>& hypotheses,
                      const std::vector<WeightedReferenceSet>& references,
                      const BleuOptions& options = {});

} // namespace m3g::eval
