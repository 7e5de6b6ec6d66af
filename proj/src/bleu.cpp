#include "m3g/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "m3g/errors.hpp"

namespace m3g::eval {

namespace {

// n-gram type -> count, keyed by tokens joined with an unlikely separator.
using NgramCounts = std::unordered_map<std::string, double>;

std::string ngram_key(const std::vector<std::string>& tokens, std::size_t start, int n) {
    std::string key;
    for (int j = 0; j < n; ++j) {
        if (j) key.push_back('\x1f');
        key += tokens[start + j];
    }
    return key;
}

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
    NgramCounts counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) counts[ngram_key(tokens, i, n)] += 1.0;
    return counts;
}

double clamp01(double w) { return std::min(1.0, std::max(0.0, w)); }

} // namespace

double brevity_penalty(long hyp_len, long ref_len) {
    if (hyp_len < 1 || ref_len < 1) throw DataError("brevity_penalty requires positive lengths");
    if (hyp_len > ref_len) return 1.0;
    return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

EvalReport delta_bleu(const std::vector<std::vector<std::string>>& hypotheses,
                      const std::vector<WeightedReferenceSet>& references,
                      const BleuOptions& options) {
    if (hypotheses.size() != references.size())
        throw DataError("delta_bleu: hypothesis/reference count mismatch (" +
                        std::to_string(hypotheses.size()) + " vs " +
                        std::to_string(references.size()) + ")");
    const int max_n = options.max_n;
    if (max_n < 1 || max_n > 4) throw ConfigError("delta_bleu: max_n must be in 1..4");

    std::vector<double> numerator(max_n, 0.0), denominator(max_n, 0.0);
    long hyp_len = 0, ref_len = 0;

    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        const auto& hyp = hypotheses[i];
        const auto& refs = references[i];
        if (refs.empty())
            throw DataError("delta_bleu: case " + std::to_string(i) + " has no references");

        hyp_len += static_cast<long>(hyp.size());

        // Effective reference length: closest to the hypothesis, ties shorter.
        long best_len = static_cast<long>(refs[0].tokens.size());
        for (const auto& r : refs) {
            const long len = static_cast<long>(r.tokens.size());
            const long d = std::labs(len - static_cast<long>(hyp.size()));
            const long best_d = std::labs(best_len - static_cast<long>(hyp.size()));
            if (d < best_d || (d == best_d && len < best_len)) best_len = len;
        }
        ref_len += best_len;

        double max_weight = 0.0;
        for (const auto& r : refs) max_weight = std::max(max_weight, clamp01(r.weight));

        for (int n = 1; n <= max_n; ++n) {
            const NgramCounts hyp_counts = count_ngrams(hyp, n);
            if (hyp_counts.empty()) continue;
            std::vector<NgramCounts> ref_counts;
            ref_counts.reserve(refs.size());
            for (const auto& r : refs) ref_counts.push_back(count_ngrams(r.tokens, n));

            for (const auto& [gram, h_count] : hyp_counts) {
                double best = 0.0;
                for (std::size_t r = 0; r < refs.size(); ++r) {
                    auto it = ref_counts[r].find(gram);
                    if (it == ref_counts[r].end()) continue;
                    best = std::max(best, clamp01(refs[r].weight) * std::min(h_count, it->second));
                }
                numerator[n - 1] += best;
                denominator[n - 1] += max_weight * h_count;
            }
        }
    }

    EvalReport report;
    report.hyp_len = hyp_len;
    report.ref_len = ref_len;
    if (hyp_len == 0) return report; // all-empty hypothesis corpus scores zero

    report.bp = ref_len == 0 ? 1.0 : brevity_penalty(hyp_len, ref_len);
    report.ratio = ref_len == 0
                       ? 0.0
                       : static_cast<double>(hyp_len) / static_cast<double>(ref_len);

    double log_sum = 0.0;
    bool zero = false;
    for (int n = 0; n < max_n; ++n) {
        double num = numerator[n];
        if (options.smoothing && denominator[n] > 0.0 && num <= 0.0) num = options.smoothing_eps;
        const double p = denominator[n] > 0.0 ? num / denominator[n] : 0.0;
        report.precisions[n] = p;
        if (p <= 0.0) zero = true;
        else log_sum += std::log(p);
    }
    report.dbleu = zero ? 0.0 : 100.0 * report.bp * std::exp(log_sum / max_n);
    return report;
}

std::string EvalReport::table_line() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.3f %.3f %.3f %ld %ld", dbleu, bp, ratio, hyp_len, ref_len);
    return buf;
}

std::string EvalReport::to_json() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\"bp\": %.17g, \"dbleu\": %.17g, \"hyp_len\": %ld, "
                  "\"precisions\": [%.17g, %.17g, %.17g, %.17g], "
                  "\"ratio\": %.17g, \"ref_len\": %ld}",
                  bp, dbleu, hyp_len, precisions[0], precisions[1], precisions[2], precisions[3],
                  ratio, ref_len);
    return buf;
}

} // namespace m3g::eval
