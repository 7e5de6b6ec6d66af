#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "m3g/bleu.hpp"

namespace m3g::corpus {

struct ReferenceResponse {
    std::string text;
    int author_rank = 0;      // 0 = most senior
    int validation_level = 0; // parsed and stored; no documented semantics
    double weight = 1.0;      // derived, not stored in input files
};

struct Case {
    std::string encounter_id;
    std::vector<std::string> image_ids;
    std::string query_text;
    std::string language = "en";
    std::vector<ReferenceResponse> responses;
    std::optional<std::string> gold_label;
};

enum class Split { train, validation, test };

Split split_from_string(const std::string& s);
std::string to_string(Split s);

struct WeightOptions {
    // weight = alpha * seniority + (1 - alpha) * frequency, where
    // seniority = 1 / (1 + author_rank) and frequency is the response's
    // duplicate count over the sibling maximum. The organizers' exact scheme
    // is unpublished; alpha is configurable so it can be matched later.
    double alpha = 0.5;
    // Optional per-validation-level multiplier, default 1.0 for every level.
    std::map<int, double> validation_level_factor;
};

// Line-delimited JSON, one case per line. Malformed records raise DataError
// naming the offending line; nothing is skipped silently.
std::vector<Case> load_dataset(const std::string& path, Split split);
void save_dataset(const std::vector<Case>& cases, const std::string& path);

double derive_reference_weight(const ReferenceResponse& response,
                               const std::vector<ReferenceResponse>& siblings,
                               const WeightOptions& options = {});

// Fills every response's weight in place.
void apply_reference_weights(Case& c, const WeightOptions& options = {});

// Tokenized weighted references for scoring, in response order.
eval::WeightedReferenceSet weighted_references(const Case& c, const WeightOptions& options = {});

class DiseaseDictionary {
  public:
    void insert(const std::string& raw_label); // normalizes; rejects empty
    bool contains(const std::string& normalized) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    // normalized entry -> tokenized form, deterministically ordered.
    const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

    void save(const std::string& path) const; // one normalized entry per line
    static DiseaseDictionary load(const std::string& path);

  private:
    std::map<std::string, std::vector<std::string>> entries_;
};

// Entries are the normalized gold labels of the given cases. Errors if no
// case carries a gold label (label extraction has to run first).
DiseaseDictionary build_disease_dictionary(const std::vector<Case>& cases);

} // namespace m3g::corpus
