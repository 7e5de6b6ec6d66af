#include "m3g/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "m3g/errors.hpp"
#include "m3g/text.hpp"

namespace m3g::corpus {

using nlohmann::json;

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "validation") return Split::validation;
    if (s == "test") return Split::test;
    throw ConfigError("unknown split '" + s + "' (expected train|validation|test)");
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "?";
}

namespace {

[[noreturn]] void line_error(std::size_t line_no, const std::string& msg) {
    throw DataError("line " + std::to_string(line_no) + ": " + msg);
}

void check_known_keys(const json& record, std::size_t line_no) {
    static const std::unordered_set<std::string> known = {
        "encounter_id", "image_ids", "query_text", "language", "responses", "gold_label"};
    for (const auto& [key, _] : record.items())
        if (!known.count(key)) line_error(line_no, "unknown field '" + key + "'");
}

Case parse_case(const json& record, std::size_t line_no, Split split) {
    if (!record.is_object()) line_error(line_no, "record is not a JSON object");
    check_known_keys(record, line_no);

    Case c;
    if (!record.contains("encounter_id") || !record["encounter_id"].is_string() ||
        record["encounter_id"].get<std::string>().empty())
        line_error(line_no, "record missing encounter_id");
    c.encounter_id = record["encounter_id"].get<std::string>();

    if (!record.contains("image_ids") || !record["image_ids"].is_array())
        line_error(line_no, "record missing image_ids");
    for (const auto& id : record["image_ids"]) {
        if (!id.is_string() || id.get<std::string>().empty())
            line_error(line_no, "image_ids entries must be non-empty strings");
        c.image_ids.push_back(id.get<std::string>());
    }
    if (c.image_ids.empty()) line_error(line_no, "image_ids is empty (a case needs at least one image)");

    if (!record.contains("query_text") || !record["query_text"].is_string())
        line_error(line_no, "record missing query_text");
    c.query_text = record["query_text"].get<std::string>();

    if (!record.contains("language") || !record["language"].is_string())
        line_error(line_no, "record missing language");
    c.language = record["language"].get<std::string>();

    if (!record.contains("responses") || !record["responses"].is_array())
        line_error(line_no, "record missing responses");
    for (const auto& r : record["responses"]) {
        if (!r.is_object()) line_error(line_no, "responses entries must be objects");
        ReferenceResponse resp;
        if (!r.contains("text") || !r["text"].is_string() || r["text"].get<std::string>().empty())
            line_error(line_no, "response text must be a non-empty string");
        resp.text = r["text"].get<std::string>();
        if (!r.contains("author_rank") || !r["author_rank"].is_number_integer())
            line_error(line_no, "response missing integer author_rank");
        resp.author_rank = r["author_rank"].get<int>();
        if (resp.author_rank < 0) line_error(line_no, "author_rank must be >= 0");
        if (!r.contains("validation_level") || !r["validation_level"].is_number_integer())
            line_error(line_no, "response missing integer validation_level");
        resp.validation_level = r["validation_level"].get<int>();
        for (const auto& [key, _] : r.items())
            if (key != "text" && key != "author_rank" && key != "validation_level")
                line_error(line_no, "unknown response field '" + key + "'");
        c.responses.push_back(std::move(resp));
    }
    if (c.responses.empty() && split != Split::test)
        line_error(line_no, "responses must be non-empty for " + to_string(split) + " split");

    if (record.contains("gold_label")) {
        if (!record["gold_label"].is_string()) line_error(line_no, "gold_label must be a string");
        c.gold_label = record["gold_label"].get<std::string>();
    }
    return c;
}

} // namespace

std::vector<Case> load_dataset(const std::string& path, Split split) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);

    std::vector<Case> cases;
    std::unordered_map<std::string, std::size_t> seen; // encounter_id -> line
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) line_error(line_no, "blank line in dataset");
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            line_error(line_no, std::string("invalid JSON: ") + e.what());
        }
        Case c = parse_case(record, line_no, split);
        auto [it, inserted] = seen.emplace(c.encounter_id, line_no);
        if (!inserted)
            line_error(line_no, "duplicate encounter_id '" + c.encounter_id + "' (first seen on line " +
                                    std::to_string(it->second) + ")");
        cases.push_back(std::move(c));
    }
    return cases;
}

void save_dataset(const std::vector<Case>& cases, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file: " + path);
    for (const auto& c : cases) {
        json record;
        record["encounter_id"] = c.encounter_id;
        record["image_ids"] = c.image_ids;
        record["query_text"] = c.query_text;
        record["language"] = c.language;
        json responses = json::array();
        for (const auto& r : c.responses)
            responses.push_back({{"text", r.text},
                                 {"author_rank", r.author_rank},
                                 {"validation_level", r.validation_level}});
        record["responses"] = std::move(responses);
        if (c.gold_label) record["gold_label"] = *c.gold_label;
        out << record.dump() << '\n';
    }
}

namespace {

std::string frequency_key(const std::string& response_text) {
    // Frequency ("consistency") counting uses the evaluation tokenizer so
    // that counting and scoring agree on what "identical response" means.
    return text::join(text::tokenize(response_text), " ");
}

} // namespace

double derive_reference_weight(const ReferenceResponse& response,
                               const std::vector<ReferenceResponse>& siblings,
                               const WeightOptions& options) {
    if (siblings.empty()) throw DataError("derive_reference_weight: empty sibling list");

    std::unordered_map<std::string, int> counts;
    for (const auto& s : siblings) counts[frequency_key(s.text)] += 1;

    auto self = counts.find(frequency_key(response.text));
    if (self == counts.end())
        throw DataError("derive_reference_weight: response is not among its siblings");

    int max_count = 0;
    for (const auto& [_, n] : counts) max_count = std::max(max_count, n);

    const double seniority = 1.0 / (1.0 + response.author_rank);
    const double frequency = static_cast<double>(self->second) / max_count;
    double weight = options.alpha * seniority + (1.0 - options.alpha) * frequency;

    auto factor = options.validation_level_factor.find(response.validation_level);
    if (factor != options.validation_level_factor.end()) weight *= factor->second;
    return std::clamp(weight, 0.0, 1.0);
}

void apply_reference_weights(Case& c, const WeightOptions& options) {
    for (auto& r : c.responses) r.weight = derive_reference_weight(r, c.responses, options);
}

eval::WeightedReferenceSet weighted_references(const Case& c, const WeightOptions& options) {
    eval::WeightedReferenceSet refs;
    refs.reserve(c.responses.size());
    for (const auto& r : c.responses)
        refs.push_back({text::tokenize(r.text), derive_reference_weight(r, c.responses, options)});
    return refs;
}

void DiseaseDictionary::insert(const std::string& raw_label) {
    const std::string normalized = text::normalize_label(raw_label);
    if (normalized.empty())
        throw DataError("disease label '" + raw_label + "' is empty after normalization");
    entries_.emplace(normalized, text::tokenize(normalized));
}

bool DiseaseDictionary::contains(const std::string& normalized) const {
    return entries_.count(normalized) > 0;
}

void DiseaseDictionary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dictionary file: " + path);
    for (const auto& [entry, _] : entries_) out << entry << '\n';
}

DiseaseDictionary DiseaseDictionary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dictionary file: " + path);
    DiseaseDictionary dict;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        dict.insert(line);
    }
    return dict;
}

DiseaseDictionary build_disease_dictionary(const std::vector<Case>& cases) {
    DiseaseDictionary dict;
    bool any_label = false;
    for (const auto& c : cases) {
        if (!c.gold_label) continue;
        any_label = true;
        dict.insert(*c.gold_label);
    }
    if (!any_label)
        throw DataError("no case carries a gold_label; run label extraction before building the "
                        "disease dictionary");
    return dict;
}

} // namespace m3g::corpus
