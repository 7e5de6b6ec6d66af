#include "m3g/classifier.hpp"

#include <algorithm>

#include "m3g/errors.hpp"
#include "m3g/rng.hpp"

namespace m3g::retrieval {

Modality modality_from_string(const std::string& s) {
    if (s == "image-image" || s == "image_image") return Modality::image_image;
    if (s == "image-text" || s == "image_text") return Modality::image_text;
    throw ConfigError("unknown modality '" + s + "' (expected image-image|image-text)");
}

std::string to_string(Modality m) {
    return m == Modality::image_image ? "image-image" : "image-text";
}

namespace {

Eigen::VectorXd to_double(std::span<const float> row) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) v[static_cast<Eigen::Index>(i)] = row[i];
    return v;
}

} // namespace

Eigen::VectorXd RetrievalIndex::prepare_query(const train::JointEmbeddingModel& model,
                                              const Eigen::VectorXd& raw_image_feature) const {
    Eigen::VectorXd q = train::project(model.image_head, raw_image_feature);
    if (pca_on) q = pca.transform(q);
    return q;
}

RetrievalIndex build_retrieval_index(const train::JointEmbeddingModel& model,
                                     const store::EmbeddingMatrix& reference_images,
                                     const store::EmbeddingMatrix& reference_texts,
                                     const std::map<std::string, std::string>& labels,
                                     const RetrievalConfig& cfg) {
    if (labels.empty()) throw DataError("retrieval index: empty reference set");
    if (cfg.k < 1) throw ConfigError("retrieval k must be >= 1");

    const bool image_side = cfg.modality == Modality::image_image;
    const store::EmbeddingMatrix& source = image_side ? reference_images : reference_texts;
    const train::ProjectionHead& head = image_side ? model.image_head : model.text_head;

    RetrievalIndex index;
    index.labels = labels;
    index.rows.resize(static_cast<Eigen::Index>(labels.size()), head.out_dim());
    Eigen::Index r = 0;
    for (const auto& [id, _] : labels) {
        index.ids.push_back(id);
        index.rows.row(r++) = train::project(head, to_double(source.row(id))).transpose();
    }

    index.pca_on = cfg.pca;
    index.metric = cfg.metric();
    if (cfg.pca) {
        index.pca = fit_pca(index.rows, cfg.pca_components);
        index.rows = index.pca.transform_rows(index.rows);
    }
    index.effective_k = std::min<int>(cfg.k, static_cast<int>(index.ids.size()));
    return index;
}

std::string classify_case(const corpus::Case& c, const train::JointEmbeddingModel& model,
                          const store::EmbeddingMatrix& image_features,
                          const RetrievalIndex& index, const RetrievalConfig& cfg) {
    if (index.ids.empty()) throw DataError("classify_case: empty reference index");
    if (c.image_ids.empty()) throw DataError("classify_case: case has no images");

    // Per-case stream so parallel case order cannot change the draws.
    Rng case_rng(fnv1a64(c.encounter_id, mix_seed(cfg.seed, "classify/variant")));
    const auto mode = cfg.use_augmented_variants ? store::VariantMode::sample_variant
                                                 : store::VariantMode::base_only;

    struct LabelStats {
        int count = 0;
        double best = 0.0;
        bool has_best = false;
    };
    std::map<std::string, LabelStats> pooled;
    const bool higher_better = index.metric == Metric::cosine;

    for (const auto& image_id : c.image_ids) {
        const Eigen::VectorXd raw = to_double(store::get_vector(image_features, image_id, mode,
                                                                case_rng));
        const Eigen::VectorXd q = index.prepare_query(model, raw);
        for (const auto& nb : knn(q, index.rows, index.ids, index.effective_k, index.metric)) {
            const auto& label = index.labels.at(nb.id);
            auto& stats = pooled[label];
            stats.count += 1;
            if (!stats.has_best || (higher_better ? nb.score > stats.best : nb.score < stats.best)) {
                stats.best = nb.score;
                stats.has_best = true;
            }
        }
    }

    // Most frequent label; ties to the strongest single neighbour, then
    // lexicographic (the map iteration order makes the final tie stable).
    std::string winner;
    const LabelStats* winner_stats = nullptr;
    for (const auto& [label, stats] : pooled) {
        if (!winner_stats || stats.count > winner_stats->count ||
            (stats.count == winner_stats->count &&
             (higher_better ? stats.best > winner_stats->best : stats.best < winner_stats->best))) {
            winner = label;
            winner_stats = &stats;
        }
    }
    return winner;
}

std::string classify_case(const corpus::Case& c, const train::JointEmbeddingModel& model,
                          const store::EmbeddingMatrix& reference_images,
                          const store::EmbeddingMatrix& reference_texts,
                          const std::map<std::string, std::string>& labels,
                          const RetrievalConfig& cfg) {
    const RetrievalIndex index =
        build_retrieval_index(model, reference_images, reference_texts, labels, cfg);
    return classify_case(c, model, reference_images, index, cfg);
}

PcaCoordinates export_pca_coordinates(const store::EmbeddingMatrix& embeddings, int n_components) {
    if (embeddings.rows() < 2) throw DataError("export_pca_coordinates: need at least 2 rows");
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(embeddings.rows()), embeddings.dim);
    for (std::size_t i = 0; i < embeddings.rows(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) = to_double(embeddings.row(i)).transpose();

    const PcaModel model = fit_pca(rows, n_components);
    PcaCoordinates coords;
    coords.ids = embeddings.ids;
    coords.coords = model.transform_rows(rows);
    return coords;
}

} // namespace m3g::retrieval
