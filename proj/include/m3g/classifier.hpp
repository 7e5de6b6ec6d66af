#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "m3g/corpus.hpp"
#include "m3g/embedding_store.hpp"
#include "m3g/knn.hpp"
#include "m3g/model.hpp"
#include "m3g/pca.hpp"

namespace m3g::retrieval {

enum class Modality { image_image, image_text };

Modality modality_from_string(const std::string& s);
std::string to_string(Modality m);

struct RetrievalConfig {
    int k = 5;
    Modality modality = Modality::image_image;
    bool pca = false;
    int pca_components = 50;
    bool use_augmented_variants = false;
    uint64_t seed = 0;

    // Cosine on unit-norm projections in raw space; euclidean after PCA
    // (PCA breaks the unit norm).
    Metric metric() const { return pca ? Metric::euclidean : Metric::cosine; }
};

// Reference side of retrieval, projected into the joint space (and into PCA
// space when enabled). Build once, classify many cases against it.
struct RetrievalIndex {
    std::vector<std::string> ids;
    Eigen::MatrixXd rows;
    std::map<std::string, std::string> labels; // reference id -> label
    PcaModel pca;      // fitted on the reference rows when cfg.pca is on
    bool pca_on = false;
    Metric metric = Metric::cosine;
    int effective_k = 5;

    // Projects a raw query feature vector the same way the reference rows
    // were prepared (image head, then PCA transform when enabled).
    Eigen::VectorXd prepare_query(const train::JointEmbeddingModel& model,
                                  const Eigen::VectorXd& raw_image_feature) const;
};

// `labels` picks which rows of the reference matrix participate: for
// image_image the labeled training images, for image_text the label texts
// (typically id == label). PCA is fitted on the selected reference rows only;
// k is clamped to the reference count.
RetrievalIndex build_retrieval_index(const train::JointEmbeddingModel& model,
                                     const store::EmbeddingMatrix& reference_images,
                                     const store::EmbeddingMatrix& reference_texts,
                                     const std::map<std::string, std::string>& labels,
                                     const RetrievalConfig& cfg);

// Projects each case image (with optional seeded variant sampling derived
// from (cfg.seed, encounter_id)), retrieves k neighbours per image, pools all
// retrieved labels, and returns the most frequent one. Ties go to the label
// with the strongest single neighbour score, then lexicographic.
std::string classify_case(const corpus::Case& c, const train::JointEmbeddingModel& model,
                          const store::EmbeddingMatrix& image_features,
                          const RetrievalIndex& index, const RetrievalConfig& cfg);

// Convenience overload matching the one-shot shape: builds the index and
// classifies a single case.
std::string classify_case(const corpus::Case& c, const train::JointEmbeddingModel& model,
                          const store::EmbeddingMatrix& reference_images,
                          const store::EmbeddingMatrix& reference_texts,
                          const std::map<std::string, std::string>& labels,
                          const RetrievalConfig& cfg);

// Fit-and-transform PCA coordinates of every row of a matrix (the label
// embedding map export).
PcaCoordinates export_pca_coordinates(const store::EmbeddingMatrix& embeddings,
                                      int n_components = 2);

} // namespace m3g::retrieval
