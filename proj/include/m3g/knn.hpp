#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace m3g::retrieval {

enum class Metric { cosine, euclidean };

struct Neighbor {
    std::string id;
    double score; // cosine similarity or euclidean distance
};

// Exact top-k by full scan. Cosine results are sorted by descending
// similarity, euclidean by ascending distance; exact score ties break
// toward the lexicographically smaller id.
std::vector<Neighbor> knn(const Eigen::VectorXd& query, const Eigen::MatrixXd& reference_rows,
                          const std::vector<std::string>& reference_ids, int k, Metric metric);

} // namespace m3g::retrieval
