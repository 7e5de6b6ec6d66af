#include "m3g/knn.hpp"

#include <algorithm>
#include <cmath>

#include "m3g/errors.hpp"

namespace m3g::retrieval {

std::vector<Neighbor> knn(const Eigen::VectorXd& query, const Eigen::MatrixXd& reference_rows,
                          const std::vector<std::string>& reference_ids, int k, Metric metric) {
    const auto n = reference_rows.rows();
    if (n == 0) throw DataError("knn: empty reference set");
    if (static_cast<std::size_t>(n) != reference_ids.size())
        throw DataError("knn: reference ids and rows disagree");
    if (query.size() != reference_rows.cols())
        throw DataError("knn: query dim " + std::to_string(query.size()) +
                        " does not match reference dim " + std::to_string(reference_rows.cols()));
    if (k < 1 || k > n) throw DataError("knn: k must be in [1, reference count]");

    std::vector<Neighbor> all(static_cast<std::size_t>(n));
    const double query_norm = query.norm();
    for (Eigen::Index i = 0; i < n; ++i) {
        double score;
        if (metric == Metric::cosine) {
            const double ref_norm = reference_rows.row(i).norm();
            score = (query_norm == 0.0 || ref_norm == 0.0)
                        ? 0.0
                        : reference_rows.row(i).dot(query.transpose()) / (query_norm * ref_norm);
        } else {
            score = (reference_rows.row(i) - query.transpose()).norm();
        }
        all[static_cast<std::size_t>(i)] = {reference_ids[static_cast<std::size_t>(i)], score};
    }

    const bool descending = metric == Metric::cosine;
    std::sort(all.begin(), all.end(), [descending](const Neighbor& a, const Neighbor& b) {
        if (a.score != b.score) return descending ? a.score > b.score : a.score < b.score;
        return a.id < b.id;
    });
    all.resize(static_cast<std::size_t>(k));
    return all;
}

} // namespace m3g::retrieval
