#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace m3g::retrieval {

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;         // n_components x dim, orthonormal rows
    Eigen::VectorXd explained_variance; // non-increasing

    Eigen::VectorXd transform(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd transform_rows(const Eigen::MatrixXd& rows) const;
};

// Principal axes of the mean-centered rows by descending variance
// (sample covariance, n-1 denominator). Sign convention: the entry of
// largest magnitude in each component is positive. Requires at least two
// rows and n_components <= min(rows, dim).
PcaModel fit_pca(const Eigen::MatrixXd& rows, int n_components);

struct PcaCoordinates {
    std::vector<std::string> ids;
    Eigen::MatrixXd coords; // |ids| x n_components
};

void save_coordinates_csv(const PcaCoordinates& coords, const std::string& path);

} // namespace m3g::retrieval
