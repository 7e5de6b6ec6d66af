#include "m3g/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cstdio>
#include <fstream>

#include "m3g/errors.hpp"

namespace m3g::retrieval {

Eigen::VectorXd PcaModel::transform(const Eigen::VectorXd& v) const {
    if (v.size() != mean.size())
        throw DataError("pca transform: vector dim " + std::to_string(v.size()) +
                        " does not match fitted dim " + std::to_string(mean.size()));
    return components * (v - mean);
}

Eigen::MatrixXd PcaModel::transform_rows(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != mean.size()) throw DataError("pca transform: row dim mismatch");
    return (rows.rowwise() - mean.transpose()) * components.transpose();
}

PcaModel fit_pca(const Eigen::MatrixXd& rows, int n_components) {
    const auto n = rows.rows();
    const auto dim = rows.cols();
    if (n_components < 1) throw ConfigError("fit_pca: n_components must be >= 1");
    if (n < 2) throw DataError("fit_pca: need at least 2 rows");
    if (n_components > dim || n_components > n)
        throw DataError("fit_pca: " + std::to_string(n_components) +
                        " components exceed the feasible rank of " + std::to_string(n) + "x" +
                        std::to_string(dim) + " data");

    PcaModel model;
    model.mean = rows.colwise().mean();
    const Eigen::MatrixXd centered = rows.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);

    // Covariance is symmetric; eigenvalues come back ascending.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw DataError("fit_pca: eigendecomposition failed");

    model.components.resize(n_components, dim);
    model.explained_variance.resize(n_components);
    for (int k = 0; k < n_components; ++k) {
        const auto src = dim - 1 - k;
        Eigen::VectorXd axis = solver.eigenvectors().col(src);
        // Deterministic orientation: largest-magnitude entry positive.
        int arg_max = 0;
        for (int i = 1; i < axis.size(); ++i)
            if (std::abs(axis[i]) > std::abs(axis[arg_max])) arg_max = i;
        if (axis[arg_max] < 0.0) axis = -axis;
        model.components.row(k) = axis.transpose();
        model.explained_variance[k] = std::max(0.0, solver.eigenvalues()[src]);
    }
    return model;
}

void save_coordinates_csv(const PcaCoordinates& coords, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write coordinates file: " + path);
    out << "id";
    for (int k = 0; k < coords.coords.cols(); ++k) out << ",pc" << (k + 1);
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < coords.ids.size(); ++i) {
        out << coords.ids[i];
        for (int k = 0; k < coords.coords.cols(); ++k) {
            std::snprintf(buf, sizeof(buf), ",%.17g", coords.coords(static_cast<Eigen::Index>(i), k));
            out << buf;
        }
        out << '\n';
    }
}

} // namespace m3g::retrieval
