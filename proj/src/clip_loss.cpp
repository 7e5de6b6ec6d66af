#include "m3g/clip_loss.hpp"

#include <cmath>

#include "m3g/errors.hpp"

namespace m3g::train {

namespace {

// Row-wise softmax with max subtraction.
Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p = logits;
    for (int i = 0; i < p.rows(); ++i) {
        const double m = p.row(i).maxCoeff();
        p.row(i) = (p.row(i).array() - m).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

double diagonal_cross_entropy(const Eigen::MatrixXd& logits) {
    double total = 0.0;
    for (int i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
        total += lse - logits(i, i);
    }
    return total / logits.rows();
}

} // namespace

ClipLossResult clip_loss(const Eigen::MatrixXd& image_proj, const Eigen::MatrixXd& text_proj,
                         double log_logit_scale) {
    const auto n = image_proj.rows();
    if (n < 1 || text_proj.rows() != n || text_proj.cols() != image_proj.cols())
        throw DataError("clip_loss: projection shape mismatch");
    if (!image_proj.allFinite() || !text_proj.allFinite() || !std::isfinite(log_logit_scale))
        throw DataError("clip_loss: non-finite inputs");

    const double s = std::exp(log_logit_scale);
    const Eigen::MatrixXd logits = s * (image_proj * text_proj.transpose());

    ClipLossResult result;
    result.loss =
        0.5 * (diagonal_cross_entropy(logits) + diagonal_cross_entropy(logits.transpose()));

    const Eigen::MatrixXd p = row_softmax(logits);
    const Eigen::MatrixXd q = row_softmax(logits.transpose()).transpose();
    Eigen::MatrixXd g = (p + q) / (2.0 * static_cast<double>(n));
    g.diagonal().array() -= 1.0 / static_cast<double>(n);

    result.grad_image = s * (g * text_proj);
    result.grad_text = s * (g.transpose() * image_proj);
    result.grad_log_scale = (g.array() * logits.array()).sum();
    return result;
}

} // namespace m3g::train
