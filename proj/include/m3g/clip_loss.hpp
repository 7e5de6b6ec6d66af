#pragma once

#include <Eigen/Core>

namespace m3g::train {

struct ClipLossResult {
    double loss = 0.0;
    Eigen::MatrixXd grad_image; // N x d, d loss / d image_proj
    Eigen::MatrixXd grad_text;  // N x d, d loss / d text_proj
    double grad_log_scale = 0.0;
};

// Symmetric contrastive loss over a batch of unit-norm projections. With
// s = exp(log_logit_scale) and logits L = s * image * text^T, the loss is the
// mean of row-wise and column-wise softmax cross entropy against the
// diagonal, averaged over the two directions. Gradients are analytic:
//   dLoss/dL_ij = ((P_ij - I_ij) + (Q_ij - I_ij)) / (2N)
// with P the row softmax and Q the column softmax, and
//   dLoss/dimage = s * G * text,  dLoss/dtext = s * G^T * image,
//   dLoss/dlog_s = sum_ij G_ij * L_ij.
ClipLossResult clip_loss(const Eigen::MatrixXd& image_proj, const Eigen::MatrixXd& text_proj,
                         double log_logit_scale);

} // namespace m3g::train
