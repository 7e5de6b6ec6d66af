#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace m3g::train {

// Single affine map into the joint space, L2-normalized on output.
struct ProjectionHead {
    Eigen::MatrixXd weight; // out_dim x in_dim
    Eigen::VectorXd bias;   // out_dim

    int in_dim() const { return static_cast<int>(weight.cols()); }
    int out_dim() const { return static_cast<int>(weight.rows()); }
};

// Initializes weight uniformly in +-1/sqrt(in_dim), bias zero, seeded.
ProjectionHead init_head(int in_dim, int out_dim, uint64_t seed);

// L2-normalized W*v + b. Errors on dimension mismatch and on a zero
// pre-normalization vector (degenerate direction).
Eigen::VectorXd project(const ProjectionHead& head, const Eigen::VectorXd& v);

inline constexpr double kMaxLogitScale = 100.0; // exp(log_logit_scale) clamp

struct JointEmbeddingModel {
    ProjectionHead image_head; // 2048 -> 256 at paper scale
    ProjectionHead text_head;  // 3072 -> 256 at paper scale
    double log_logit_scale = 0.0;

    double logit_scale() const;
    void clamp_logit_scale();
};

// log_logit_scale starts at ln(1/0.07), the usual contrastive temperature.
JointEmbeddingModel init_model(int image_in_dim, int text_in_dim, int projection_dim,
                               uint64_t seed);

// Model file: magic, little-endian JSON header (dims, seed, config echo),
// then the parameters as a little-endian float64 blob.
void save_model(const JointEmbeddingModel& model, const std::string& path,
                const std::string& config_echo_json = "{}", uint64_t seed = 0);
JointEmbeddingModel load_model(const std::string& path);

} // namespace m3g::train
