#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "m3g/embedding_store.hpp"
#include "m3g/model.hpp"

namespace m3g::train {

struct TrainConfig {
    int batch_size = 256; // 128 | 256 | 512 in the batch-size study
    double learning_rate = 0.001;
    double weight_decay = 0.001; // decoupled, head weights only
    int epochs = 10;
    uint64_t seed = 0;
    int projection_dim = 256;
    bool variant_sampling = false;      // sample augmented image variants per epoch
    bool dedup_labels_in_batch = false; // drop in-batch duplicate labels (false negatives)

    // Adam moments; the published configuration names only lr and weight decay.
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainPair {
    std::string image_id;
    std::string text_id;
};

std::vector<TrainPair> load_pairs(const std::string& path); // CSV: image_id,text_id
void save_pairs(const std::vector<TrainPair>& pairs, const std::string& path);

struct TrainResult {
    JointEmbeddingModel model;
    std::vector<double> epoch_mean_loss;
};

// Called once per epoch with the shuffled pair order, before batching. The
// order depends only on (seed, pair count, epoch), never on batch size or
// variant sampling, so ablations across batch sizes see identical shuffles.
using EpochObserver = std::function<void(int epoch, const std::vector<std::size_t>& order)>;

// Deterministic full-batch gradient training of both projection heads and the
// logit scale. Mini-batches of batch_size per epoch, final short batch
// dropped (contrastive loss scale depends on batch size). Bit-identical
// outputs for identical (config, data, seed).
TrainResult train(const TrainConfig& config, const store::EmbeddingMatrix& image_feats,
                  const store::EmbeddingMatrix& text_embeds, const std::vector<TrainPair>& pairs,
                  const EpochObserver& observer = nullptr);

void save_loss_trace(const std::vector<double>& epoch_mean_loss, const std::string& path);

// --- gradient verification -------------------------------------------------

// End-to-end loss for a fixed batch of raw (unprojected, unnormalized)
// feature rows, as a function of the flattened parameter vector. Flattening
// order: image W (row-major), image b, text W, text b, log_logit_scale.
struct GradCheckBatch {
    Eigen::MatrixXd image_inputs; // N x image_in_dim
    Eigen::MatrixXd text_inputs;  // N x text_in_dim
};

std::vector<double> flatten_parameters(const JointEmbeddingModel& model);
void unflatten_parameters(const std::vector<double>& params, JointEmbeddingModel& model);

double batch_loss(const JointEmbeddingModel& model, const GradCheckBatch& batch);
// Analytic gradient of batch_loss in flattened order.
std::vector<double> batch_loss_gradient(const JointEmbeddingModel& model,
                                        const GradCheckBatch& batch);

// Max over parameters of |g_fd - g_analytic| / max(1e-12, |g_fd| + |g_analytic|)
// with central finite differences of step eps. The optional override lets
// fault-injection tests corrupt the analytic gradient before comparison.
double grad_check(const JointEmbeddingModel& model, const GradCheckBatch& batch, double eps,
                  const std::function<void(std::vector<double>&)>& corrupt_analytic = nullptr,
                  std::vector<double>* per_param_error = nullptr);

} // namespace m3g::train
