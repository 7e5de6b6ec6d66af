#include "m3g/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "m3g/clip_loss.hpp"
#include "m3g/errors.hpp"
#include "m3g/text.hpp"

namespace m3g::train {

std::vector<TrainPair> load_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open pairs file: " + path);
    std::vector<TrainPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        const auto comma = trimmed.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 >= trimmed.size())
            throw DataError("pairs file line " + std::to_string(line_no) +
                            ": expected 'image_id,text_id'");
        pairs.push_back({text::trim(trimmed.substr(0, comma)), text::trim(trimmed.substr(comma + 1))});
    }
    return pairs;
}

void save_pairs(const std::vector<TrainPair>& pairs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write pairs file: " + path);
    for (const auto& p : pairs) out << p.image_id << ',' << p.text_id << '\n';
}

namespace {

Eigen::VectorXd to_double(std::span<const float> row) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) v[static_cast<Eigen::Index>(i)] = row[i];
    return v;
}

// Forward pass and gradient accumulation for one head over a batch.
// Backprop through y = u/|u| with u = W x + b:
//   g_u = (g_y - (y . g_y) y) / |u|
struct HeadBatch {
    Eigen::MatrixXd inputs;      // N x in_dim
    Eigen::MatrixXd projections; // N x out_dim, unit rows
    Eigen::VectorXd norms;       // |u| per row
};

HeadBatch forward_head(const ProjectionHead& head, const Eigen::MatrixXd& inputs) {
    HeadBatch batch;
    batch.inputs = inputs;
    const Eigen::MatrixXd pre =
        (inputs * head.weight.transpose()).rowwise() + head.bias.transpose();
    batch.norms.resize(pre.rows());
    batch.projections.resize(pre.rows(), pre.cols());
    for (int i = 0; i < pre.rows(); ++i) {
        const double norm = pre.row(i).norm();
        if (norm == 0.0) throw DataError("projection produced a zero vector");
        batch.norms[i] = norm;
        batch.projections.row(i) = pre.row(i) / norm;
    }
    return batch;
}

struct HeadGrads {
    Eigen::MatrixXd weight;
    Eigen::VectorXd bias;
};

HeadGrads backward_head(const ProjectionHead& head, const HeadBatch& batch,
                        const Eigen::MatrixXd& grad_projections) {
    HeadGrads grads;
    grads.weight = Eigen::MatrixXd::Zero(head.weight.rows(), head.weight.cols());
    grads.bias = Eigen::VectorXd::Zero(head.bias.size());
    for (int i = 0; i < batch.inputs.rows(); ++i) {
        const Eigen::VectorXd y = batch.projections.row(i).transpose();
        const Eigen::VectorXd gy = grad_projections.row(i).transpose();
        const Eigen::VectorXd gu = (gy - y.dot(gy) * y) / batch.norms[i];
        grads.weight.noalias() += gu * batch.inputs.row(i);
        grads.bias += gu;
    }
    return grads;
}

// Decoupled-weight-decay adaptive moment estimation, from scratch.
class AdamW {
  public:
    AdamW(const TrainConfig& cfg, const JointEmbeddingModel& model) : cfg_(cfg) {
        m_iw_ = Eigen::MatrixXd::Zero(model.image_head.weight.rows(), model.image_head.weight.cols());
        v_iw_ = m_iw_;
        m_ib_ = Eigen::VectorXd::Zero(model.image_head.bias.size());
        v_ib_ = m_ib_;
        m_tw_ = Eigen::MatrixXd::Zero(model.text_head.weight.rows(), model.text_head.weight.cols());
        v_tw_ = m_tw_;
        m_tb_ = Eigen::VectorXd::Zero(model.text_head.bias.size());
        v_tb_ = m_tb_;
    }

    void step(JointEmbeddingModel& model, const HeadGrads& image, const HeadGrads& text,
              double grad_log_scale) {
        ++t_;
        update(model.image_head.weight, image.weight, m_iw_, v_iw_, /*decay=*/true);
        update(model.image_head.bias, image.bias, m_ib_, v_ib_, /*decay=*/false);
        update(model.text_head.weight, text.weight, m_tw_, v_tw_, /*decay=*/true);
        update(model.text_head.bias, text.bias, m_tb_, v_tb_, /*decay=*/false);
        update_scalar(model.log_logit_scale, grad_log_scale);
        model.clamp_logit_scale();
    }

  private:
    template <typename T>
    void update(T& param, const T& grad, T& m, T& v, bool decay) {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad.array().square().matrix();
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        const T m_hat = m / bc1;
        const T v_hat = v / bc2;
        param.array() -= cfg_.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg_.epsilon);
        if (decay && cfg_.weight_decay > 0.0)
            param.array() -= cfg_.learning_rate * cfg_.weight_decay * param.array();
    }

    void update_scalar(double& param, double grad) {
        m_s_ = cfg_.beta1 * m_s_ + (1.0 - cfg_.beta1) * grad;
        v_s_ = cfg_.beta2 * v_s_ + (1.0 - cfg_.beta2) * grad * grad;
        const double m_hat = m_s_ / (1.0 - std::pow(cfg_.beta1, t_));
        const double v_hat = v_s_ / (1.0 - std::pow(cfg_.beta2, t_));
        param -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }

    TrainConfig cfg_;
    int t_ = 0;
    Eigen::MatrixXd m_iw_, v_iw_, m_tw_, v_tw_;
    Eigen::VectorXd m_ib_, v_ib_, m_tb_, v_tb_;
    double m_s_ = 0.0, v_s_ = 0.0;
};

void validate_config(const TrainConfig& cfg, std::size_t pair_count) {
    if (cfg.batch_size < 2) throw ConfigError("batch_size must be >= 2 for contrastive batches");
    if (cfg.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
    if (cfg.projection_dim <= 0) throw ConfigError("projection_dim must be positive");
    if (pair_count < static_cast<std::size_t>(cfg.batch_size))
        throw DataError("batch_size " + std::to_string(cfg.batch_size) + " exceeds pair count " +
                        std::to_string(pair_count));
}

} // namespace

TrainResult train(const TrainConfig& config, const store::EmbeddingMatrix& image_feats,
                  const store::EmbeddingMatrix& text_embeds, const std::vector<TrainPair>& pairs,
                  const EpochObserver& observer) {
    validate_config(config, pairs.size());
    for (const auto& p : pairs) {
        if (!image_feats.has(p.image_id) || image_feats.variant_of.count(p.image_id))
            throw DataError("pair image id '" + p.image_id + "' does not resolve to a base row");
        if (!text_embeds.has(p.text_id))
            throw DataError("pair text id '" + p.text_id + "' does not resolve");
    }

    TrainResult result;
    result.model =
        init_model(image_feats.dim, text_embeds.dim, config.projection_dim, config.seed);
    AdamW optimizer(config, result.model);

    // Independent streams: shuffles must not depend on batch size or on
    // whether variant sampling is on.
    Rng shuffle_rng(mix_seed(config.seed, "train/shuffle"));
    Rng variant_rng(mix_seed(config.seed, "train/variant"));

    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<std::size_t> order(pairs.size());
        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(order);
        if (observer) observer(epoch, order);

        double loss_sum = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start + batch <= order.size(); start += batch) {
            std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(start),
                                             order.begin() + static_cast<std::ptrdiff_t>(start + batch));
            if (config.dedup_labels_in_batch) {
                std::unordered_set<std::string> seen;
                std::vector<std::size_t> kept;
                for (std::size_t idx : members)
                    if (seen.insert(pairs[idx].text_id).second) kept.push_back(idx);
                members = std::move(kept);
                if (members.size() < 2) continue; // nothing contrastive left
            }

            const auto n = static_cast<Eigen::Index>(members.size());
            Eigen::MatrixXd image_in(n, image_feats.dim);
            Eigen::MatrixXd text_in(n, text_embeds.dim);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& pair = pairs[members[static_cast<std::size_t>(i)]];
                const auto mode = config.variant_sampling ? store::VariantMode::sample_variant
                                                          : store::VariantMode::base_only;
                image_in.row(i) =
                    to_double(store::get_vector(image_feats, pair.image_id, mode, variant_rng))
                        .transpose();
                text_in.row(i) = to_double(text_embeds.row(pair.text_id)).transpose();
            }

            const HeadBatch image_fwd = forward_head(result.model.image_head, image_in);
            const HeadBatch text_fwd = forward_head(result.model.text_head, text_in);
            const ClipLossResult loss = clip_loss(image_fwd.projections, text_fwd.projections,
                                                  result.model.log_logit_scale);
            const HeadGrads image_grads =
                backward_head(result.model.image_head, image_fwd, loss.grad_image);
            const HeadGrads text_grads =
                backward_head(result.model.text_head, text_fwd, loss.grad_text);
            optimizer.step(result.model, image_grads, text_grads, loss.grad_log_scale);

            loss_sum += loss.loss;
            ++batches;
        }
        result.epoch_mean_loss.push_back(batches > 0 ? loss_sum / batches
                                                     : std::numeric_limits<double>::quiet_NaN());
    }
    return result;
}

void save_loss_trace(const std::vector<double>& epoch_mean_loss, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write loss trace: " + path);
    out << "epoch,mean_loss\n";
    char buf[64];
    for (std::size_t i = 0; i < epoch_mean_loss.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, epoch_mean_loss[i]);
        out << buf;
    }
}

// --- gradient verification -------------------------------------------------

std::vector<double> flatten_parameters(const JointEmbeddingModel& model) {
    std::vector<double> params;
    auto push = [&](const Eigen::MatrixXd& m) {
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) params.push_back(m(r, c));
    };
    push(model.image_head.weight);
    push(model.image_head.bias);
    push(model.text_head.weight);
    push(model.text_head.bias);
    params.push_back(model.log_logit_scale);
    return params;
}

void unflatten_parameters(const std::vector<double>& params, JointEmbeddingModel& model) {
    std::size_t pos = 0;
    auto pull = [&](Eigen::MatrixXd& m) {
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) m(r, c) = params[pos++];
    };
    pull(model.image_head.weight);
    Eigen::MatrixXd b = model.image_head.bias;
    pull(b);
    model.image_head.bias = b;
    pull(model.text_head.weight);
    b = model.text_head.bias;
    pull(b);
    model.text_head.bias = b;
    model.log_logit_scale = params[pos++];
    if (pos != params.size()) throw DataError("parameter vector length mismatch");
}

double batch_loss(const JointEmbeddingModel& model, const GradCheckBatch& batch) {
    const HeadBatch image_fwd = forward_head(model.image_head, batch.image_inputs);
    const HeadBatch text_fwd = forward_head(model.text_head, batch.text_inputs);
    return clip_loss(image_fwd.projections, text_fwd.projections, model.log_logit_scale).loss;
}

std::vector<double> batch_loss_gradient(const JointEmbeddingModel& model,
                                        const GradCheckBatch& batch) {
    const HeadBatch image_fwd = forward_head(model.image_head, batch.image_inputs);
    const HeadBatch text_fwd = forward_head(model.text_head, batch.text_inputs);
    const ClipLossResult loss =
        clip_loss(image_fwd.projections, text_fwd.projections, model.log_logit_scale);
    const HeadGrads image_grads = backward_head(model.image_head, image_fwd, loss.grad_image);
    const HeadGrads text_grads = backward_head(model.text_head, text_fwd, loss.grad_text);

    JointEmbeddingModel grads = model;
    grads.image_head.weight = image_grads.weight;
    grads.image_head.bias = image_grads.bias;
    grads.text_head.weight = text_grads.weight;
    grads.text_head.bias = text_grads.bias;
    grads.log_logit_scale = loss.grad_log_scale;
    return flatten_parameters(grads);
}

double grad_check(const JointEmbeddingModel& model, const GradCheckBatch& batch, double eps,
                  const std::function<void(std::vector<double>&)>& corrupt_analytic,
                  std::vector<double>* per_param_error) {
    if (eps < 1e-7 || eps > 1e-3) throw ConfigError("grad_check eps must be in [1e-7, 1e-3]");

    std::vector<double> analytic = batch_loss_gradient(model, batch);
    for (double g : analytic)
        if (!std::isfinite(g)) throw DataError("grad_check: non-finite analytic gradient");
    if (corrupt_analytic) corrupt_analytic(analytic);

    std::vector<double> params = flatten_parameters(model);
    JointEmbeddingModel probe = model;
    double max_err = 0.0;
    if (per_param_error) per_param_error->assign(params.size(), 0.0);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + eps;
        unflatten_parameters(params, probe);
        const double up = batch_loss(probe, batch);
        params[i] = saved - eps;
        unflatten_parameters(params, probe);
        const double down = batch_loss(probe, batch);
        params[i] = saved;

        const double fd = (up - down) / (2.0 * eps);
        const double err = std::abs(fd - analytic[i]) /
                           std::max(1e-12, std::abs(fd) + std::abs(analytic[i]));
        if (per_param_error) (*per_param_error)[i] = err;
        max_err = std::max(max_err, err);
    }
    return max_err;
}

} // namespace m3g::train
