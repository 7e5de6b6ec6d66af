#include "m3g/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "m3g/errors.hpp"
#include "m3g/rng.hpp"

namespace m3g::train {

using nlohmann::json;

ProjectionHead init_head(int in_dim, int out_dim, uint64_t seed) {
    if (in_dim <= 0 || out_dim <= 0) throw ConfigError("projection head dims must be positive");
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    ProjectionHead head;
    head.weight.resize(out_dim, in_dim);
    for (int r = 0; r < out_dim; ++r)
        for (int c = 0; c < in_dim; ++c) head.weight(r, c) = rng.uniform(-bound, bound);
    head.bias = Eigen::VectorXd::Zero(out_dim);
    return head;
}

Eigen::VectorXd project(const ProjectionHead& head, const Eigen::VectorXd& v) {
    if (v.size() != head.weight.cols())
        throw DataError("project: input has dim " + std::to_string(v.size()) + ", head expects " +
                        std::to_string(head.weight.cols()));
    if (!v.allFinite()) throw DataError("project: non-finite input vector");
    Eigen::VectorXd u = head.weight * v + head.bias;
    const double norm = u.norm();
    if (norm == 0.0) throw DataError("project: zero vector before normalization");
    return u / norm;
}

double JointEmbeddingModel::logit_scale() const { return std::exp(log_logit_scale); }

void JointEmbeddingModel::clamp_logit_scale() {
    const double cap = std::log(kMaxLogitScale);
    if (log_logit_scale > cap) log_logit_scale = cap;
}

JointEmbeddingModel init_model(int image_in_dim, int text_in_dim, int projection_dim,
                               uint64_t seed) {
    JointEmbeddingModel model;
    model.image_head = init_head(image_in_dim, projection_dim, mix_seed(seed, "init/image"));
    model.text_head = init_head(text_in_dim, projection_dim, mix_seed(seed, "init/text"));
    model.log_logit_scale = std::log(1.0 / 0.07);
    model.clamp_logit_scale();
    return model;
}

namespace {

constexpr char kMagic[4] = {'M', '3', 'G', 'M'};

void append_matrix(std::vector<double>& out, const Eigen::MatrixXd& m) {
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
}

void read_matrix(const std::vector<double>& in, std::size_t& pos, Eigen::MatrixXd& m) {
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = in[pos++];
}

} // namespace

void save_model(const JointEmbeddingModel& model, const std::string& path,
                const std::string& config_echo_json, uint64_t seed) {
    json header;
    header["image_in_dim"] = model.image_head.in_dim();
    header["text_in_dim"] = model.text_head.in_dim();
    header["projection_dim"] = model.image_head.out_dim();
    header["dtype"] = "f64";
    header["seed"] = seed;
    try {
        header["config"] = json::parse(config_echo_json);
    } catch (const json::parse_error&) {
        throw ConfigError("save_model: config echo is not valid JSON");
    }

    std::vector<double> params;
    append_matrix(params, model.image_head.weight);
    append_matrix(params, model.image_head.bias);
    append_matrix(params, model.text_head.weight);
    append_matrix(params, model.text_head.bias);
    params.push_back(model.log_logit_scale);
    header["param_count"] = params.size();

    const std::string header_bytes = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    static_assert(std::endian::native == std::endian::little);
    out.write(kMagic, 4);
    const uint32_t header_len = static_cast<uint32_t>(header_bytes.size());
    out.write(reinterpret_cast<const char*>(&header_len), 4);
    out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
}

JointEmbeddingModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("not a model file: " + path);
    uint32_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), 4);
    std::string header_bytes(header_len, '\0');
    in.read(header_bytes.data(), header_len);
    if (!in) throw DataError("truncated model header: " + path);

    json header;
    try {
        header = json::parse(header_bytes);
    } catch (const json::parse_error& e) {
        throw DataError("corrupt model header: " + std::string(e.what()));
    }
    const int image_in = header.at("image_in_dim").get<int>();
    const int text_in = header.at("text_in_dim").get<int>();
    const int proj = header.at("projection_dim").get<int>();
    const std::size_t count = header.at("param_count").get<std::size_t>();
    const std::size_t expected = static_cast<std::size_t>(proj) * image_in + proj +
                                 static_cast<std::size_t>(proj) * text_in + proj + 1;
    if (count != expected) throw DataError("model header param_count mismatch");

    std::vector<double> params(count);
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw DataError("truncated model blob: " + path);

    JointEmbeddingModel model;
    model.image_head.weight.resize(proj, image_in);
    model.image_head.bias.resize(proj);
    model.text_head.weight.resize(proj, text_in);
    model.text_head.bias.resize(proj);
    std::size_t pos = 0;
    read_matrix(params, pos, model.image_head.weight);
    Eigen::MatrixXd tmp = model.image_head.bias;
    read_matrix(params, pos, tmp);
    model.image_head.bias = tmp;
    read_matrix(params, pos, model.text_head.weight);
    tmp = model.text_head.bias;
    read_matrix(params, pos, tmp);
    model.text_head.bias = tmp;
    model.log_logit_scale = params[pos++];
    return model;
}

} // namespace m3g::train
