#include "m3g/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "m3g/crc32.hpp"
#include "m3g/errors.hpp"

namespace m3g::store {

namespace fs = std::filesystem;
using nlohmann::json;

std::span<const float> EmbeddingMatrix::row(const std::string& id) const {
    auto it = index.find(id);
    if (it == index.end()) throw DataError("unknown embedding id '" + id + "'");
    return row(it->second);
}

void EmbeddingMatrix::finalize() {
    if (ids.empty()) throw DataError("embedding matrix has no rows");
    if (dim <= 0) throw DataError("embedding matrix dim must be positive");
    if (data.size() != ids.size() * static_cast<std::size_t>(dim))
        throw DataError("embedding data length " + std::to_string(data.size()) +
                        " does not match " + std::to_string(ids.size()) + " rows x dim " +
                        std::to_string(dim));

    index.clear();
    for (std::size_t r = 0; r < ids.size(); ++r) {
        auto [_, inserted] = index.emplace(ids[r], r);
        if (!inserted) throw DataError("duplicate embedding id '" + ids[r] + "'");
    }

    for (std::size_t r = 0; r < ids.size(); ++r)
        for (float v : row(r))
            if (!std::isfinite(v))
                throw DataError("non-finite value in embedding row '" + ids[r] + "'");

    variants.clear();
    for (const auto& [variant, base] : variant_of) {
        auto v = index.find(variant);
        if (v == index.end()) throw DataError("variant_of names unknown variant id '" + variant + "'");
        if (!index.count(base)) throw DataError("variant_of names unknown base id '" + base + "'");
        if (variant == base) throw DataError("variant id '" + variant + "' maps to itself");
        variants[base].push_back(v->second);
    }
    for (auto& [_, rows] : variants) std::sort(rows.begin(), rows.end());
}

namespace {

std::size_t base_row(const EmbeddingMatrix& m, const std::string& id) {
    auto it = m.index.find(id);
    if (it == m.index.end()) throw DataError("unknown embedding id '" + id + "'");
    if (m.variant_of.count(id))
        throw DataError("id '" + id + "' is a variant, not a base id");
    return it->second;
}

} // namespace

std::span<const float> get_vector(const EmbeddingMatrix& m, const std::string& id,
                                  VariantMode mode, Rng& rng) {
    const std::size_t base = base_row(m, id);
    if (mode == VariantMode::base_only) return m.row(base);
    auto it = m.variants.find(id);
    if (it == m.variants.end() || it->second.empty()) return m.row(base);
    // Uniform over {base} and all registered variants.
    const std::size_t pick = rng.uniform_index(it->second.size() + 1);
    return pick == 0 ? m.row(base) : m.row(it->second[pick - 1]);
}

std::span<const float> get_vector(const EmbeddingMatrix& m, const std::string& id,
                                  const VariantPolicy& policy) {
    Rng rng(policy.seed);
    return get_vector(m, id, policy.mode, rng);
}

EmbeddingMatrix import_embeddings(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest: " + manifest_path);
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("manifest " + manifest_path + " is not valid JSON: " + e.what());
    }

    for (const auto& [key, _] : manifest.items())
        if (key != "ids" && key != "dim" && key != "blob" && key != "crc32" && key != "variant_of")
            throw DataError("manifest field '" + key + "' is not recognized");

    EmbeddingMatrix m;
    if (!manifest.contains("ids") || !manifest["ids"].is_array())
        throw DataError("manifest missing ids array");
    for (const auto& id : manifest["ids"]) m.ids.push_back(id.get<std::string>());
    if (!manifest.contains("dim") || !manifest["dim"].is_number_integer())
        throw DataError("manifest missing integer dim");
    m.dim = manifest["dim"].get<int>();
    if (m.dim <= 0) throw DataError("manifest dim must be positive");
    if (!manifest.contains("blob") || !manifest["blob"].is_string())
        throw DataError("manifest missing blob path");
    if (!manifest.contains("crc32") || !manifest["crc32"].is_number_unsigned())
        throw DataError("manifest missing unsigned crc32");
    const auto declared_crc = manifest["crc32"].get<uint32_t>();
    if (manifest.contains("variant_of")) {
        if (!manifest["variant_of"].is_object())
            throw DataError("manifest variant_of must be an object");
        for (const auto& [variant, base] : manifest["variant_of"].items())
            m.variant_of[variant] = base.get<std::string>();
    }

    const fs::path blob_path =
        fs::path(manifest_path).parent_path() / manifest["blob"].get<std::string>();
    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob) throw DataError("cannot open blob: " + blob_path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());

    const std::size_t expected = m.ids.size() * static_cast<std::size_t>(m.dim) * sizeof(float);
    if (bytes.size() != expected)
        throw DataError("blob " + blob_path.string() + " has " + std::to_string(bytes.size()) +
                        " bytes, expected " + std::to_string(expected));

    const uint32_t actual_crc = crc32(bytes.data(), bytes.size());
    if (actual_crc != declared_crc)
        throw DataError("blob checksum mismatch for " + blob_path.string() + ": manifest says " +
                        std::to_string(declared_crc) + ", blob is " + std::to_string(actual_crc));

    // Stored little-endian; this loader targets little-endian hosts.
    static_assert(std::endian::native == std::endian::little);
    m.data.resize(bytes.size() / sizeof(float));
    std::memcpy(m.data.data(), bytes.data(), bytes.size());

    m.finalize();
    return m;
}

void export_embeddings(const EmbeddingMatrix& m, const std::string& manifest_path,
                       const std::string& blob_filename) {
    if (m.data.size() != m.ids.size() * static_cast<std::size_t>(m.dim))
        throw DataError("refusing to export inconsistent embedding matrix");

    const fs::path blob_path = fs::path(manifest_path).parent_path() / blob_filename;
    std::ofstream blob(blob_path, std::ios::binary);
    if (!blob) throw DataError("cannot write blob: " + blob_path.string());
    static_assert(std::endian::native == std::endian::little);
    blob.write(reinterpret_cast<const char*>(m.data.data()),
               static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    blob.close();

    json manifest;
    manifest["ids"] = m.ids;
    manifest["dim"] = m.dim;
    manifest["blob"] = blob_filename;
    manifest["crc32"] = crc32(m.data.data(), m.data.size() * sizeof(float));
    if (!m.variant_of.empty()) {
        json vo = json::object();
        for (const auto& [variant, base] : m.variant_of) vo[variant] = base;
        manifest["variant_of"] = std::move(vo);
    }
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw DataError("cannot write manifest: " + manifest_path);
    out << manifest.dump(2) << '\n';
}

} // namespace m3g::store
