#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "m3g/rng.hpp"

namespace m3g::store {

// Id-indexed dense vector store, row-major float32. Read-only after load.
// Rows may be registered as augmented variants of a base row via variant_of;
// the trainer and classifier sample among a base row and its variants instead
// of touching pixels.
struct EmbeddingMatrix {
    std::vector<std::string> ids;
    int dim = 0;
    std::vector<float> data; // |ids| x dim

    std::unordered_map<std::string, std::size_t> index;            // id -> row
    std::unordered_map<std::string, std::string> variant_of;       // variant id -> base id
    std::unordered_map<std::string, std::vector<std::size_t>> variants; // base id -> variant rows

    bool has(const std::string& id) const { return index.count(id) > 0; }
    std::size_t rows() const { return ids.size(); }
    std::span<const float> row(std::size_t r) const {
        return {data.data() + r * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    std::span<const float> row(const std::string& id) const;

    // Rebuilds index/variants and checks invariants (unique ids, exact data
    // length, finite values, variant targets resolve). Throws DataError.
    void finalize();
};

enum class VariantMode { base_only, sample_variant };

struct VariantPolicy {
    VariantMode mode = VariantMode::base_only;
    uint64_t seed = 0;

    static VariantPolicy base_only() { return {VariantMode::base_only, 0}; }
    static VariantPolicy sample(uint64_t seed) { return {VariantMode::sample_variant, seed}; }
};

// base_only returns the base row; sample_variant draws uniformly (seeded)
// among the base row and its registered variants. `id` must be a base id.
std::span<const float> get_vector(const EmbeddingMatrix& m, const std::string& id,
                                  const VariantPolicy& policy);
// Same, but drawing from a caller-owned stream (used per-case / per-epoch).
std::span<const float> get_vector(const EmbeddingMatrix& m, const std::string& id,
                                  VariantMode mode, Rng& rng);

// Two-file format: JSON manifest {ids, dim, blob, crc32, variant_of?} plus a
// raw little-endian float32 blob next to it. The manifest checksum is CRC-32
// of the blob bytes.
EmbeddingMatrix import_embeddings(const std::string& manifest_path);
void export_embeddings(const EmbeddingMatrix& m, const std::string& manifest_path,
                       const std::string& blob_filename);

} // namespace m3g::store
