#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "capqe/providers.hpp"

namespace capqe {

// Precomputed embedding file, all integers and floats little-endian:
//   u32 dim
//   repeated until EOF: u32 id_length, id bytes (UTF-8), dim x float32
struct EmbeddingTable {
  std::uint32_t dim{0};
  std::vector<std::pair<std::string, std::vector<float>>> entries;

  const std::vector<float>* find(const std::string& id) const;
};

void write_embedding_file(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable read_embedding_file(const std::filesystem::path& path);

// Image vectors looked up by image_ref in a table; text vectors delegated to
// `text_backend`. Unknown image refs and dimension mismatches are provider
// errors.
class PrecomputedImageEmbedder final : public MultimodalEmbedder {
 public:
  PrecomputedImageEmbedder(EmbeddingTable table, std::shared_ptr<MultimodalEmbedder> text_backend);
  MultimodalEmbedding embed_multimodal(std::span<const std::string> image_refs,
                                       std::span<const std::string> texts) override;

 private:
  EmbeddingTable table_;
  std::unordered_map<std::string, std::size_t> index_;
  std::shared_ptr<MultimodalEmbedder> text_backend_;
};

}  // namespace capqe
