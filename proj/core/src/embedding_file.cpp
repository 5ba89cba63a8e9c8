#include "capqe/embedding_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "capqe/error.hpp"

namespace capqe {

namespace {

static_assert(sizeof(float) == 4);

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

}  // namespace

const std::vector<float>* EmbeddingTable::find(const std::string& id) const {
  for (const auto& [key, vec] : entries) {
    if (key == id) return &vec;
  }
  return nullptr;
}

void write_embedding_file(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write embedding file " + path.string());
  put_u32(out, table.dim);
  for (const auto& [id, vec] : table.entries) {
    if (vec.size() != table.dim) {
      throw ArgumentError("embedding '" + id + "' has dim " + std::to_string(vec.size()) +
                          ", table dim " + std::to_string(table.dim));
    }
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float f : vec) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  if (!out) throw ArgumentError("short write to " + path.string());
}

EmbeddingTable read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open embedding file " + path.string());
  EmbeddingTable table;
  if (!get_u32(in, table.dim) || table.dim == 0) {
    throw ParseError(path.string(), 1, "missing or zero dimension header");
  }
  std::size_t record = 0;
  std::uint32_t id_len = 0;
  while (get_u32(in, id_len)) {
    ++record;
    std::string id(id_len, '\0');
    if (!in.read(id.data(), id_len)) throw ParseError(path.string(), record, "truncated id");
    std::vector<float> vec(table.dim);
    for (auto& f : vec) {
      std::uint32_t bits = 0;
      if (!get_u32(in, bits)) throw ParseError(path.string(), record, "truncated vector");
      f = std::bit_cast<float>(bits);
    }
    table.entries.emplace_back(std::move(id), std::move(vec));
  }
  return table;
}

PrecomputedImageEmbedder::PrecomputedImageEmbedder(EmbeddingTable table,
                                                   std::shared_ptr<MultimodalEmbedder> text_backend)
    : table_(std::move(table)), text_backend_(std::move(text_backend)) {
  for (std::size_t i = 0; i < table_.entries.size(); ++i) index_[table_.entries[i].first] = i;
}

MultimodalEmbedding PrecomputedImageEmbedder::embed_multimodal(
    std::span<const std::string> image_refs, std::span<const std::string> texts) {
  require_non_empty_batch(image_refs.size(), "embed_multimodal(image_refs)");
  // The text backend needs an image batch too; hand it the first ref.
  MultimodalEmbedding out = text_backend_->embed_multimodal(image_refs.first(1), texts);
  out.image_vectors.clear();
  for (const auto& ref : image_refs) {
    auto it = index_.find(ref);
    if (it == index_.end()) throw ProviderError("no precomputed embedding for image '" + ref + "'");
    const auto& raw = table_.entries[it->second].second;
    EmbeddingVector v;
    v.values.assign(raw.begin(), raw.end());
    double s = 0.0;
    for (double x : v.values) s += x * x;
    if (s == 0.0) throw ProviderError("zero embedding for image '" + ref + "'");
    const double n = std::sqrt(s);
    for (double& x : v.values) x /= n;
    out.image_vectors.push_back(std::move(v));
  }
  if (!out.text_vectors.empty() && out.text_vectors.front().dim() != table_.dim) {
    throw ProviderError("precomputed image dim " + std::to_string(table_.dim) +
                        " does not match text dim " +
                        std::to_string(out.text_vectors.front().dim()));
  }
  out.model_tag += "+precomputed-images";
  return out;
}

}  // namespace capqe
