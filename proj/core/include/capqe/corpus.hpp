#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "capqe/types.hpp"

namespace capqe {

// An image-caption corpus. Images are ordered by image_id, captions by
// (image_id, caption_id); that caption order is the canonical index space the
// chunk pipeline partitions.
class Corpus {
 public:
  Corpus() = default;
  // Sorts, then checks referential integrity. Throws IntegrityError.
  Corpus(std::vector<ImageEntry> images, std::vector<CaptionRecord> captions);

  const std::vector<ImageEntry>& images() const { return images_; }
  const std::vector<CaptionRecord>& captions() const { return captions_; }

  const ImageEntry* find_image(ImageId id) const;
  const CaptionRecord* find_caption(CaptionId id) const;
  // file_ref of the image a caption belongs to.
  const std::string& image_ref_for(const CaptionRecord& caption) const;

  // Keeps only the given images (and their captions).
  Corpus subset(const std::vector<ImageId>& image_ids) const;

  bool operator==(const Corpus& other) const {
    return images_ == other.images_ && captions_ == other.captions_;
  }

 private:
  void index();

  std::vector<ImageEntry> images_;
  std::vector<CaptionRecord> captions_;
  std::map<ImageId, std::size_t> image_index_;
  std::map<CaptionId, std::size_t> caption_index_;
};

// Line-delimited corpus format, one image per line:
//   {"image_id": 1, "file_ref": "train/0001.jpg", "labels": ["dog"],
//    "captions": [{"caption_id": 10, "text": "A dog runs."}]}
// A caption object may repeat "image_id"; it must then name the enclosing
// image. Blank lines are skipped. Captions load as Pending, revision 0.
Corpus parse_corpus(std::istream& in, std::string_view source_name = "<corpus>");
Corpus load_corpus(const std::filesystem::path& path);

// Inverse of parse_corpus for the fields the format carries.
std::string serialize_corpus(const Corpus& corpus);

}  // namespace capqe
