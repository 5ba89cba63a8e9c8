#include "capqe/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>

#include "capqe/error.hpp"
#include "json_codec.hpp"

namespace capqe {

using detail::json;

Corpus::Corpus(std::vector<ImageEntry> images, std::vector<CaptionRecord> captions)
    : images_(std::move(images)), captions_(std::move(captions)) {
  std::sort(images_.begin(), images_.end(),
            [](const ImageEntry& a, const ImageEntry& b) { return a.image_id < b.image_id; });
  for (auto& img : images_) std::sort(img.caption_ids.begin(), img.caption_ids.end());
  std::sort(captions_.begin(), captions_.end(), [](const CaptionRecord& a, const CaptionRecord& b) {
    return std::tie(a.image_id, a.caption_id) < std::tie(b.image_id, b.caption_id);
  });
  index();
}

void Corpus::index() {
  image_index_.clear();
  caption_index_.clear();
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const auto& img = images_[i];
    if (!image_index_.emplace(img.image_id, i).second) {
      throw IntegrityError("duplicate image_id " + std::to_string(img.image_id));
    }
    if (img.caption_ids.empty()) {
      throw IntegrityError("image " + std::to_string(img.image_id) + " has no captions");
    }
  }
  for (std::size_t i = 0; i < captions_.size(); ++i) {
    const auto& cap = captions_[i];
    if (!caption_index_.emplace(cap.caption_id, i).second) {
      throw IntegrityError("duplicate caption_id " + std::to_string(cap.caption_id));
    }
    if (!image_index_.contains(cap.image_id)) {
      throw IntegrityError("caption " + std::to_string(cap.caption_id) +
                           " references missing image_id " + std::to_string(cap.image_id));
    }
  }
  std::size_t referenced = 0;
  for (const auto& img : images_) {
    for (CaptionId cid : img.caption_ids) {
      auto it = caption_index_.find(cid);
      if (it == caption_index_.end()) {
        throw IntegrityError("image " + std::to_string(img.image_id) +
                             " references missing caption_id " + std::to_string(cid));
      }
      if (captions_[it->second].image_id != img.image_id) {
        throw IntegrityError("caption " + std::to_string(cid) + " is listed by image " +
                             std::to_string(img.image_id) + " but belongs to image " +
                             std::to_string(captions_[it->second].image_id));
      }
      ++referenced;
    }
  }
  if (referenced != captions_.size()) {
    throw IntegrityError("caption set and image caption lists disagree (" +
                         std::to_string(referenced) + " referenced, " +
                         std::to_string(captions_.size()) + " records)");
  }
}

const ImageEntry* Corpus::find_image(ImageId id) const {
  auto it = image_index_.find(id);
  return it == image_index_.end() ? nullptr : &images_[it->second];
}

const CaptionRecord* Corpus::find_caption(CaptionId id) const {
  auto it = caption_index_.find(id);
  return it == caption_index_.end() ? nullptr : &captions_[it->second];
}

const std::string& Corpus::image_ref_for(const CaptionRecord& caption) const {
  const ImageEntry* img = find_image(caption.image_id);
  if (img == nullptr) {
    throw NotFoundError("no image " + std::to_string(caption.image_id) + " for caption " +
                        std::to_string(caption.caption_id));
  }
  return img->file_ref;
}

Corpus Corpus::subset(const std::vector<ImageId>& image_ids) const {
  std::set<ImageId> keep(image_ids.begin(), image_ids.end());
  std::vector<ImageEntry> imgs;
  std::vector<CaptionRecord> caps;
  for (const auto& img : images_) {
    if (keep.contains(img.image_id)) imgs.push_back(img);
  }
  for (const auto& cap : captions_) {
    if (keep.contains(cap.image_id)) caps.push_back(cap);
  }
  return Corpus(std::move(imgs), std::move(caps));
}

Corpus parse_corpus(std::istream& in, std::string_view source_name) {
  const std::string source(source_name);
  std::vector<ImageEntry> images;
  std::vector<CaptionRecord> captions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ImageEntry img;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw ParseError(source, line_no, "expected a JSON object");
      img.image_id = detail::required<ImageId>(j, "image_id");
      img.file_ref = detail::required<std::string>(j, "file_ref");
      if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
        for (const auto& l : *it) {
          if (!img.labels.labels.insert(l.get<std::string>()).second) {
            throw ParseError(source, line_no, "duplicate label '" + l.get<std::string>() + "'");
          }
        }
      }
      for (const auto& c : detail::required<json>(j, "captions")) {
        CaptionRecord rec;
        rec.caption_id = detail::required<CaptionId>(c, "caption_id");
        rec.image_id = img.image_id;
        if (auto it = c.find("image_id"); it != c.end()) rec.image_id = it->get<ImageId>();
        rec.source_text = detail::required<std::string>(c, "text");
        if (rec.source_text.empty()) {
          throw ParseError(source, line_no,
                           "caption " + std::to_string(rec.caption_id) + " has empty text");
        }
        if (rec.image_id == img.image_id) img.caption_ids.push_back(rec.caption_id);
        captions.push_back(std::move(rec));
      }
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
    images.push_back(std::move(img));
  }
  return Corpus(std::move(images), std::move(captions));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open corpus file " + path.string());
  return parse_corpus(in, path.string());
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& img : corpus.images()) {
    json caps = json::array();
    for (CaptionId cid : img.caption_ids) {
      const CaptionRecord* rec = corpus.find_caption(cid);
      caps.push_back(json{{"caption_id", cid}, {"text", rec->source_text}});
    }
    json j{{"image_id", img.image_id},
           {"file_ref", img.file_ref},
           {"labels", json(std::vector<std::string>(img.labels.labels.begin(),
                                                    img.labels.labels.end()))},
           {"captions", std::move(caps)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace capqe
