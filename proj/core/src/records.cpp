#include "capqe/records.hpp"

#include "capqe/error.hpp"
#include "json_codec.hpp"

namespace capqe {

namespace detail {

json scores_to_json(const QEComponentScores& s) {
  return json{{"comet_raw", s.comet_raw},
              {"bert_raw", s.bert_raw},
              {"clip_raw", s.clip_raw},
              {"s_orig", s.s_orig},
              {"s_bt", s.s_bt},
              {"normalized", json::array({s.normalized.comet, s.normalized.bert, s.normalized.clip})},
              {"hybrid", s.hybrid}};
}

QEComponentScores scores_from_json(const json& j) {
  QEComponentScores s;
  s.comet_raw = required<double>(j, "comet_raw");
  s.bert_raw = required<double>(j, "bert_raw");
  s.clip_raw = required<double>(j, "clip_raw");
  s.s_orig = required<double>(j, "s_orig");
  s.s_bt = required<double>(j, "s_bt");
  const auto norm = required<std::vector<double>>(j, "normalized");
  if (norm.size() != 3) {
    throw json::other_error::create(501, "'normalized' must hold 3 values", &j);
  }
  s.normalized = {norm[0], norm[1], norm[2]};
  s.hybrid = required<double>(j, "hybrid");
  return s;
}

json record_to_json(const CaptionRecord& r) {
  json j{{"caption_id", r.caption_id},
         {"image_id", r.image_id},
         {"source_text", r.source_text},
         {"status", std::string(to_string(r.status))},
         {"revision", r.revision}};
  if (r.translated_text) j["translated_text"] = *r.translated_text;
  if (r.back_translated_text) j["back_translated_text"] = *r.back_translated_text;
  if (r.scores) j["scores"] = scores_to_json(*r.scores);
  return j;
}

CaptionRecord record_from_json(const json& j) {
  CaptionRecord r;
  r.caption_id = required<CaptionId>(j, "caption_id");
  r.image_id = required<ImageId>(j, "image_id");
  r.source_text = required<std::string>(j, "source_text");
  r.status = parse_status(required<std::string>(j, "status"));
  r.revision = required<std::uint64_t>(j, "revision");
  if (auto it = j.find("translated_text"); it != j.end() && !it->is_null()) {
    r.translated_text = it->get<std::string>();
  }
  if (auto it = j.find("back_translated_text"); it != j.end() && !it->is_null()) {
    r.back_translated_text = it->get<std::string>();
  }
  if (auto it = j.find("scores"); it != j.end() && !it->is_null()) {
    r.scores = scores_from_json(*it);
  }
  return r;
}

}  // namespace detail

std::string serialize_record(const CaptionRecord& record) {
  return detail::record_to_json(record).dump();
}

CaptionRecord parse_record(std::string_view line, std::string_view source, std::size_t line_no) {
  try {
    return detail::record_from_json(detail::json::parse(line));
  } catch (const detail::json::exception& e) {
    throw ParseError(std::string(source), line_no, e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(std::string(source), line_no, e.what());
  }
}

std::string serialize_records(std::span<const CaptionRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<CaptionRecord> parse_records(std::string_view text, std::string_view source) {
  std::vector<CaptionRecord> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_record(lines[i], source, i + 1));
  }
  return out;
}

}  // namespace capqe

namespace capqe {

std::vector<CaptionRecord> exportable_records(std::span<const CaptionRecord> records) {
  std::vector<CaptionRecord> out;
  for (const auto& r : records) {
    if (r.translated_text && r.status != CaptionStatus::Rejected) out.push_back(r);
  }
  return out;
}

}  // namespace capqe
