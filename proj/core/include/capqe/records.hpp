#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capqe/types.hpp"

namespace capqe {

// One CaptionRecord per line. Keys are emitted in sorted order and reals in
// shortest round-trip form, so the bytes are a pure function of the record.
std::string serialize_record(const CaptionRecord& record);
CaptionRecord parse_record(std::string_view line, std::string_view source = "<record>",
                           std::size_t line_no = 1);

// Newline-terminated concatenation of serialize_record.
std::string serialize_records(std::span<const CaptionRecord> records);
std::vector<CaptionRecord> parse_records(std::string_view text,
                                         std::string_view source = "<records>");

std::vector<std::string> split_lines(std::string_view text);

}  // namespace capqe

namespace capqe {

// Records that carry a translation and were not rejected in review, in input order.
std::vector<CaptionRecord> exportable_records(std::span<const CaptionRecord> records);

}  // namespace capqe
