#pragma once

// Private JSON codecs shared by the record, manifest, report and HTTP layers.

#include <json.hpp>

#include "capqe/types.hpp"

namespace capqe::detail {

using json = nlohmann::json;

json scores_to_json(const QEComponentScores& s);
QEComponentScores scores_from_json(const json& j);

json record_to_json(const CaptionRecord& r);
CaptionRecord record_from_json(const json& j);

// Reads a required member, naming the key in the error.
template <typename T>
T required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw json::other_error::create(501, std::string("missing key '") + key + "'", &j);
  }
  return it->get<T>();
}

}  // namespace capqe::detail
